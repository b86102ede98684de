"""Dense square matrices in exact-rational and complex-floating flavors.

Exact flavor carries `fractions.Fraction` entries and backs all algebraic
theorems (characteristic polynomial, minors, inertia, Hermite counting,
interlacing).  Numeric flavor wraps a complex numpy array and is used by
the periodic-coefficient and three-body pipelines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, NonConvergenceError, UnsupportedFlavorError
from .ratpoly import (
    RationalPolynomial,
    RootInterval,
    count_real_roots,
    isolate_real_roots,
    refine_root,
    square_free_part,
    sturm_chain,
    poly_gcd,
)

EXACT = "exact"
NUMERIC = "numeric"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


class SquareMatrix:
    """n x n matrix, either exact (Fraction entries) or numeric (complex)."""

    __slots__ = ("n", "flavor", "rows")

    def __init__(self, rows, flavor=EXACT):
        if flavor not in (EXACT, NUMERIC):
            raise DomainError(f"unknown flavor {flavor!r}")
        n = len(rows)
        for r in rows:
            if len(r) != n:
                raise DomainError("matrix must be square")
        self.n = n
        self.flavor = flavor
        if flavor == EXACT:
            self.rows = tuple(tuple(_frac(x) for x in r) for r in rows)
        else:
            self.rows = np.array(rows, dtype=complex)

    # -- constructors ---------------------------------------------------

    @classmethod
    def identity(cls, n, flavor=EXACT):
        return cls(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)], flavor
        )

    @classmethod
    def from_numpy(cls, arr) -> "SquareMatrix":
        return cls(np.asarray(arr, dtype=complex), NUMERIC)

    @classmethod
    def from_json(cls, text: str) -> "SquareMatrix":
        data = json.loads(text)
        flavor = data.get("flavor", EXACT)
        if flavor == EXACT:
            rows = [[Fraction(x) for x in r] for r in data["rows"]]
        else:
            rows = [[complex(x[0], x[1]) for x in r] for r in data["rows"]]
        m = cls(rows, flavor)
        if "n" in data and data["n"] != m.n:
            raise DomainError("declared dimension does not match rows")
        return m

    def to_json(self) -> str:
        if self.flavor == EXACT:
            rows = [
                [f"{x.numerator}/{x.denominator}" for x in r] for r in self.rows
            ]
        else:
            rows = [[[z.real, z.imag] for z in r] for r in self.rows]
        return json.dumps({"n": self.n, "flavor": self.flavor, "rows": rows})

    # -- access -----------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j] if self.flavor == EXACT else self.rows[i, j]

    def to_numpy(self) -> np.ndarray:
        if self.flavor == NUMERIC:
            return np.array(self.rows, copy=True)
        return np.array(
            [[float(x) for x in r] for r in self.rows], dtype=complex
        )

    def to_exact(self) -> "SquareMatrix":
        if self.flavor == EXACT:
            return self
        raise UnsupportedFlavorError("cannot promote numeric matrix to exact")

    def is_symmetric(self) -> bool:
        if self.flavor == EXACT:
            return all(
                self.rows[i][j] == self.rows[j][i]
                for i in range(self.n)
                for j in range(i)
            )
        return bool(np.allclose(self.rows, self.rows.T))

    def __eq__(self, other):
        if not isinstance(other, SquareMatrix) or other.flavor != self.flavor:
            return NotImplemented
        if self.flavor == EXACT:
            return self.rows == other.rows
        return bool(np.array_equal(self.rows, other.rows))

    def __repr__(self):
        return f"SquareMatrix(n={self.n}, flavor={self.flavor!r})"

    # -- exact arithmetic ---------------------------------------------------

    def _require_exact(self):
        if self.flavor != EXACT:
            raise UnsupportedFlavorError("operation requires exact flavor")

    def add(self, other: "SquareMatrix") -> "SquareMatrix":
        self._require_exact()
        return SquareMatrix(
            [
                [self.rows[i][j] + other.rows[i][j] for j in range(self.n)]
                for i in range(self.n)
            ]
        )

    def sub(self, other: "SquareMatrix") -> "SquareMatrix":
        self._require_exact()
        return SquareMatrix(
            [
                [self.rows[i][j] - other.rows[i][j] for j in range(self.n)]
                for i in range(self.n)
            ]
        )

    def matmul(self, other: "SquareMatrix") -> "SquareMatrix":
        self._require_exact()
        n = self.n
        return SquareMatrix(
            [
                [
                    sum(self.rows[i][k] * other.rows[k][j] for k in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
        )

    def matvec(self, v):
        self._require_exact()
        return [
            sum(self.rows[i][k] * _frac(v[k]) for k in range(self.n))
            for i in range(self.n)
        ]

    def scale(self, k) -> "SquareMatrix":
        self._require_exact()
        k = _frac(k)
        return SquareMatrix([[k * x for x in r] for r in self.rows])

    def transpose(self) -> "SquareMatrix":
        if self.flavor == EXACT:
            return SquareMatrix(
                [[self.rows[j][i] for j in range(self.n)] for i in range(self.n)]
            )
        return SquareMatrix(self.rows.T, NUMERIC)

    def shift(self, lam) -> "SquareMatrix":
        """A - lam*I (exact flavor)."""
        self._require_exact()
        lam = _frac(lam)
        rows = [list(r) for r in self.rows]
        for i in range(self.n):
            rows[i][i] -= lam
        return SquareMatrix(rows)

    def det(self) -> Fraction:
        """Exact determinant by fraction-free (Bareiss) elimination."""
        self._require_exact()
        n = self.n
        m = [[x for x in r] for r in self.rows]
        sign = 1
        prev = Fraction(1)
        for k in range(n - 1):
            if m[k][k] == 0:
                piv = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
                if piv is None:
                    return Fraction(0)
                m[k], m[piv] = m[piv], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
                m[i][k] = Fraction(0)
            prev = m[k][k]
        return sign * m[n - 1][n - 1] if n else Fraction(1)

    def rank(self) -> int:
        self._require_exact()
        m = [list(r) for r in self.rows]
        return _row_echelon(m)

    def inverse(self) -> "SquareMatrix":
        self._require_exact()
        n = self.n
        aug = [
            list(self.rows[i]) + [Fraction(int(i == j)) for j in range(n)]
            for i in range(n)
        ]
        for col in range(n):
            piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
            if piv is None:
                raise DomainError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for i in range(n):
                if i != col and aug[i][col] != 0:
                    f = aug[i][col]
                    aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
        return SquareMatrix([r[n:] for r in aug])

    def null_space(self) -> list[list[Fraction]]:
        """Exact basis of the kernel (list of column vectors)."""
        self._require_exact()
        n = self.n
        m = [list(r) for r in self.rows]
        pivots = []
        row = 0
        for col in range(n):
            piv = next((i for i in range(row, n) if m[i][col] != 0), None)
            if piv is None:
                continue
            m[row], m[piv] = m[piv], m[row]
            pv = m[row][col]
            m[row] = [x / pv for x in m[row]]
            for i in range(n):
                if i != row and m[i][col] != 0:
                    f = m[i][col]
                    m[i] = [a - f * b for a, b in zip(m[i], m[row])]
            pivots.append(col)
            row += 1
        free = [c for c in range(n) if c not in pivots]
        basis = []
        for fc in free:
            v = [Fraction(0)] * n
            v[fc] = Fraction(1)
            for r, pc in enumerate(pivots):
                v[pc] = -m[r][fc]
            basis.append(v)
        return basis


def _row_echelon(m) -> int:
    """In-place Gaussian elimination over Fractions; returns the rank."""
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        m[rank] = [x / pv for x in m[rank]]
        for i in range(nrows):
            if i != rank and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


# -- characteristic polynomial and minors ---------------------------------


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial det(S*I - A)."""

    poly: RationalPolynomial

    @property
    def degree(self) -> int:
        return self.poly.degree


@dataclass(frozen=True)
class MinorSequence:
    """Leading-principal minors of A - S*I.

    deltas[k] = det((A - S*I) with the first k rows and columns deleted);
    deltas[0] is the full determinant, deltas[n] the constant 1.
    """

    deltas: tuple[RationalPolynomial, ...]


def char_poly(A: SquareMatrix) -> CharPoly:
    """Monic det(S*I - A), exact via Faddeev-LeVerrier, numeric via numpy."""
    if A.flavor == NUMERIC:
        cs = np.poly(A.rows)  # highest degree first, monic
        coeffs = [complex(c) for c in cs[::-1]]
        scale = max(abs(c) for c in coeffs)
        if any(abs(c.imag) > 1e-12 * scale for c in coeffs):
            raise UnsupportedFlavorError(
                "numeric char_poly requires (numerically) real coefficients"
            )
        return CharPoly(
            RationalPolynomial([Fraction(float(c.real)) for c in coeffs])
        )
    n = A.n
    # Faddeev-LeVerrier: M_0 = I, c_n = 1;
    # c_{n-k} = -trace(A M_{k-1})/k, M_k = A M_{k-1} + c_{n-k} I
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    M = SquareMatrix.identity(n)
    for k in range(1, n + 1):
        AM = A.matmul(M)
        tr = sum(AM.rows[i][i] for i in range(n))
        c = -tr / k
        coeffs[n - k] = c
        M = SquareMatrix(
            [
                [AM.rows[i][j] + (c if i == j else 0) for j in range(n)]
                for i in range(n)
            ]
        )
    return CharPoly(RationalPolynomial(coeffs))


def minor_sequence(A: SquareMatrix) -> MinorSequence:
    """Delta_k(S) = det of (A - S*I) after deleting the first k rows/columns."""
    A._require_exact()
    n = A.n
    deltas = []
    for k in range(n):
        sub = SquareMatrix([[A.rows[i][j] for j in range(k, n)] for i in range(k, n)])
        cp = char_poly(sub).poly  # monic det(SI - sub)
        sign = 1 if (n - k) % 2 == 0 else -1
        deltas.append(cp.scale(sign))
    deltas.append(RationalPolynomial([1]))
    return MinorSequence(tuple(deltas))


def adjugate(A: SquareMatrix) -> SquareMatrix:
    """Exact adjugate: adj(A)[i][j] = (-1)^{i+j} * minor_{j,i}."""
    A._require_exact()
    n = A.n
    if n == 1:
        return SquareMatrix([[1]])
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = SquareMatrix(
                [
                    [A.rows[r][c] for c in range(n) if c != i]
                    for r in range(n) if r != j
                ]
            )
            out[i][j] = (-1) ** (i + j) * sub.det()
    return SquareMatrix(out)


def lagrange_eigenvector(A: SquareMatrix, lam) -> list[Fraction]:
    """Nonzero column of adj(A - lam*I) for a simple exact eigenvalue."""
    A._require_exact()
    if not A.is_symmetric():
        raise DomainError("lagrange_eigenvector expects a symmetric matrix")
    lam = _frac(lam)
    cp = char_poly(A).poly
    if cp.eval_frac(lam) != 0:
        raise DomainError(f"{lam} is not an eigenvalue")
    shifted = A.shift(lam)
    adj = adjugate(shifted)
    for j in range(A.n):
        col = [adj.rows[i][j] for i in range(A.n)]
        if any(x != 0 for x in col):
            res = shifted.matvec(col)
            assert all(x == 0 for x in res)
            return col
    raise DomainError(
        "all adjugate columns vanish: eigenvalue is multiple; use jordan"
    )


# -- quadratic forms -------------------------------------------------------


@dataclass(frozen=True)
class QuadraticForm:
    """Real quadratic form given by its symmetric Gram matrix."""

    gram: SquareMatrix

    def __post_init__(self):
        self.gram._require_exact()
        if not self.gram.is_symmetric():
            raise DomainError("Gram matrix must be symmetric")


@dataclass(frozen=True)
class Inertia:
    n_pos: int
    n_neg: int
    n_zero: int

    @property
    def signature(self) -> int:
        return self.n_pos - self.n_neg


def reduce_to_squares(q: QuadraticForm):
    """Lagrange/Gauss completion of squares.

    Returns (coefficients, T) with T invertible and T^t G T diagonal equal
    to the coefficients.  Individual coefficients are basis-dependent; only
    their sign pattern (the inertia) is an invariant.
    """
    G = [[x for x in r] for r in q.gram.rows]
    n = q.gram.n
    T = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def congruence_col_op(j, i, f):
        # col_j += f * col_i on G (and matching row op), track in T
        for r in range(n):
            G[r][j] += f * G[r][i]
        for r in range(n):
            G[j][r] += f * G[i][r]
        for r in range(n):
            T[r][j] += f * T[r][i]

    def swap_cols(i, j):
        for r in range(n):
            G[r][i], G[r][j] = G[r][j], G[r][i]
        for r in range(n):
            G[i][r], G[j][r] = G[j][r], G[i][r]
        for r in range(n):
            T[r][i], T[r][j] = T[r][j], T[r][i]

    for k in range(n):
        if G[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if G[i][i] != 0), None)
            if piv is not None:
                swap_cols(k, piv)
            else:
                od = next(
                    (
                        (i, j)
                        for i in range(k, n)
                        for j in range(i + 1, n)
                        if G[i][j] != 0
                    ),
                    None,
                )
                if od is None:
                    break  # remaining block is zero
                i, j = od
                if i != k:
                    swap_cols(k, i)
                    i, j = k, (i if j == k else j)
                congruence_col_op(k, j, Fraction(1))  # x_k <- x_k + x_j
        if G[k][k] == 0:
            continue
        for j in range(k + 1, n):
            if G[k][j] != 0:
                congruence_col_op(j, k, -G[k][j] / G[k][k])
    coeffs = [G[i][i] for i in range(n)]
    return coeffs, SquareMatrix(T)


def inertia(q: QuadraticForm) -> Inertia:
    """Sylvester inertia (n_pos, n_neg, n_zero) of the form."""
    coeffs, _ = reduce_to_squares(q)
    pos = sum(1 for c in coeffs if c > 0)
    neg = sum(1 for c in coeffs if c < 0)
    return Inertia(pos, neg, len(coeffs) - pos - neg)


# -- Hermite root counting ---------------------------------------------------


def newton_power_sums(p: RationalPolynomial, upto: int) -> list[Fraction]:
    """Power sums s_0..s_upto of the roots, by Newton's identities."""
    if p.is_zero:
        raise DomainError("power sums of the zero polynomial")
    mon = p.monic()
    d = mon.degree
    # e_k = (-1)^k * coefficient of x^{d-k}
    e = [(-1) ** k * mon.coeffs[d - k] for k in range(d + 1)]
    s = [Fraction(d)]
    for k in range(1, upto + 1):
        if k <= d:
            acc = Fraction(0)
            for i in range(1, k):
                acc += (-1) ** (i - 1) * e[i] * s[k - i]
            acc += (-1) ** (k - 1) * k * e[k]
        else:
            acc = Fraction(0)
            for i in range(1, d + 1):
                acc += (-1) ** (i - 1) * e[i] * s[k - i]
        s.append(acc)
    return s


def hermite_root_count(p: RationalPolynomial) -> tuple[int, int]:
    """(distinct, distinct_real) root counts via the Hankel form of power sums.

    The Hankel matrix H[i][j] = s_{i+j} of Newton power sums has rank equal
    to the number of distinct complex roots, and signature equal to the
    number of distinct real roots (Hermite/Sylvester).
    """
    if p.is_zero:
        raise DomainError("root count of the zero polynomial")
    d = p.degree
    if d == 0:
        return (0, 0)
    s = newton_power_sums(p, 2 * d - 2)
    H = SquareMatrix([[s[i + j] for j in range(d)] for i in range(d)])
    form = QuadraticForm(H)
    ine = inertia(form)
    distinct = H.rank()
    return distinct, ine.signature


# -- interlacing ---------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraicRoot:
    """A real root of `poly` isolated by `interval`, with multiplicity."""

    poly: RationalPolynomial
    interval: RootInterval
    multiplicity: int

    def refined(self, width) -> RootInterval:
        iv = self.interval
        while iv.width() > width:
            m = iv.midpoint()
            if self.poly.eval_frac(m) == 0:
                half = iv.width() / 4
                iv = RootInterval(m - half, m + half)
                continue
            if count_real_roots(self.poly, iv.lo, m) == 1:
                iv = RootInterval(iv.lo, m)
            else:
                iv = RootInterval(m, iv.hi)
        return iv


def real_roots_with_multiplicity(p: RationalPolynomial) -> list[AlgebraicRoot]:
    """Isolated real roots of p in increasing order, with multiplicities."""
    f = square_free_part(p)
    roots = []
    for iv in isolate_real_roots(f):
        # multiplicity = largest m with gcd chain still vanishing
        m = 1
        q = p
        while True:
            q = poly_gcd(q, q.derivative())
            if q.is_zero or q.degree == 0:
                break
            if count_real_roots(q, iv.lo, iv.hi) == 1:
                m += 1
            else:
                break
        roots.append(AlgebraicRoot(f, iv, m))
    return roots


def _compare_roots(a: AlgebraicRoot, b: AlgebraicRoot) -> int:
    """-1 / 0 / +1 exact ordering of two isolated algebraic numbers."""
    g = poly_gcd(a.poly, b.poly)
    iva, ivb = a.interval, b.interval
    if not g.is_zero and g.degree >= 1:
        lo = max(iva.lo, ivb.lo)
        hi = min(iva.hi, ivb.hi)
        if lo < hi and count_real_roots(g, lo, hi) == 1:
            # the shared root could still differ from a's or b's root;
            # confirm both isolating intervals contain the common root
            if (
                count_real_roots(g, iva.lo, iva.hi) == 1
                and count_real_roots(g, ivb.lo, ivb.hi) == 1
            ):
                return 0
    # refine until disjoint
    ra, rb = a, b
    while True:
        if ra.interval.hi <= rb.interval.lo:
            return -1
        if rb.interval.hi <= ra.interval.lo:
            return 1
        w = min(ra.interval.width(), rb.interval.width()) / 2
        ra = AlgebraicRoot(ra.poly, ra.refined(w), ra.multiplicity)
        rb = AlgebraicRoot(rb.poly, rb.refined(w), rb.multiplicity)


@dataclass(frozen=True)
class InterlacingReport:
    passed: bool
    outer_intervals: tuple[RootInterval, ...]
    inner_intervals: tuple[RootInterval, ...]
    gap_results: tuple[bool, ...]


def interlacing_check(A: SquareMatrix) -> InterlacingReport:
    """Cauchy interlacing: roots of Delta_1 weakly interlace those of Delta_0.

    Both root lists are expanded with multiplicity and the classical
    lam_i <= mu_i <= lam_{i+1} chain is certified with exact comparisons.
    """
    A._require_exact()
    if not A.is_symmetric():
        raise DomainError("interlacing_check expects a symmetric matrix")
    ms = minor_sequence(A)
    p0, p1 = ms.deltas[0], ms.deltas[1]
    outer = real_roots_with_multiplicity(p0)
    inner = real_roots_with_multiplicity(p1) if p1.degree >= 1 else []
    lam = [r for r in outer for _ in range(r.multiplicity)]
    mu = [r for r in inner for _ in range(r.multiplicity)]
    n = A.n
    ok_overall = len(lam) == n and len(mu) == n - 1
    gaps = []
    if ok_overall:
        for i, m_root in enumerate(mu):
            left_ok = _compare_roots(lam[i], m_root) <= 0
            right_ok = _compare_roots(m_root, lam[i + 1]) <= 0
            gaps.append(left_ok and right_ok)
        ok_overall = all(gaps)
    return InterlacingReport(
        ok_overall,
        tuple(r.interval for r in outer),
        tuple(r.interval for r in inner),
        tuple(gaps),
    )


# -- power iteration ---------------------------------------------------------


@dataclass(frozen=True)
class PowerIterationResult:
    eigenvalue: float
    eigenvector: np.ndarray
    iterations: int
    converged: bool
    residual: float


def power_iteration(A: SquareMatrix, tol=1e-10, max_iter=10_000) -> PowerIterationResult:
    """Dominant eigenpair of a symmetric matrix by power iteration.

    Deterministic: starts from the all-ones vector, restarts once from a
    fixed alternate vector if the Rayleigh quotient stagnates at a
    non-eigenvector (e.g. the start is orthogonal to the dominant mode).
    """
    M = A.to_numpy().real
    if not np.allclose(M, M.T):
        raise DomainError("power_iteration expects a symmetric matrix")
    n = M.shape[0]
    norm_A = np.linalg.norm(M, 2)
    if norm_A == 0:
        return PowerIterationResult(0.0, np.eye(n)[:, 0], 0, True, 0.0)

    def run(v0):
        v = v0 / np.linalg.norm(v0)
        lam = float(v @ M @ v)
        for it in range(1, max_iter + 1):
            w = M @ v
            nw = np.linalg.norm(w)
            if nw == 0:
                return 0.0, v, it, True  # v in the kernel: eigenvector for 0
            v = w / nw
            lam = float(v @ M @ v)
            res = np.linalg.norm(M @ v - lam * v)
            if res <= tol * norm_A:
                return lam, v, it, True
        return lam, v, max_iter, False

    v0 = np.ones(n)
    lam, v, it, ok = run(v0)
    if not ok:
        v0 = np.array([1.0 / (k + 1) for k in range(n)])
        lam, v, it2, ok = run(v0)
        it += it2
    res = float(np.linalg.norm(M @ v - lam * v))
    if not ok:
        raise NonConvergenceError(
            f"power iteration did not converge in {it} steps "
            f"(residual {res:.3e}); dominant eigenvalue may be tied",
            best=PowerIterationResult(lam, v, it, False, res),
        )
    return PowerIterationResult(lam, v, it, True, res)
