"""Closed-form solutions and stability of constant-coefficient linear systems.

Two independent solvers are provided: `solve_constant` goes through the
Jordan decomposition, `solve_residue` through the residues of the resolvent
adj(sI - A)/det(sI - A).  Both emit a `LinearSolution`, a sum of terms
poly(t) * exp(lam*t), with secular (polynomial) factors explicit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .jordan import jordan_form, multiplicity, rational_roots
from .matrixcore import EXACT, NUMERIC, SquareMatrix, char_poly
from .ratpoly import RationalPolynomial

_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class SolutionTerm:
    """poly(t) * exp(lam * t) with vector polynomial coefficients.

    coeffs[k] is the vector multiplying t^k.
    """

    lam: complex
    coeffs: tuple[tuple[complex, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class LinearSolution:
    terms: tuple[SolutionTerm, ...]
    dim: int

    def __call__(self, t: float) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for term in self.terms:
            e = cmath.exp(term.lam * t)
            tk = 1.0
            for coeff in term.coeffs:
                out += e * tk * np.asarray(coeff)
                tk *= t
        return out

    @property
    def max_degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    def has_secular_terms(self) -> bool:
        return self.max_degree >= 1


def _canonical_terms(raw, dim, drop_tol) -> LinearSolution:
    """Merge per-eigenvalue contributions, drop negligible coefficients,
    order terms by (re, im) and coefficients by degree."""
    scale = max(
        (abs(c) for lam, coeffs in raw for vec in coeffs for c in vec),
        default=1.0,
    )
    merged: dict[complex, list[np.ndarray]] = {}
    for lam, coeffs in raw:
        key = complex(lam)
        bucket = merged.setdefault(key, [])
        for k, vec in enumerate(coeffs):
            while len(bucket) <= k:
                bucket.append(np.zeros(dim, dtype=complex))
            bucket[k] = bucket[k] + np.asarray(vec, dtype=complex)
    terms = []
    for lam in sorted(merged, key=lambda z: (z.real, z.imag)):
        coeffs = merged[lam]
        while coeffs and np.max(np.abs(coeffs[-1])) <= drop_tol * scale:
            coeffs.pop()
        if not coeffs:
            continue
        terms.append(
            SolutionTerm(lam, tuple(tuple(complex(x) for x in v) for v in coeffs))
        )
    return LinearSolution(tuple(terms), dim)


def _exact_spectrum(A: SquareMatrix):
    if A.flavor != EXACT:
        return None
    cp = char_poly(A).poly
    roots = rational_roots(cp)
    if sum(roots.values()) != A.n:
        return None
    return roots


# -- Jordan route ---------------------------------------------------------------


def solve_constant(A: SquareMatrix, x0) -> LinearSolution:
    """Closed form of x' = Ax, x(0) = x0 via the Jordan decomposition.

    Exact-rational spectra are handled in exact arithmetic, so secular-term
    presence is decided exactly; anything else falls back to the numeric
    Jordan form with the documented clustering tolerance.
    """
    n = A.n
    spectrum = _exact_spectrum(A)
    if spectrum is not None:
        dec = jordan_form(A)
        y0 = dec.P.inverse().matvec([Fraction(x) if not isinstance(x, Fraction) else x
                                     for x in _as_fracs(x0)])
        raw = []
        pos = 0
        Pcols = dec.P.rows
        for lam, sizes in dec.blocks:
            for s in sizes:
                # block contribution: coeff of t^d is sum_i P[:,pos+i] y0[pos+i+d]/d!
                coeffs = []
                for d in range(s):
                    vec = [Fraction(0)] * n
                    nonzero = False
                    for i in range(s - d):
                        y = y0[pos + i + d]
                        if y == 0:
                            continue
                        nonzero = True
                        for r in range(n):
                            vec[r] += Pcols[r][pos + i] * y
                    if nonzero:
                        fact = Fraction(1, math.factorial(d))
                        coeffs.append([complex(float(v * fact)) for v in vec])
                    else:
                        coeffs.append([0.0] * n)
                # trim exact-zero trailing coefficients before conversion
                while coeffs and all(c == 0 for c in coeffs[-1]):
                    coeffs.pop()
                if coeffs:
                    raw.append((complex(float(lam)), coeffs))
                pos += s
        return _canonical_terms(raw, n, drop_tol=0.0)

    dec = jordan_form(SquareMatrix(A.to_numpy(), NUMERIC))
    P = dec.P.rows
    y0 = np.linalg.solve(P, np.asarray(x0, dtype=complex))
    raw = []
    pos = 0
    for lam, sizes in dec.blocks:
        for s in sizes:
            coeffs = []
            for d in range(s):
                vec = np.zeros(n, dtype=complex)
                for i in range(s - d):
                    vec += P[:, pos + i] * y0[pos + i + d]
                coeffs.append(vec / math.factorial(d))
            raw.append((lam, coeffs))
            pos += s
    return _canonical_terms(raw, n, drop_tol=_ZERO_TOL)


def _as_fracs(x0):
    out = []
    for x in x0:
        out.append(x if isinstance(x, Fraction) else Fraction(x))
    return out


# -- residue route ----------------------------------------------------------------


def _resolvent_numerator(A: SquareMatrix):
    """adj(sI - A) as a list of matrices M_k with adj = sum M_k s^{n-1-k},
    by the Faddeev-LeVerrier recursion (exact flavor)."""
    n = A.n
    Ms = [SquareMatrix.identity(n)]
    M = SquareMatrix.identity(n)
    for k in range(1, n):
        AM = A.matmul(M)
        tr = sum(AM.rows[i][i] for i in range(n))
        c = -tr / k
        M = SquareMatrix(
            [
                [AM.rows[i][j] + (c if i == j else 0) for j in range(n)]
                for i in range(n)
            ]
        )
        Ms.append(M)
    return Ms


def _series_inverse(coeffs, order):
    """1 / (c0 + c1 u + ...) as a power series to given order; c0 != 0."""
    inv = [1 / coeffs[0]]
    for k in range(1, order + 1):
        acc = 0
        for i in range(1, k + 1):
            ci = coeffs[i] if i < len(coeffs) else 0
            acc += ci * inv[k - i]
        inv.append(-acc / coeffs[0])
    return inv


def _poly_shift(coeffs, lam):
    """Coefficients of p(u + lam) given coefficients of p (lowest first)."""
    res = [coeffs[-1]]
    for c in reversed(coeffs[:-1]):
        # res = res * (u + lam) + c
        new = [0] * (len(res) + 1)
        for k, r in enumerate(res):
            new[k + 1] += r
            new[k] += r * lam
        new[0] += c
        res = new
    return res


def solve_residue(A: SquareMatrix, x0) -> LinearSolution:
    """Closed form via residues of adj(sI-A) x0 / det(sI-A) * exp(s t)."""
    n = A.n
    spectrum = _exact_spectrum(A)
    if spectrum is not None:
        Ms = _resolvent_numerator(A)
        cp = char_poly(A).poly
        x = _as_fracs(x0)
        # numerator vector polynomial: N(s) = sum_k (M_k x0) s^{n-1-k}
        numer = [[Fraction(0)] * n for _ in range(n)]  # numer[deg][component]
        for k, Mk in enumerate(Ms):
            v = Mk.matvec(x)
            deg = n - 1 - k
            for r in range(n):
                numer[deg][r] += v[r]
        raw = []
        for lam, m in spectrum.items():
            q = cp
            for _ in range(m):
                q = q // RationalPolynomial([-lam, 1])
            qs = _poly_shift(list(q.coeffs), lam)
            inv = _series_inverse(qs, m - 1)
            coeffs = [[Fraction(0)] * n for _ in range(m)]
            for r in range(n):
                comp = [numer[d][r] for d in range(n)]
                ns = _poly_shift(comp, lam)
                # Taylor coefficients of N_r(s)/q(s) around lam, to order m-1
                for i in range(m):
                    d = Fraction(0)
                    for a in range(i + 1):
                        na = ns[a] if a < len(ns) else Fraction(0)
                        d += na * inv[i - a]
                    # residue contributes d_i * t^{m-1-i} / (m-1-i)!
                    coeffs[m - 1 - i][r] += d / math.factorial(m - 1 - i)
            clist = []
            for vec in coeffs:
                clist.append([complex(float(v)) for v in vec])
            while clist and all(c == 0 for c in clist[-1]):
                clist.pop()
            if clist:
                raw.append((complex(float(lam)), clist))
        return _canonical_terms(raw, n, drop_tol=0.0)

    # numeric route: same algebra in complex floats
    M = A.to_numpy()
    x = np.asarray(x0, dtype=complex)
    dec = jordan_form(SquareMatrix(M, NUMERIC))
    # numerator via numeric Faddeev-LeVerrier
    Ms = [np.eye(n, dtype=complex)]
    B = np.eye(n, dtype=complex)
    for k in range(1, n):
        AM = M @ B
        c = -np.trace(AM) / k
        B = AM + c * np.eye(n)
        Ms.append(B)
    numer = [Ms[k] @ x for k in range(n)]  # coefficient of s^{n-1-k}
    cp = np.poly(M)  # monic, highest first
    raw = []
    for lam, sizes in dec.blocks:
        m = sum(sizes)
        q = cp.copy()
        for _ in range(m):
            q = np.polydiv(q, np.array([1.0, -lam]))[0]
        qs_low = _poly_shift(list(q[::-1]), lam)
        inv = _series_inverse(qs_low, m - 1)
        coeffs = [np.zeros(n, dtype=complex) for _ in range(m)]
        for r in range(n):
            comp = [numer[k][r] for k in range(n)][::-1]  # lowest degree first
            ns = _poly_shift(comp, lam)
            for i in range(m):
                d = sum(
                    (ns[a] if a < len(ns) else 0.0) * inv[i - a]
                    for a in range(i + 1)
                )
                coeffs[m - 1 - i][r] += d / math.factorial(m - 1 - i)
        raw.append((lam, coeffs))
    return _canonical_terms(raw, n, drop_tol=_ZERO_TOL)


# -- stability --------------------------------------------------------------------


FIRST_ORDER = "first_order"
SECOND_ORDER = "second_order"

BOUNDED = "bounded_oscillatory"
UNSTABLE = "exponentially_unstable"
SECULAR = "secular_polynomial_growth"
DECAYING = "decaying"


@dataclass(frozen=True)
class StabilityVerdict:
    tag: str
    witnesses: tuple[tuple[complex, int], ...]  # (exponent, block size)
    strict_lagrange: bool  # Lagrange's original criterion: real, negative, distinct


@dataclass(frozen=True)
class SecondOrderSystem:
    """d^2 xi / dt^2 = A xi with symmetric A."""

    A: SquareMatrix

    def __post_init__(self):
        if not self.A.is_symmetric():
            raise DomainError("second-order system matrix must be symmetric")


def _eigen_structure(A: SquareMatrix, tol=1e-9):
    """[(eigenvalue, max block size, algebraic mult)] from Jordan data."""
    spectrum = _exact_spectrum(A)
    if spectrum is not None:
        out = []
        for lam in spectrum:
            rep = multiplicity(A, lam)
            out.append((complex(float(lam)), max(rep.block_sizes), rep.algebraic))
        return out
    dec = jordan_form(SquareMatrix(A.to_numpy(), NUMERIC))
    return [(lam, max(sizes), sum(sizes)) for lam, sizes in dec.blocks]


def classify_stability(A: SquareMatrix, form=FIRST_ORDER, tol=1e-9) -> StabilityVerdict:
    """Structural stability verdict of x' = Ax or xi'' = A xi.

    Second-order eigenvalues alpha induce exponents +-sqrt(alpha); the
    classification is worst-case over initial conditions.  The verdict also
    carries Lagrange's strict criterion (exponents real, negative, distinct
    for first order; alpha real, negative, distinct for second order),
    which is sufficient but not necessary for boundedness.
    """
    if form == FIRST_ORDER:
        structure = _eigen_structure(A)
        exponents = [(lam, blk) for lam, blk, _ in structure]
    elif form == SECOND_ORDER:
        if not A.is_symmetric():
            raise DomainError("second-order classification requires symmetric A")
        structure = _eigen_structure(A)
        exponents = []
        for alpha, blk, _ in structure:
            a = alpha.real  # symmetric: eigenvalues real
            if abs(a) <= tol:
                # alpha = 0 doubles into a 2-block at exponent 0 (drift a + bt)
                exponents.append((0j, 2 * blk))
            elif a > 0:
                r = math.sqrt(a)
                exponents.extend([(complex(r), blk), (complex(-r), blk)])
            else:
                w = math.sqrt(-a)
                exponents.extend([(complex(0, w), blk), (complex(0, -w), blk)])
    else:
        raise DomainError(f"unknown form {form!r}")

    unstable = [(lam, b) for lam, b in exponents if lam.real > tol]
    boundary = [(lam, b) for lam, b in exponents if abs(lam.real) <= tol]
    secular = [(lam, b) for lam, b in boundary if b >= 2]

    # Lagrange's strict criterion: eigenvalues real, negative, and simple
    strict = all(
        abs(lam.imag) <= tol and lam.real < -tol and alg == 1
        for lam, _, alg in structure
    )

    if unstable:
        return StabilityVerdict(UNSTABLE, tuple(unstable), strict)
    if secular:
        return StabilityVerdict(SECULAR, tuple(secular), strict)
    if boundary:
        return StabilityVerdict(BOUNDED, tuple(boundary), strict)
    return StabilityVerdict(DECAYING, tuple(exponents), strict)


# -- Lagrange small oscillations ----------------------------------------------------


@dataclass(frozen=True)
class OscillationMode:
    alpha: float  # eigenvalue of A
    rate: float  # sqrt(|alpha|): frequency if alpha < 0, growth rate if > 0
    vector: tuple[float, ...]


def solve_lagrange_oscillation(sys: SecondOrderSystem, x0, v0):
    """Modal solution of xi'' = A xi for symmetric A.

    Returns (LinearSolution, modes, verdict).  Negative eigenvalues yield
    trigonometric modes at frequency sqrt(-alpha); positive ones real
    exponentials; zero eigenvalues linear drift.
    """
    A = sys.A
    M = A.to_numpy().real
    n = A.n
    w, V = np.linalg.eigh(M)
    x = np.asarray(x0, dtype=float)
    v = np.asarray(v0, dtype=float)
    raw = []
    modes = []
    for k in range(n):
        alpha = float(w[k])
        u = V[:, k]
        a = float(u @ x)
        b = float(u @ v)
        modes.append(OscillationMode(alpha, math.sqrt(abs(alpha)), tuple(u)))
        if abs(alpha) < 1e-12:
            raw.append((0j, [a * u, b * u]))
        elif alpha < 0:
            om = math.sqrt(-alpha)
            cpos = (a / 2) + b / (2j * om)
            cneg = (a / 2) - b / (2j * om)
            raw.append((complex(0, om), [cpos * u.astype(complex)]))
            raw.append((complex(0, -om), [cneg * u.astype(complex)]))
        else:
            r = math.sqrt(alpha)
            cpos = (a / 2) + b / (2 * r)
            cneg = (a / 2) - b / (2 * r)
            raw.append((complex(r), [cpos * u.astype(complex)]))
            raw.append((complex(-r), [cneg * u.astype(complex)]))
    sol = _canonical_terms(raw, n, drop_tol=0.0)
    verdict = classify_stability(A, SECOND_ORDER)
    return sol, modes, verdict
