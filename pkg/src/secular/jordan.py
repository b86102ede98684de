"""Eigenvalue multiplicity analysis and Jordan canonical decomposition.

Exact flavor handles matrices whose eigenvalues are all rational; anything
else is served by the numeric flavor, which clusters floating eigenvalues
within a tolerance before reading off block structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DomainError,
    InternalInconsistencyError,
    UnsupportedFlavorError,
)
from .matrixcore import EXACT, NUMERIC, SquareMatrix, char_poly, _row_echelon
from .ratpoly import RationalPolynomial, poly_gcd, square_free_part

DEFAULT_CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class MultiplicityReport:
    eigenvalue: Fraction
    algebraic: int
    geometric: int
    block_sizes: tuple[int, ...]


@dataclass(frozen=True)
class JordanDecomposition:
    J: SquareMatrix
    P: SquareMatrix
    blocks: tuple[tuple[complex | Fraction, tuple[int, ...]], ...]
    warnings: tuple[str, ...] = ()

    @property
    def eigenvalues(self):
        return [lam for lam, _ in self.blocks]


@dataclass(frozen=True)
class CanonicalType3:
    tag: str  # one of A..E
    scalar: bool = False  # triple eigenvalue, diagonalizable (alpha*I)


@dataclass(frozen=True)
class DiagonalizabilityReport:
    passed: bool
    annihilated_by_squarefree: bool
    per_eigenvalue: tuple[MultiplicityReport, ...]


# -- rational spectrum extraction --------------------------------------------


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def rational_roots(p: RationalPolynomial) -> dict[Fraction, int]:
    """Rational roots of p with multiplicities (rational root theorem)."""
    if p.is_zero:
        raise DomainError("roots of the zero polynomial")
    roots: dict[Fraction, int] = {}
    # strip roots at zero
    q = p
    while q.coeffs and q.coeffs[0] == 0:
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
        q = RationalPolynomial(q.coeffs[1:])
    if q.degree == 0:
        return roots
    import math

    den = 1
    for c in q.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in q.coeffs]
    for num_d in _divisors(ints[0]):
        for den_d in _divisors(ints[-1]):
            for sgn in (1, -1):
                cand = Fraction(sgn * num_d, den_d)
                while q.eval_frac(cand) == 0:
                    roots[cand] = roots.get(cand, 0) + 1
                    q = q // RationalPolynomial([-cand, 1])
                    if q.degree == 0:
                        return roots
    return roots


# -- exact multiplicity ---------------------------------------------------------


def _rank_sequence(A: SquareMatrix, lam: Fraction, upto: int) -> list[int]:
    """Ranks of (A - lam I)^k for k = 0..upto (exact)."""
    N = A.shift(lam)
    ranks = [A.n]
    Pk = N
    for _ in range(upto):
        ranks.append(Pk.rank())
        Pk = Pk.matmul(N)
    return ranks


def _blocks_from_ranks(ranks: list[int], algebraic: int) -> tuple[int, ...]:
    """Jordan block sizes from the rank sequence of powers of A - lam I."""
    # blocks of size >= k: rank^{k-1} - rank^k
    kmax = len(ranks) - 1
    ge = [ranks[k - 1] - ranks[k] for k in range(1, kmax + 1)]
    sizes = []
    for k in range(1, kmax + 1):
        exactly = ge[k - 1] - (ge[k] if k < kmax else 0)
        sizes.extend([k] * exactly)
    sizes.sort(reverse=True)
    assert sum(sizes) == algebraic
    return tuple(sizes)


def multiplicity(A: SquareMatrix, lam) -> MultiplicityReport:
    """Algebraic/geometric multiplicity and block sizes at an exact eigenvalue."""
    A._require_exact()
    lam = Fraction(lam)
    cp = char_poly(A).poly
    if cp.eval_frac(lam) != 0:
        raise DomainError(f"{lam} is not an eigenvalue")
    alg = 0
    q = cp
    lin = RationalPolynomial([-lam, 1])
    while q.eval_frac(lam) == 0:
        q = q // lin
        alg += 1
        if q.is_zero or q.degree == 0:
            break
    ranks = _rank_sequence(A, lam, alg)
    geom = A.n - ranks[1]
    sizes = _blocks_from_ranks(ranks, alg)
    return MultiplicityReport(lam, alg, geom, sizes)


def darboux_minor_vanishing_order(A: SquareMatrix, lam) -> int:
    """Largest p with all polynomial minors of det(A - SI) of orders 1..p-1
    vanishing at lam; equals the geometric multiplicity.

    Order-k minors are the determinants of (n-k) x (n-k) submatrices of
    A - SI; they all vanish at lam iff rank(A - lam I) < n - k.
    """
    A._require_exact()
    lam = Fraction(lam)
    r = A.shift(lam).rank()
    return A.n - r


# -- exact Jordan --------------------------------------------------------------


class _SpanTracker:
    """Incremental exact span membership via Gaussian elimination."""

    def __init__(self, n):
        self.n = n
        self.rows = []  # echelon rows

    def contains(self, v) -> bool:
        return self._reduce(list(v)) is None

    def add(self, v) -> bool:
        """Add v to the span; returns True if it enlarged the span."""
        red = self._reduce(list(v))
        if red is None:
            return False
        self.rows.append(red)
        self.rows.sort(key=lambda r: next(i for i, x in enumerate(r) if x != 0))
        return True

    def _reduce(self, v):
        for row in self.rows:
            piv = next(i for i, x in enumerate(row) if x != 0)
            if v[piv] != 0:
                f = v[piv] / row[piv]
                v = [a - f * b for a, b in zip(v, row)]
        if all(x == 0 for x in v):
            return None
        return v


def _exact_chains(A: SquareMatrix, lam: Fraction, report: MultiplicityReport):
    """Jordan chains at lam, each ordered bottom-up: [N^{k-1}v, ..., Nv, v]."""
    N = A.shift(lam)
    kmax = report.block_sizes[0]
    powers = [SquareMatrix.identity(A.n)]
    for _ in range(kmax):
        powers.append(powers[-1].matmul(N))
    kernels = [[]] + [powers[k].null_space() for k in range(1, kmax + 1)]

    chains = []
    for k in range(kmax, 0, -1):
        need = sum(1 for s in report.block_sizes if s == k)
        if need == 0:
            continue
        tracker = _SpanTracker(A.n)
        for v in kernels[k - 1]:
            tracker.add(v)
        for chain in chains:
            # height-k vector of a longer chain
            tracker.add(chain[k - 1])
        got = 0
        for v in kernels[k]:
            if got == need:
                break
            if tracker.add(v):
                chain = [v]
                for _ in range(k - 1):
                    chain.append(N.matvec(chain[-1]))
                chain.reverse()
                chains.append(chain)
                got += 1
        if got != need:
            raise InternalInconsistencyError(
                f"could not complete Jordan chains at {lam}"
            )
    chains.sort(key=len, reverse=True)
    return chains


def _assemble_exact(A: SquareMatrix, per_eig: list[MultiplicityReport]):
    n = A.n
    cols = []
    jrows = [[Fraction(0)] * n for _ in range(n)]
    blocks = []
    pos = 0
    for rep in sorted(per_eig, key=lambda r: r.eigenvalue):
        chains = _exact_chains(A, rep.eigenvalue, rep)
        blocks.append((rep.eigenvalue, tuple(len(c) for c in chains)))
        for chain in chains:
            for h, v in enumerate(chain):
                j = pos + h
                jrows[j][j] = rep.eigenvalue
                if h > 0:
                    jrows[j - 1][j] = Fraction(1)
                cols.append(v)
            pos += len(chain)
    P = SquareMatrix([[cols[j][i] for j in range(n)] for i in range(n)])
    J = SquareMatrix(jrows)
    return J, P, tuple(blocks)


# -- numeric Jordan ---------------------------------------------------------------


def _cluster(values: np.ndarray, tol: float):
    """Group values whose pairwise distance is below tol (union-find)."""
    m = len(values)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(values[i] - values[j]) <= tol:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _numeric_rank(M: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if len(s) == 0:
        return 0
    cutoff = max(tol, s[0] * max(M.shape) * np.finfo(float).eps * 10)
    return int(np.sum(s > cutoff))


def _numeric_null_basis(M: np.ndarray, tol: float) -> np.ndarray:
    u, s, vh = np.linalg.svd(M)
    cutoff = max(tol, (s[0] if len(s) else 0.0) * max(M.shape) * np.finfo(float).eps * 10)
    null_mask = np.concatenate([s <= cutoff, np.ones(M.shape[1] - len(s), bool)])
    return vh[null_mask].conj().T  # columns span the kernel


def _numeric_chains(M: np.ndarray, lam: complex, sizes: tuple[int, ...], tol: float):
    n = M.shape[0]
    N = M - lam * np.eye(n)
    kmax = sizes[0]
    powers = [np.eye(n)]
    for _ in range(kmax):
        powers.append(powers[-1] @ N)
    kernels = [np.zeros((n, 0))] + [
        _numeric_null_basis(powers[k], tol) for k in range(1, kmax + 1)
    ]
    chains = []
    for k in range(kmax, 0, -1):
        need = sum(1 for s in sizes if s == k)
        if need == 0:
            continue
        base = [kernels[k - 1]] + [c[k - 1][:, None] for c in chains]
        covered = np.column_stack(base)
        got = 0
        Kk = kernels[k]
        for idx in range(Kk.shape[1]):
            if got == need:
                break
            v = Kk[:, idx]
            if covered.shape[1]:
                q, _, _, _ = np.linalg.lstsq(covered, v, rcond=None)
                resid = v - covered @ q
            else:
                resid = v
            if np.linalg.norm(resid) > 1e-6 * max(np.linalg.norm(v), 1.0):
                v = resid / np.linalg.norm(resid)
                chain = [v]
                for _ in range(k - 1):
                    chain.append(N @ chain[-1])
                chain.reverse()
                chains.append(chain)
                covered = np.column_stack([covered, v])
                got += 1
        if got != need:
            raise InternalInconsistencyError(
                f"numeric Jordan chain construction failed at {lam}"
            )
    chains.sort(key=len, reverse=True)
    return chains


def _jordan_numeric(A: SquareMatrix, cluster_tol: float) -> JordanDecomposition:
    M = A.to_numpy()
    n = A.n
    scale = max(np.linalg.norm(M, 2), 1.0)
    tol = cluster_tol * scale
    eigs = np.linalg.eigvals(M)
    groups = _cluster(eigs, tol)
    warnings = []
    centers = [complex(np.mean(eigs[g])) for g in groups]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) < 10 * tol:
                warnings.append(
                    f"eigenvalue clusters {centers[i]:.6g} and {centers[j]:.6g} "
                    "are within 10x of merging: block structure ill-conditioned"
                )
    items = sorted(
        zip(centers, groups), key=lambda cg: (cg[0].real, cg[0].imag)
    )
    cols = []
    jmat = np.zeros((n, n), dtype=complex)
    blocks = []
    pos = 0
    for lam, g in items:
        alg = len(g)
        N = M - lam * np.eye(n)
        ranks = [n]
        Pk = N.copy()
        for _ in range(alg):
            ranks.append(_numeric_rank(Pk, tol))
            Pk = Pk @ N
        sizes = _blocks_from_ranks(ranks, alg)
        chains = _numeric_chains(M, lam, sizes, tol)
        blocks.append((lam, tuple(len(c) for c in chains)))
        for chain in chains:
            for h, v in enumerate(chain):
                j = pos + h
                jmat[j, j] = lam
                if h > 0:
                    jmat[j - 1, j] = 1.0
                cols.append(v)
            pos += len(chain)
    P = np.column_stack(cols)
    return JordanDecomposition(
        SquareMatrix(jmat, NUMERIC), SquareMatrix(P, NUMERIC),
        tuple(blocks), tuple(warnings),
    )


def jordan_form(A: SquareMatrix, cluster_tol=DEFAULT_CLUSTER_TOL) -> JordanDecomposition:
    """Jordan decomposition A = P J P^{-1} with deterministic ordering.

    Exact flavor requires every eigenvalue rational; blocks are ordered by
    ascending eigenvalue (numeric: lexicographic by (re, im)) and by
    decreasing size within an eigenvalue.
    """
    if A.flavor == NUMERIC:
        return _jordan_numeric(A, cluster_tol)
    cp = char_poly(A).poly
    roots = rational_roots(cp)
    if sum(roots.values()) != A.n:
        raise UnsupportedFlavorError(
            "matrix has irrational eigenvalues; use the numeric flavor"
        )
    per_eig = [multiplicity(A, lam) for lam in roots]
    J, P, blocks = _assemble_exact(A, per_eig)
    return JordanDecomposition(J, P, blocks)


def classify_3x3(A: SquareMatrix) -> CanonicalType3:
    """One of the five 3x3 canonical types (plus the scalar degenerate case).

    A: three distinct eigenvalues.  B: double eigenvalue, one 2-block.
    C: double eigenvalue, diagonalizable (or scalar, flagged).  D: triple,
    one 3-block.  E: triple, 2-block + 1-block.
    """
    if A.n != 3:
        raise DomainError("classify_3x3 requires a 3x3 matrix")
    if A.flavor == NUMERIC:
        dec = _jordan_numeric(A, DEFAULT_CLUSTER_TOL)
        mults = [(lam, sorted(sizes, reverse=True)) for lam, sizes in dec.blocks]
    else:
        cp = char_poly(A).poly
        g = poly_gcd(cp, cp.derivative())
        if g.degree == 0:
            return CanonicalType3("A")
        # any repeated root of a rational cubic is rational
        rep_roots = rational_roots(g)
        mults = []
        for lam in rep_roots:
            rep = multiplicity(A, lam)
            mults.append((lam, sorted(rep.block_sizes, reverse=True)))
    max_alg = max(sum(sizes) for _, sizes in mults)
    if max_alg == 1:
        return CanonicalType3("A")
    lam, sizes = max(mults, key=lambda ms: sum(ms[1]))
    if max_alg == 2:
        return CanonicalType3("B" if sizes[0] == 2 else "C")
    if sizes[0] == 3:
        return CanonicalType3("D")
    if sizes[0] == 2:
        return CanonicalType3("E")
    return CanonicalType3("C", scalar=True)


def symmetric_diagonalizability_check(A: SquareMatrix) -> DiagonalizabilityReport:
    """Certify that a symmetric exact matrix has only size-1 Jordan blocks.

    Evidence: the square-free part of the characteristic polynomial
    annihilates A (exact, covers irrational eigenvalues), plus per-rational-
    eigenvalue equality of algebraic and geometric multiplicities.
    """
    A._require_exact()
    if not A.is_symmetric():
        raise DomainError("expected a symmetric matrix")
    cp = char_poly(A).poly
    sf = square_free_part(cp)
    # evaluate sf(A) exactly
    acc = SquareMatrix(
        [[sf.coeffs[0] if i == j else Fraction(0) for j in range(A.n)] for i in range(A.n)]
    )
    Ak = SquareMatrix.identity(A.n)
    for c in sf.coeffs[1:]:
        Ak = Ak.matmul(A)
        acc = acc.add(Ak.scale(c))
    annihilated = all(
        acc.rows[i][j] == 0 for i in range(A.n) for j in range(A.n)
    )
    reports = []
    for lam in rational_roots(cp):
        rep = multiplicity(A, lam)
        reports.append(rep)
    ok = annihilated and all(r.algebraic == r.geometric for r in reports)
    if not ok:
        raise InternalInconsistencyError(
            "symmetric matrix failed diagonalizability check: "
            "this contradicts the spectral theorem and signals a bug"
        )
    return DiagonalizabilityReport(True, annihilated, tuple(reports))
