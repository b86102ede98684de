import random
from fractions import Fraction

import numpy as np
import pytest

from secular.errors import DomainError, UnsupportedFlavorError
from secular.jordan import (
    classify_3x3,
    darboux_minor_vanishing_order,
    jordan_form,
    multiplicity,
    rational_roots,
    symmetric_diagonalizability_check,
)
from secular.matrixcore import SquareMatrix, char_poly
from secular.ratpoly import RationalPolynomial as P


def planted_jordan(rng, n, eig_pool=(-2, -1, 0, 1, 2, 3)):
    """Random P J P^{-1} with rational spectrum; returns (A, J, eigen blocks)."""
    sizes = []
    left = n
    while left:
        s = rng.randint(1, min(left, 3))
        sizes.append(s)
        left -= s
    lams = [Fraction(rng.choice(eig_pool)) for _ in sizes]
    rows = [[Fraction(0)] * n for _ in range(n)]
    pos = 0
    spec = {}
    for lam, s in zip(lams, sizes):
        for i in range(s):
            rows[pos + i][pos + i] = lam
            if i:
                rows[pos + i - 1][pos + i] = Fraction(1)
        spec.setdefault(lam, []).append(s)
        pos += s
    J = SquareMatrix(rows)
    while True:
        M = SquareMatrix([[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)])
        if M.det() != 0:
            break
    A = M.matmul(J).matmul(M.inverse())
    return A, spec


class TestMultiplicity:
    def test_nilpotent_block(self):
        A = SquareMatrix([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
        rep = multiplicity(A, 0)
        assert (rep.algebraic, rep.geometric, rep.block_sizes) == (3, 1, (3,))

    def test_worked_simple_root(self):
        A = SquareMatrix([[1, -1, 0], [-1, 2, 1], [0, 1, 1]])
        rep = multiplicity(A, 0)
        assert (rep.algebraic, rep.geometric, rep.block_sizes) == (1, 1, (1,))

    def test_diag_repeated(self):
        A = SquareMatrix([[2, 0, 0], [0, 2, 0], [0, 0, 5]])
        rep = multiplicity(A, 2)
        assert (rep.algebraic, rep.geometric, rep.block_sizes) == (2, 2, (1, 1))

    def test_not_eigenvalue(self):
        with pytest.raises(DomainError):
            multiplicity(SquareMatrix([[1, 0], [0, 2]]), 99)

    def test_darboux_order_is_geometric(self):
        rng = random.Random(3)
        for _ in range(25):
            A, spec = planted_jordan(rng, rng.randint(2, 5))
            for lam, sizes in spec.items():
                assert darboux_minor_vanishing_order(A, lam) == len(sizes)


class TestJordanForm:
    def test_defective_2x2(self):
        A = SquareMatrix([[5, 1], [-1, 3]])
        dec = jordan_form(A)
        assert dec.J == SquareMatrix([[4, 1], [0, 4]])

    def test_diagonal_passthrough(self):
        A = SquareMatrix([[1, 0, 0], [0, 2, 0], [0, 0, 3]])
        dec = jordan_form(A)
        assert dec.J == A

    def test_scalar_multiple_eigenvalue(self):
        dec = jordan_form(SquareMatrix([[2, 0], [0, 2]]))
        assert dec.blocks == ((Fraction(2), (1, 1)),)

    def test_irrational_spectrum_rejected(self):
        with pytest.raises(UnsupportedFlavorError):
            jordan_form(SquareMatrix([[0, 2], [1, 0]]))  # eigenvalues +-sqrt(2)

    def test_reconstruction_random(self):
        rng = random.Random(17)
        for _ in range(60):
            n = rng.randint(2, 5)
            A, _ = planted_jordan(rng, n)
            dec = jordan_form(A)
            lhs = A.matmul(dec.P)
            rhs = dec.P.matmul(dec.J)
            assert lhs == rhs
            assert dec.P.det() != 0

    def test_rank_law(self):
        rng = random.Random(19)
        for _ in range(20):
            n = rng.randint(2, 5)
            A, spec = planted_jordan(rng, n)
            dec = jordan_form(A)
            for lam, sizes in dec.blocks:
                N = A.shift(lam)
                Pk = SquareMatrix.identity(n)
                ranks = [n]
                for _ in range(max(sizes)):
                    Pk = Pk.matmul(N)
                    ranks.append(Pk.rank())
                for k in range(1, max(sizes) + 1):
                    assert ranks[k - 1] - ranks[k] == sum(1 for s in sizes if s >= k)

    def test_numeric_generic(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            M = rng.standard_normal((n, n))
            dec = jordan_form(SquareMatrix(M, flavor="numeric"))
            A_np = np.array(M, dtype=complex)
            P = dec.P.rows
            J = dec.J.rows
            assert np.allclose(A_np @ P, P @ J, atol=1e-8)

    def test_numeric_defective(self):
        A = np.array([[5.0, 1.0], [-1.0, 3.0]])
        # defective eigenvalues split by O(sqrt(eps)) under rounding, so the
        # cluster tolerance must sit above that scale
        dec = jordan_form(SquareMatrix(A, flavor="numeric"), cluster_tol=1e-6)
        (lam, sizes), = dec.blocks
        assert abs(lam - 4.0) < 1e-6
        assert sizes == (2,)
        assert np.allclose(A @ dec.P.rows, dec.P.rows @ dec.J.rows, atol=1e-5)


class TestPoincareNullity:
    def test_rank_deficiency_gives_zero_roots(self):
        # det A = 0 and small minors vanish -> S^p divides the char poly
        rng = random.Random(23)
        for p in (1, 2, 3):
            n = 4
            # rank n-p matrix: sum of n-p rank-1 outer products
            rows = [[Fraction(0)] * n for _ in range(n)]
            for _ in range(n - p):
                u = [rng.randint(-2, 2) for _ in range(n)]
                v = [rng.randint(-2, 2) for _ in range(n)]
                for i in range(n):
                    for j in range(n):
                        rows[i][j] += u[i] * v[j]
            A = SquareMatrix(rows)
            if A.rank() != n - p:
                continue
            cp = char_poly(A).poly
            assert all(c == 0 for c in cp.coeffs[:p])


class TestClassify3:
    def test_distinct(self):
        assert classify_3x3(SquareMatrix([[1, 0, 0], [0, 2, 0], [0, 0, 3]])).tag == "A"

    def test_triple_block(self):
        A = SquareMatrix([[4, 1, 0], [0, 4, 1], [0, 0, 4]])
        assert classify_3x3(A).tag == "D"

    def test_double_diagonalizable(self):
        A = SquareMatrix([[7, 0, 0], [0, 3, 0], [0, 0, 3]])
        res = classify_3x3(A)
        assert res.tag == "C" and not res.scalar

    def test_double_block(self):
        A = SquareMatrix([[3, 1, 0], [0, 3, 0], [0, 0, 7]])
        assert classify_3x3(A).tag == "B"

    def test_triple_two_plus_one(self):
        A = SquareMatrix([[4, 1, 0], [0, 4, 0], [0, 0, 4]])
        assert classify_3x3(A).tag == "E"

    def test_scalar(self):
        res = classify_3x3(SquareMatrix([[5, 0, 0], [0, 5, 0], [0, 0, 5]]))
        assert res.tag == "C" and res.scalar

    def test_similarity_invariance(self):
        rng = random.Random(31)
        for _ in range(30):
            A, _ = planted_jordan(rng, 3)
            tag = classify_3x3(A).tag
            while True:
                M = SquareMatrix(
                    [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
                )
                if M.det() != 0:
                    break
            B = M.matmul(A).matmul(M.inverse())
            assert classify_3x3(B).tag == tag


def random_symmetric_with_planted_spectrum(rng, n):
    """Q^t D Q for a rational invertible Q gives a symmetric matrix, but not
    with the spectrum of D; instead build as sum of rank-1 projectors from an
    orthogonal rational basis (scaled Householder columns)."""
    # Householder: H = I - 2 w w^t / (w^t w) is rational orthogonal
    w = [Fraction(rng.randint(-3, 3)) for _ in range(n)]
    if all(x == 0 for x in w):
        w[0] = Fraction(1)
    wtw = sum(x * x for x in w)
    H = [
        [
            (Fraction(int(i == j)) - 2 * w[i] * w[j] / wtw)
            for j in range(n)
        ]
        for i in range(n)
    ]
    Q = SquareMatrix(H)
    eigs = [Fraction(rng.choice([-1, 0, 2, 2, 3])) for _ in range(n)]
    D = SquareMatrix(
        [[eigs[i] if i == j else 0 for j in range(n)] for i in range(n)]
    )
    return Q.transpose().matmul(D).matmul(Q), eigs


class TestSymmetricDiagonalizability:
    def test_scalar(self):
        rep = symmetric_diagonalizability_check(
            SquareMatrix([[3, 0, 0], [0, 3, 0], [0, 0, 3]])
        )
        assert rep.passed

    def test_2x2(self):
        rep = symmetric_diagonalizability_check(SquareMatrix([[2, 1], [1, 2]]))
        assert rep.passed
        assert {r.eigenvalue for r in rep.per_eigenvalue} == {1, 3}

    def test_planted_repeated(self):
        rng = random.Random(41)
        for _ in range(20):
            A, eigs = random_symmetric_with_planted_spectrum(rng, 4)
            rep = symmetric_diagonalizability_check(A)
            assert rep.passed and rep.annihilated_by_squarefree

    def test_irrational_spectrum(self):
        # symmetric with irrational eigenvalues: annihilation evidence only
        rep = symmetric_diagonalizability_check(SquareMatrix([[1, 1], [1, 2]]))
        assert rep.passed and rep.annihilated_by_squarefree


class TestRationalRoots:
    def test_basic(self):
        assert rational_roots(P.from_roots([1, 1, -2])) == {
            Fraction(1): 2,
            Fraction(-2): 1,
        }

    def test_fractional_root(self):
        p = P([Fraction(-1), Fraction(2)])  # 2x - 1
        assert rational_roots(p) == {Fraction(1, 2): 1}

    def test_zero_roots(self):
        assert rational_roots(P([0, 0, 1])) == {Fraction(0): 2}
