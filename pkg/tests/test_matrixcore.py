import random
from fractions import Fraction

import numpy as np
import pytest

from secular.errors import DomainError, UnsupportedFlavorError
from secular.matrixcore import (
    Inertia,
    QuadraticForm,
    SquareMatrix,
    char_poly,
    hermite_root_count,
    inertia,
    interlacing_check,
    lagrange_eigenvector,
    minor_sequence,
    power_iteration,
    reduce_to_squares,
)
from secular.ratpoly import RationalPolynomial as P, count_real_roots, square_free_part

# worked 3x3 example used throughout: eigenvalues {0, 1, 3}
A_WORKED = SquareMatrix([[1, -1, 0], [-1, 2, 1], [0, 1, 1]])


def random_exact(rng, n, lo=-5, hi=5):
    return SquareMatrix(
        [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]
    )


def random_symmetric(rng, n, lo=-5, hi=5):
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            rows[i][j] = rows[j][i] = rng.randint(lo, hi)
    return SquareMatrix(rows)


def random_invertible(rng, n):
    while True:
        M = random_exact(rng, n, -3, 3)
        if M.det() != 0:
            return M


class TestCharPoly:
    def test_worked_example(self):
        cp = char_poly(A_WORKED).poly
        assert cp == P.from_roots([0, 1, 3])

    def test_identity(self):
        cp = char_poly(SquareMatrix.identity(2)).poly
        assert cp == P.from_roots([1, 1])

    def test_diagonal(self):
        A = SquareMatrix([[2, 0, 0], [0, 5, 0], [0, 0, 7]])
        assert char_poly(A).poly == P.from_roots([2, 5, 7])

    def test_similarity_invariance(self):
        rng = random.Random(11)
        for _ in range(40):
            n = rng.randint(2, 5)
            A = random_exact(rng, n)
            M = random_invertible(rng, n)
            B = M.inverse().matmul(A).matmul(M)
            assert char_poly(B).poly == char_poly(A).poly

    def test_numeric_flavor(self):
        A = SquareMatrix([[2.0, 0.0], [0.0, 3.0]], flavor="numeric")
        cp = char_poly(A).poly
        assert abs(float(cp.coeffs[0]) - 6.0) < 1e-9


class TestMinorSequence:
    def test_worked_example_delta1(self):
        ms = minor_sequence(A_WORKED)
        # (2-S)(1-S) - 1 from deleting the first row and column
        assert ms.deltas[1] == P([1, -3, 1])
        assert ms.deltas[3] == P([1])

    def test_1x1(self):
        ms = minor_sequence(SquareMatrix([[7]]))
        assert ms.deltas[0] == P([7, -1])
        assert ms.deltas[1] == P([1])

    def test_diag(self):
        ms = minor_sequence(SquareMatrix([[1, 0], [0, 2]]))
        assert ms.deltas[0] == P([2, -3, 1])  # (1-S)(2-S)
        assert ms.deltas[1] == P([2, -1])  # 2-S

    def test_numeric_unsupported(self):
        A = SquareMatrix([[1.0]], flavor="numeric")
        with pytest.raises(UnsupportedFlavorError):
            minor_sequence(A)


class TestLagrangeEigenvector:
    def test_worked_example_lambda_1(self):
        v = lagrange_eigenvector(A_WORKED, 1)
        # null space of A - I is spanned by (1, 0, 1)
        assert v[1] == 0 and v[0] == v[2] and v[0] != 0

    def test_diag(self):
        v = lagrange_eigenvector(SquareMatrix([[2, 0], [0, 5]]), 2)
        assert v[1] == 0 and v[0] != 0

    def test_swap(self):
        v = lagrange_eigenvector(SquareMatrix([[0, 1], [1, 0]]), 1)
        assert v[0] == v[1] != 0

    def test_not_eigenvalue(self):
        with pytest.raises(DomainError):
            lagrange_eigenvector(A_WORKED, 7)

    def test_orthogonality_simple_spectrum(self):
        vs = [lagrange_eigenvector(A_WORKED, lam) for lam in (0, 1, 3)]
        for i in range(3):
            for j in range(i + 1, 3):
                dot = sum(a * b for a, b in zip(vs[i], vs[j]))
                assert dot == 0


class TestQuadraticForms:
    def paper_form(self):
        # x1^2 - 2 x1 x2 + 2 x2^2 + 2 x2 x3 + x3^2: the form whose Gram
        # matrix is the worked 3x3 example (eigenvalues 0, 1, 3)
        return QuadraticForm(A_WORKED)

    def test_paper_form_inertia(self):
        assert inertia(self.paper_form()) == Inertia(2, 0, 1)

    def test_reduction_is_congruence(self):
        q = self.paper_form()
        coeffs, T = reduce_to_squares(q)
        D = T.transpose().matmul(q.gram).matmul(T)
        for i in range(3):
            for j in range(3):
                expect = coeffs[i] if i == j else 0
                assert D.rows[i][j] == expect
        assert T.det() != 0

    def test_zero_form(self):
        coeffs, _ = reduce_to_squares(QuadraticForm(SquareMatrix([[0, 0], [0, 0]])))
        assert coeffs == [0, 0]

    def test_hyperbolic(self):
        q = QuadraticForm(SquareMatrix([[0, Fraction(1, 2)], [Fraction(1, 2), 0]]))
        assert inertia(q) == Inertia(1, 1, 0)

    def test_negative_identity(self):
        q = QuadraticForm(SquareMatrix([[-1, 0, 0], [0, -1, 0], [0, 0, -1]]))
        assert inertia(q) == Inertia(0, 3, 0)

    def test_diag_case(self):
        q = QuadraticForm(
            SquareMatrix([[-2, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 5]])
        )
        assert inertia(q) == Inertia(1, 1, 2)

    def test_congruence_invariance(self):
        rng = random.Random(42)
        for _ in range(60):
            n = rng.randint(2, 4)
            G = random_symmetric(rng, n)
            q = QuadraticForm(G)
            T = random_invertible(rng, n)
            q2 = QuadraticForm(T.transpose().matmul(G).matmul(T))
            assert inertia(q) == inertia(q2)


class TestHermite:
    def test_x2_plus_1(self):
        assert hermite_root_count(P([1, 0, 1])) == (2, 0)

    def test_multiple_root(self):
        assert hermite_root_count(P.from_roots([1, 1, -2])) == (2, 2)

    def test_linear(self):
        assert hermite_root_count(P([-5, 1])) == (1, 1)

    def test_random_agreement(self):
        rng = random.Random(123)
        for _ in range(80):
            deg = rng.randint(1, 7)
            p = P([1])
            for _ in range(deg):
                if rng.random() < 0.3 and deg >= 2:
                    p = p * P([rng.randint(1, 5), rng.randint(-2, 2), 1])
                else:
                    p = p * P([Fraction(rng.randint(-6, 6)), 1])
            distinct, real = hermite_root_count(p)
            sf = square_free_part(p)
            assert distinct == sf.degree
            assert real == count_real_roots(p)


class TestInterlacing:
    def test_worked_example(self):
        rep = interlacing_check(A_WORKED)
        assert rep.passed
        assert len(rep.outer_intervals) == 3
        assert len(rep.inner_intervals) == 2

    def test_diag_shared_roots(self):
        rep = interlacing_check(SquareMatrix([[1, 0, 0], [0, 2, 0], [0, 0, 3]]))
        assert rep.passed

    def test_2x2_swap(self):
        rep = interlacing_check(SquareMatrix([[0, 1], [1, 0]]))
        assert rep.passed

    def test_random_symmetric(self):
        rng = random.Random(5)
        for _ in range(30):
            n = rng.randint(2, 5)
            assert interlacing_check(random_symmetric(rng, n)).passed

    def test_symmetric_reality(self):
        # Laplace reality: all roots of the secular equation are real
        rng = random.Random(6)
        for _ in range(30):
            n = rng.randint(2, 5)
            A = random_symmetric(rng, n)
            cp = char_poly(A).poly
            assert count_real_roots(cp) == square_free_part(cp).degree


class TestPowerIteration:
    def test_worked_example(self):
        res = power_iteration(SquareMatrix([[1, -1, 0], [-1, 2, 1], [0, 1, 1]]))
        assert abs(res.eigenvalue - 3.0) < 1e-8

    def test_identity_immediate(self):
        res = power_iteration(SquareMatrix.identity(2))
        assert res.converged and abs(res.eigenvalue - 1.0) < 1e-12

    def test_diag(self):
        res = power_iteration(SquareMatrix([[5, 0], [0, 1]]))
        assert abs(res.eigenvalue - 5.0) < 1e-8
        assert abs(abs(res.eigenvector[0]) - 1.0) < 1e-6
