"""Exact univariate polynomials over the rationals, with Sturm machinery.

Coefficients are `fractions.Fraction`, stored lowest degree first.  All
root counting is for DISTINCT real roots: inputs are silently reduced to
their square-free part before a Sturm chain is built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError

Rat = Fraction

#: sentinels for unbounded interval endpoints
NEG_INF = object()
POS_INF = object()


def _to_frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


class RationalPolynomial:
    """Dense univariate polynomial with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [_to_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "RationalPolynomial":
        return cls([])

    @classmethod
    def constant(cls, c) -> "RationalPolynomial":
        return cls([c])

    @classmethod
    def x(cls) -> "RationalPolynomial":
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots: Sequence) -> "RationalPolynomial":
        p = cls([1])
        for r in roots:
            p = p * cls([-_to_frac(r), 1])
        return p

    @classmethod
    def from_json(cls, text: str) -> "RationalPolynomial":
        data = json.loads(text)
        return cls([Fraction(c) for c in data["coeffs"]])

    def to_json(self) -> str:
        return json.dumps(
            {"coeffs": [f"{c.numerator}/{c.denominator}" for c in self.coeffs]}
        )

    # -- basic queries -------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        if self.is_zero:
            raise DomainError("degree of the zero polynomial is undefined")
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            raise DomainError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPolynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return RationalPolynomial([x + y for x, y in zip(a, b)])

    def __neg__(self) -> "RationalPolynomial":
        return RationalPolynomial([-c for c in self.coeffs])

    def __sub__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        return self + (-other)

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        if self.is_zero or other.is_zero:
            return RationalPolynomial.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(out)

    def scale(self, k) -> "RationalPolynomial":
        k = _to_frac(k)
        return RationalPolynomial([k * c for c in self.coeffs])

    def __divmod__(self, other: "RationalPolynomial"):
        if other.is_zero:
            raise DomainError("division by the zero polynomial")
        rem = list(self.coeffs)
        d = other.degree
        lc = other.leading
        quo = [Fraction(0)] * max(len(rem) - d, 0)
        while len(rem) - 1 >= d and any(c != 0 for c in rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < d:
                break
            k = len(rem) - 1 - d
            q = rem[-1] / lc
            quo[k] = q
            for i, b in enumerate(other.coeffs):
                rem[k + i] -= q * b
            rem.pop()
        return RationalPolynomial(quo), RationalPolynomial(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "RationalPolynomial":
        if self.is_zero:
            return self
        return self.scale(1 / self.leading)

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(
            [i * c for i, c in enumerate(self.coeffs)][1:]
        )

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_frac(self, x) -> Fraction:
        return self(_to_frac(x))

    def sign_at(self, x) -> int:
        """Sign of p at a rational point or at NEG_INF / POS_INF."""
        if x is POS_INF:
            if self.is_zero:
                return 0
            return 1 if self.leading > 0 else -1
        if x is NEG_INF:
            if self.is_zero:
                return 0
            s = 1 if self.leading > 0 else -1
            return s if self.degree % 2 == 0 else -s
        v = self.eval_frac(x)
        return (v > 0) - (v < 0)


def poly_gcd(a: RationalPolynomial, b: RationalPolynomial) -> RationalPolynomial:
    """Monic gcd by the Euclidean algorithm."""
    while not b.is_zero:
        a, b = b, a % b
    return a.monic() if not a.is_zero else a


def square_free_part(p: RationalPolynomial) -> RationalPolynomial:
    """p / gcd(p, p'); same distinct roots, all simple."""
    if p.is_zero:
        raise DomainError("square-free part of the zero polynomial")
    if p.degree == 0:
        return p.monic()
    g = poly_gcd(p, p.derivative())
    q, r = divmod(p, g)
    assert r.is_zero
    return q.scale(1 / q.leading) if p.leading != 1 else q


@dataclass(frozen=True)
class SturmChain:
    """Sturm chain of the square-free part of a polynomial."""

    polys: tuple[RationalPolynomial, ...]

    def variations(self, x) -> int:
        """Number of sign variations of the chain at x (rational or ±inf)."""
        signs = [p.sign_at(x) for p in self.polys]
        signs = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


@dataclass(frozen=True)
class RootInterval:
    """Half-open interval (lo, hi] isolating `contains_count` distinct roots."""

    lo: Fraction
    hi: Fraction
    contains_count: int = 1

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("RootInterval requires lo < hi")

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def width(self) -> Fraction:
        return self.hi - self.lo


def sturm_chain(p: RationalPolynomial) -> SturmChain:
    """Sturm chain: square-free part, derivative, then negated remainders."""
    if p.is_zero:
        raise DomainError("Sturm chain of the zero polynomial")
    f = square_free_part(p)
    chain = [f]
    if f.degree >= 1:
        chain.append(f.derivative())
        while not chain[-1].is_zero and chain[-1].degree >= 1:
            r = chain[-2] % chain[-1]
            if r.is_zero:
                break
            chain.append(-r)
    return SturmChain(tuple(chain))


def cauchy_root_bound(p: RationalPolynomial) -> Fraction:
    """1 + max|a_i| / |a_n|: all real roots lie in (-B, B)."""
    if p.is_zero:
        raise DomainError("root bound of the zero polynomial")
    if p.degree == 0:
        return Fraction(1)
    lc = abs(p.leading)
    return 1 + max(abs(c) for c in p.coeffs[:-1]) / lc


def root_separation_lower_bound(p: RationalPolynomial) -> Fraction:
    """Exact positive rational below the minimal gap of distinct real roots.

    Mahler-type bound on the square-free part, after clearing denominators:
    sep > sqrt(3) n^{-(n+2)/2} ||p||_2^{-(n-1)}, weakened to stay rational.
    """
    f = square_free_part(p)
    n = f.degree
    if n <= 1:
        return Fraction(1)
    den = 1
    for c in f.coeffs:
        den = den * c.denominator // _gcd_int(den, c.denominator)
    ints = [c * den for c in f.coeffs]
    h = max(abs(c) for c in ints)
    # sqrt(3)/n^{(n+2)/2} >= n^{-(n+2)};  ||p||_2 <= (n+1) H
    return Fraction(1, n ** (n + 2) * ((n + 1) * int(h)) ** (n - 1))


def _gcd_int(a, b):
    import math

    return math.gcd(int(a), int(b))


def _nudge_endpoint(chain: SturmChain, e: Fraction, p: RationalPolynomial) -> Fraction:
    """Shift an endpoint that is a root of the square-free part.

    Moves by half the exact minimal-gap bound so no other root is crossed;
    the shift direction (+) preserves half-open (lo, hi] semantics.
    """
    delta = root_separation_lower_bound(p) / 2
    return e + delta


def count_real_roots(p: RationalPolynomial, lo=NEG_INF, hi=POS_INF) -> int:
    """Number of distinct real roots of p in (lo, hi] by Sturm's theorem."""
    if p.is_zero:
        raise DomainError("root counting of the zero polynomial")
    if lo is not NEG_INF and hi is not POS_INF:
        lo_f, hi_f = _to_frac(lo), _to_frac(hi)
        if not lo_f < hi_f:
            raise DomainError("degenerate interval: need lo < hi")
    chain = sturm_chain(p)
    f = chain.polys[0]
    a = lo if lo is NEG_INF else _to_frac(lo)
    b = hi if hi is POS_INF else _to_frac(hi)
    if a is not NEG_INF and f.sign_at(a) == 0:
        a = _nudge_endpoint(chain, a, p)
    if b is not POS_INF and f.sign_at(b) == 0:
        b = _nudge_endpoint(chain, b, p)
    return chain.variations(a) - chain.variations(b)


def _sign_variations_seq(values) -> int:
    signs = [(v > 0) - (v < 0) for v in values]
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


def variation_bounds(p: RationalPolynomial):
    """Descartes bound on positive roots, and a Budan-Fourier interval bound.

    Both returned bounds are upper bounds for the count with multiplicity,
    congruent to it mod 2.
    """
    if p.is_zero:
        raise DomainError("variation bounds of the zero polynomial")
    descartes = _sign_variations_seq(p.coeffs)

    derivs = [p]
    while not derivs[-1].is_zero and derivs[-1].degree > 0:
        derivs.append(derivs[-1].derivative())

    def budan_fourier(lo, hi) -> int:
        lo_f, hi_f = _to_frac(lo), _to_frac(hi)
        if not lo_f < hi_f:
            raise DomainError("degenerate interval")
        va = _sign_variations_seq([d.eval_frac(lo_f) for d in derivs])
        vb = _sign_variations_seq([d.eval_frac(hi_f) for d in derivs])
        return va - vb

    return descartes, budan_fourier


def isolate_real_roots(p: RationalPolynomial) -> list[RootInterval]:
    """Disjoint intervals, each isolating one distinct real root, ordered by lo."""
    if p.is_zero:
        raise DomainError("root isolation of the zero polynomial")
    if p.degree == 0:
        return []
    chain = sturm_chain(p)
    f = chain.polys[0]
    bound = cauchy_root_bound(f)
    lo, hi = -bound, bound
    # Cauchy bound is strict, but guard the endpoints anyway.
    while f.sign_at(lo) == 0:
        lo -= 1
    while f.sign_at(hi) == 0:
        hi += 1

    out: list[RootInterval] = []
    stack = [(lo, hi, chain.variations(lo) - chain.variations(hi))]
    while stack:
        a, b, cnt = stack.pop()
        if cnt == 0:
            continue
        if cnt == 1:
            out.append(RootInterval(a, b, 1))
            continue
        m = (a + b) / 2
        if f.sign_at(m) == 0:
            m = _nudge_endpoint(chain, m, f)
        vm = chain.variations(m)
        left = chain.variations(a) - vm
        stack.append((m, b, cnt - left))
        stack.append((a, m, left))
    out.sort(key=lambda iv: iv.lo)
    return out


def refine_root(p: RationalPolynomial, iv: RootInterval, tol) -> Fraction:
    """Refine an isolated simple root to within tol (bisection + guarded Newton)."""
    tol = _to_frac(tol)
    if tol <= 0:
        raise DomainError("tol must be positive")
    f = square_free_part(p)
    fp = f.derivative()
    a, b = _to_frac(iv.lo), _to_frac(iv.hi)
    if count_real_roots(f, a, b) != 1:
        raise DomainError("interval does not isolate exactly one root")
    if f.sign_at(a) == 0:
        a = a - root_separation_lower_bound(f) / 2
    sa = f.sign_at(a)
    if f.sign_at(b) == 0:
        return b
    dmax = max(abs(fp.eval_frac(a)), abs(fp.eval_frac(b)), Fraction(1))
    floor_deriv = dmax / Fraction(2 ** 40)

    def absorb(x: Fraction) -> bool:
        """Shrink the bracket using the sign of f at an interior point."""
        nonlocal a, b
        s = f.sign_at(x)
        if s == 0:
            a = x - tol / 2
            b = x + tol / 2
            return True
        if s == sa:
            a = x
        else:
            b = x
        return False

    while b - a > tol:
        # bisection first: the bracket provably halves every pass
        if absorb((a + b) / 2):
            break
        # Newton acceleration from a float image of the midpoint; the
        # candidate is only trusted for its sign, so float error is safe
        xm = float((a + b) / 2)
        dfm = float(fp.eval_frac(Fraction(xm))) if a < Fraction(xm) < b else 0.0
        if abs(dfm) > float(floor_deriv):
            xn_f = xm - float(f.eval_frac(Fraction(xm))) / dfm
            xn = Fraction(xn_f)
            if a < xn < b and absorb(xn):
                break
    return (a + b) / 2
