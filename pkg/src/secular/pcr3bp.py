"""Planar circular restricted three-body problem in the rotating frame.

Nondimensional units throughout: primary separation 1, angular rate 1,
total mass 1.  The primaries sit at (-mu, 0) and (1 - mu, 0).  The
collinear libration points are located exactly: the axis equilibrium
condition becomes a quintic with rational coefficients on each axis
segment, isolated with a Sturm chain and refined to 1e-12.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DomainError,
    InternalInconsistencyError,
    NonConvergenceError,
    SingularityError,
)
from .floquet import integrate
from .ratpoly import RationalPolynomial, isolate_real_roots, refine_root

COLLISION_RADIUS = 1e-6


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not 0.0 < mu <= 0.5:
        raise DomainError(f"mass ratio must lie in (0, 1/2], got {mu}")
    return mu


def _radii(x, y, mu):
    r1 = math.hypot(x + mu, y)
    r2 = math.hypot(x - 1.0 + mu, y)
    if r1 < COLLISION_RADIUS or r2 < COLLISION_RADIUS:
        raise SingularityError(
            f"state within collision radius of a primary (r1={r1:.3g}, r2={r2:.3g})"
        )
    return r1, r2


def effective_potential(x, y, mu):
    """Omega = (x^2 + y^2)/2 + (1 - mu)/r1 + mu/r2."""
    r1, r2 = _radii(x, y, mu)
    return 0.5 * (x * x + y * y) + (1.0 - mu) / r1 + mu / r2


def _omega_gradient(x, y, mu):
    r1, r2 = _radii(x, y, mu)
    c1 = (1.0 - mu) / r1 ** 3
    c2 = mu / r2 ** 3
    ox = x - c1 * (x + mu) - c2 * (x - 1.0 + mu)
    oy = y - c1 * y - c2 * y
    return ox, oy


def _omega_hessian(x, y, mu):
    r1, r2 = _radii(x, y, mu)
    c1, c2 = (1.0 - mu) / r1 ** 3, mu / r2 ** 3
    d1, d2 = 3.0 * (1.0 - mu) / r1 ** 5, 3.0 * mu / r2 ** 5
    oxx = 1.0 - c1 - c2 + d1 * (x + mu) ** 2 + d2 * (x - 1.0 + mu) ** 2
    oyy = 1.0 - c1 - c2 + d1 * y * y + d2 * y * y
    oxy = d1 * (x + mu) * y + d2 * (x - 1.0 + mu) * y
    return oxx, oxy, oyy


def eom(state, mu):
    """Rotating-frame equations of motion (x, y, vx, vy) -> derivative."""
    mu = _check_mu(mu)
    x, y, vx, vy = state
    ox, oy = _omega_gradient(x, y, mu)
    return np.array([vx, vy, 2.0 * vy + ox, -2.0 * vx + oy])


def jacobi_constant(state, mu):
    """C = 2 Omega(x, y) - (vx^2 + vy^2), the rotating-frame integral."""
    mu = _check_mu(mu)
    x, y, vx, vy = state
    return 2.0 * effective_potential(x, y, mu) - (vx * vx + vy * vy)


@dataclass(frozen=True)
class LibrationPoint:
    label: str  # L1..L5
    position: tuple[float, float]


def _collinear_quintic(mu: Fraction, segment: str) -> RationalPolynomial:
    """Axis equilibrium Omega_x = 0 cleared of denominators on one segment.

    With a = x + mu and b = x - 1 + mu the condition is
    x - (1 - mu) a / |a|^3 - mu b / |b|^3 = 0; fixing the signs of a and b
    on the segment and multiplying by a^2 b^2 yields a quintic.
    """
    X = RationalPolynomial((Fraction(0), Fraction(1)))
    a = X + RationalPolynomial((mu,))
    b = X + RationalPolynomial((mu - 1,))
    lead = X * a * a * b * b
    t1 = (b * b).scale(1 - mu)
    t2 = (a * a).scale(mu)
    if segment == "L1":  # -mu < x < 1 - mu: a > 0, b < 0
        return lead - t1 + t2
    if segment == "L2":  # x > 1 - mu: a > 0, b > 0
        return lead - t1 - t2
    if segment == "L3":  # x < -mu: a < 0, b < 0
        return lead + t1 + t2
    raise DomainError(f"unknown collinear segment {segment!r}")


def _collinear_root(mu: Fraction, segment: str) -> float:
    lo, hi = {
        "L1": (-mu, 1 - mu),
        "L2": (1 - mu, Fraction(3)),
        "L3": (Fraction(-3), -mu),
    }[segment]
    p = _collinear_quintic(mu, segment)
    hits = []
    for iv in isolate_real_roots(p):
        r = refine_root(p, iv, Fraction(1, 10 ** 13))
        if lo < r < hi:
            hits.append(r)
    if len(hits) != 1:
        raise InternalInconsistencyError(
            f"expected one collinear equilibrium on segment {segment}, "
            f"found {len(hits)}"
        )
    return float(hits[0])


def libration_points(mu: float) -> list[LibrationPoint]:
    """All five equilibria, ordered L1..L5."""
    mu = _check_mu(mu)
    mu_f = Fraction(mu)
    pts = [LibrationPoint(lab, (_collinear_root(mu_f, lab), 0.0))
           for lab in ("L1", "L2", "L3")]
    half = math.sqrt(3.0) / 2.0
    pts.append(LibrationPoint("L4", (0.5 - mu, half)))
    pts.append(LibrationPoint("L5", (0.5 - mu, -half)))
    return pts


STABLE = "linearly_stable"
SADDLE_CENTER = "saddle_center"
COMPLEX_UNSTABLE = "complex_unstable"


@dataclass(frozen=True)
class LibrationStability:
    point: LibrationPoint
    # equation in S of the linearization: s^4 + p s^2 + q = 0
    quartic_coeffs: tuple[float, float]
    roots: tuple[complex, ...]
    verdict: str

    @property
    def stable(self) -> bool:
        return self.verdict == STABLE

    @property
    def center_frequency(self) -> float:
        """Largest oscillation frequency among purely imaginary roots."""
        freqs = [s.imag for s in self.roots
                 if abs(s.real) < 1e-9 and s.imag > 1e-9]
        if not freqs:
            raise DomainError("linearization has no center direction")
        return max(freqs)


def libration_stability(mu: float, point: LibrationPoint) -> LibrationStability:
    """Equation in S at an equilibrium and its stability verdict.

    The linearization x' = A x has the even quartic characteristic
    polynomial s^4 + (4 - Oxx - Oyy) s^2 + (Oxx Oyy - Oxy^2).  The point
    is linearly stable iff both roots in s^2 are real, negative, and
    distinct (four distinct purely imaginary exponents).
    """
    mu = _check_mu(mu)
    x, y = point.position
    oxx, oxy, oyy = _omega_hessian(x, y, mu)
    p = 4.0 - oxx - oyy
    q = oxx * oyy - oxy * oxy
    disc = p * p - 4.0 * q
    sigma = np.roots([1.0, p, q])  # roots in s^2
    roots = []
    for s2 in sigma:
        r = cmath.sqrt(complex(s2))
        roots.extend([r, -r])
    roots = tuple(sorted(roots, key=lambda z: (z.real, z.imag)))
    if disc > 0.0 and all(abs(s2.imag) < 1e-12 and s2.real < 0.0 for s2 in sigma):
        verdict = STABLE
    elif any(abs(s.imag) < 1e-9 and s.real > 1e-9 for s in roots):
        verdict = SADDLE_CENTER
    else:
        verdict = COMPLEX_UNSTABLE
    return LibrationStability(point, (p, q), roots, verdict)


def _variational_matrix(x, y, mu) -> np.ndarray:
    oxx, oxy, oyy = _omega_hessian(x, y, mu)
    return np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [oxx, oxy, 0.0, 2.0],
        [oxy, oyy, -2.0, 0.0],
    ])


def _flow_rhs(mu):
    def rhs(t, z):
        x, y, vx, vy = z
        ox, oy = _omega_gradient(x, y, mu)
        return np.array([vx, vy, 2.0 * vy + ox, -2.0 * vx + oy])
    return rhs


def _var_rhs(mu):
    """x' = f(x) jointly with STM' = A(x) STM, packed as 20 floats."""
    def rhs(t, z):
        x, y, vx, vy = z[:4]
        ox, oy = _omega_gradient(x, y, mu)
        A = _variational_matrix(x, y, mu)
        dPhi = A @ z[4:].reshape(4, 4)
        return np.concatenate(
            ([vx, vy, 2.0 * vy + ox, -2.0 * vx + oy], dPhi.ravel())
        )
    return rhs


def variational_flow(state0, mu, T, tol=1e-12):
    """Integrate state and state-transition matrix over [0, T]."""
    mu = _check_mu(mu)
    if T == 0.0:
        return np.asarray(state0, dtype=float), np.eye(4)
    z0 = np.concatenate((np.asarray(state0, dtype=float), np.eye(4).ravel()))
    traj = integrate(_var_rhs(mu), z0, (0.0, T), tol)
    zf = traj.final
    return zf[:4], zf[4:].reshape(4, 4)


@dataclass(frozen=True)
class OrbitRecord:
    initial_state: np.ndarray
    period: float
    sample_times: np.ndarray
    samples: np.ndarray  # shape (4, n_samples)
    monodromy: np.ndarray
    multipliers: tuple[complex, ...]
    exponents: tuple[complex, ...]
    jacobi: float
    crossing_residual: float


def lyapunov_seed(mu: float, point: LibrationPoint, amplitude: float):
    """Linearized planar oscillation seed (state, half-period guess).

    At a collinear point the center mode with frequency w gives
    xi = -A cos(wt), eta = k A sin(wt) with k = (w^2 + Oxx)/(2w); the
    perpendicular x-axis crossing at t = 0 is the corrector's ansatz.
    """
    mu = _check_mu(mu)
    stab = libration_stability(mu, point)
    w = stab.center_frequency
    oxx, _, _ = _omega_hessian(point.position[0], point.position[1], mu)
    k = (w * w + oxx) / (2.0 * w)
    x0 = point.position[0] - amplitude
    vy0 = k * amplitude * w
    state = np.array([x0, 0.0, 0.0, vy0])
    return state, math.pi / w


def correct_periodic(state0, half_period, mu, tol=1e-11, max_iter=25,
                     integrator_tol=1e-12, n_samples=256) -> OrbitRecord:
    """Differential correction of a symmetric periodic orbit.

    The guess (x0, 0, 0, vy0) crosses the x-axis perpendicularly; Newton
    on vy0 drives vx to zero at the next perpendicular crossing, using
    the state-transition matrix (mirror-theorem single shooting).
    """
    mu = _check_mu(mu)
    state = np.asarray(state0, dtype=float).copy()
    if abs(state[1]) > 1e-14 or abs(state[2]) > 1e-14:
        raise DomainError("corrector requires a perpendicular x-axis start "
                          "(x0, 0, 0, vy0)")
    rhs = _var_rhs(mu)
    sign0 = 1.0 if state[3] >= 0 else -1.0

    def crossing(t, z):
        return z[1]
    crossing.terminal = True
    crossing.direction = -sign0

    best = state.copy()
    best_resid = math.inf
    t_half = half_period
    for _ in range(max_iter):
        z0 = np.concatenate((state, np.eye(4).ravel()))
        traj = integrate(rhs, z0, (0.0, 4.0 * half_period), integrator_tol,
                         events=crossing)
        if traj.t_events is None or len(traj.t_events[0]) == 0:
            raise NonConvergenceError(
                "no x-axis return crossing found within the time budget",
                best=best,
            )
        t_half = float(traj.t_events[0][0])
        zc = traj.y_events[0][0]
        xc, vx, vy = zc[0], zc[2], zc[3]
        if abs(vx) < best_resid:
            best_resid, best = abs(vx), state.copy()
        if abs(vx) <= tol:
            return _finish_orbit(state, 2.0 * t_half, mu, abs(vx),
                                 integrator_tol, n_samples)
        Phi = zc[4:].reshape(4, 4)
        ax = float(eom(zc[:4], mu)[2])
        if abs(vy) < 1e-12:
            raise DomainError("degenerate correction: tangential crossing")
        denom = Phi[2, 3] - ax * Phi[1, 3] / vy
        if abs(denom) < 1e-12:
            raise DomainError(
                "degenerate correction Jacobian: orbit family bifurcation"
            )
        state[3] -= vx / denom
    raise NonConvergenceError(
        f"differential correction did not reach {tol} in {max_iter} steps "
        f"(best residual {best_resid:.3g})",
        best=best,
    )


def _finish_orbit(state, T, mu, resid, integrator_tol, n_samples) -> OrbitRecord:
    z0 = np.concatenate((state, np.eye(4).ravel()))
    traj = integrate(_var_rhs(mu), z0, (0.0, T), integrator_tol)
    ts = np.linspace(0.0, T, n_samples)
    samples = np.array([traj(t)[:4] for t in ts]).T
    M = traj.final[4:].reshape(4, 4)
    mults = tuple(sorted((complex(s) for s in np.linalg.eigvals(M)),
                         key=lambda z: (abs(z), z.real, z.imag)))
    # 1/Lambda can underflow to zero for violently unstable orbits
    exps = tuple(cmath.log(s) / T if abs(s) > 1e-300
                 else complex(-math.inf, 0.0) for s in mults)
    return OrbitRecord(
        state.copy(), T, ts, samples, M, mults, exps,
        jacobi_constant(state, mu), resid,
    )


@dataclass(frozen=True)
class ExponentReport:
    multipliers: tuple[complex, ...]
    exponents: tuple[complex, ...]
    unit_pair_ok: bool
    reciprocal_ok: bool
    det_ok: bool
    flags: tuple[str, ...]


def orbit_exponents(orbit: OrbitRecord, unit_tol=1e-5) -> ExponentReport:
    """Multiplier structure report for a periodic orbit.

    Checks the classical invariants: a double unit multiplier (the
    autonomous flow plus the energy integral), the remaining pair
    reciprocal (Lambda, 1/Lambda), and det M = 1.  Failures are flagged,
    not fatal, since near-bifurcation orbits cluster all four near 1.
    """
    mults = orbit.multipliers
    lam_max = max(abs(s) for s in mults)
    tol = unit_tol * max(1.0, lam_max)
    flags = []
    near_unit = [s for s in mults if abs(s - 1.0) <= tol]
    unit_pair_ok = len(near_unit) >= 2
    if not unit_pair_ok:
        flags.append("missing double unit multiplier")
    others = sorted(mults, key=lambda s: abs(s - 1.0))[2:]
    reciprocal_ok = (
        len(others) == 2 and abs(others[0] * others[1] - 1.0) <= tol
    )
    if not reciprocal_ok:
        flags.append("nontrivial pair not reciprocal")
    det = float(np.real(np.prod(mults)))
    det_ok = abs(det - 1.0) <= 1e-6 * max(1.0, lam_max ** 2)
    if not det_ok:
        flags.append(f"det M = {det} differs from 1")
    return ExponentReport(
        mults, orbit.exponents, unit_pair_ok, reciprocal_ok, det_ok,
        tuple(flags),
    )
