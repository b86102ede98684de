"""Poincare surface-of-section machinery for the restricted three-body flow.

The section is the plane y = 0 with a required sign of vy at each
crossing; the Jacobi constant C is held fixed, so a section point is the
pair (x, vx) and vy is reconstructed from C.  The induced return map
preserves area in (x, vx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergenceError, SingularityError
from .floquet import integrate
from .pcr3bp import (
    _flow_rhs,
    _omega_gradient,
    _var_rhs,
    effective_potential,
    eom,
    jacobi_constant,
)

CROSSING_Y_TOL = 1e-12


@dataclass(frozen=True)
class SectionDef:
    """y = 0 section with a fixed vy sign and Jacobi constant."""

    direction: int  # +1 or -1: required sign of vy at a crossing
    C: float

    def __post_init__(self):
        if self.direction not in (+1, -1):
            raise DomainError("direction must be +1 or -1")


@dataclass(frozen=True)
class SectionPoint:
    x: float
    vx: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.vx])


def lift(p: SectionPoint, mu: float, sd: SectionDef) -> np.ndarray:
    """Full rotating-frame state on the section: vy from C with sd's sign."""
    vy2 = 2.0 * effective_potential(p.x, 0.0, mu) - p.vx ** 2 - sd.C
    if vy2 < 0.0:
        raise DomainError(
            f"section point ({p.x}, {p.vx}) outside the energetically "
            f"allowed region at C={sd.C}"
        )
    return np.array([p.x, 0.0, p.vx, sd.direction * math.sqrt(vy2)])


def _polish_crossing(dense, t0: float, direction: int) -> tuple[float, np.ndarray]:
    """Refine a crossing time on the dense output: bisection then Newton."""
    # bracket around the event time with the correct sign change
    h = 1e-9
    a, b = t0 - h, t0 + h
    while np.sign(dense(a)[1]) == np.sign(dense(b)[1]) and h < 1e-2:
        h *= 4.0
        a, b = t0 - h, t0 + h
    ya, yb = dense(a)[1], dense(b)[1]
    if np.sign(ya) != np.sign(yb):
        for _ in range(60):
            m = 0.5 * (a + b)
            ym = dense(m)[1]
            if abs(ym) <= 1e-9:
                t0 = m
                break
            if np.sign(ym) == np.sign(ya):
                a, ya = m, ym
            else:
                b, yb = m, ym
        else:
            t0 = 0.5 * (a + b)
    for _ in range(4):  # Newton polish on y(t) with ydot = vy
        z = dense(t0)
        if abs(z[1]) <= CROSSING_Y_TOL:
            break
        t0 -= z[1] / z[3]
    z = dense(t0)
    if abs(z[1]) > CROSSING_Y_TOL:
        raise NonConvergenceError("crossing refinement stalled", best=t0)
    return t0, z


def _next_crossing(state: np.ndarray, mu: float, sd: SectionDef,
                   forward: bool = True, tol: float = 1e-12,
                   max_time: float = 100.0) -> np.ndarray:
    """Flow from state to the next section crossing (forward or backward)."""
    # event direction is the sign of dy/dtau along the integration parameter
    ev_dir = sd.direction if forward else -sd.direction

    def crossing(t, z):
        return z[1]
    # a start already on the section registers an event at t = 0: allow a
    # second occurrence before terminating, then discard the spurious one
    on_section = abs(state[1]) <= 10.0 * CROSSING_Y_TOL
    crossing.terminal = 2 if on_section else 1
    crossing.direction = ev_dir

    t_end = max_time if forward else -max_time
    traj = integrate(_flow_rhs(mu), state, (0.0, t_end), tol, events=crossing)
    hits = [t for t in traj.t_events[0]] if traj.t_events else []
    hits = [t for t in hits if abs(t) > 1e-9]
    if not hits:
        raise NonConvergenceError(
            "no section crossing within the time budget", best=traj.final
        )
    t0, z = _polish_crossing(traj.dense, float(hits[0]), ev_dir)
    return z


def section_crossings(start: SectionPoint, mu: float, sd: SectionDef,
                      n: int, tol: float = 1e-12) -> list[SectionPoint]:
    """First n successive crossings starting from a section point.

    Each crossing is re-lifted through the energy constraint before the
    next flight, so composing return_map n times reproduces this list
    exactly.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    out = []
    p = start
    for _ in range(n):
        z = _next_crossing(lift(p, mu, sd), mu, sd, tol=tol)
        p = SectionPoint(float(z[0]), float(z[2]))
        out.append(p)
    return out


def return_map(p: SectionPoint, mu: float, sd: SectionDef,
               tol: float = 1e-12) -> SectionPoint:
    """One application of the section return map."""
    return section_crossings(p, mu, sd, 1, tol)[0]


def _inverse_map(p: SectionPoint, mu: float, sd: SectionDef,
                 tol: float = 1e-12) -> SectionPoint:
    """Previous crossing, via reversed-time integration."""
    z = _next_crossing(lift(p, mu, sd), mu, sd, forward=False, tol=tol)
    return SectionPoint(float(z[0]), float(z[2]))


ELLIPTIC = "elliptic"
HYPERBOLIC = "hyperbolic"
PARABOLIC = "parabolic"


@dataclass(frozen=True)
class MapLinearization:
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    tag: str

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.jacobian))


def _stm_jacobian(p: SectionPoint, mu: float, sd: SectionDef,
                  tol: float) -> np.ndarray:
    """Return-map Jacobian from the state-transition matrix.

    Lift tangent vectors of the section through the energy constraint
    (delta vy = (Omega_x dx - vx dvx) / vy at y = 0), propagate with the
    STM over one return, and project back along the flow (crossing-time
    correction dt = -dy / vy).
    """
    z0 = lift(p, mu, sd)
    ev_dir = sd.direction

    def crossing(t, z):
        return z[1]
    crossing.terminal = 2 if abs(z0[1]) <= 10.0 * CROSSING_Y_TOL else 1
    crossing.direction = ev_dir

    zfull = np.concatenate((z0, np.eye(4).ravel()))
    traj = integrate(_var_rhs(mu), zfull, (0.0, 100.0), tol, events=crossing)
    hits = [t for t in (traj.t_events[0] if traj.t_events else []) if t > 1e-9]
    if not hits:
        raise NonConvergenceError(
            "no section crossing within the time budget", best=traj.final
        )
    tc = float(hits[0])
    for _ in range(6):  # Newton on y(t) along the dense output
        z = traj(tc)
        if abs(z[1]) <= CROSSING_Y_TOL:
            break
        tc -= z[1] / z[3]
    zc = traj(tc)
    M = zc[4:].reshape(4, 4)

    ox0, _ = _omega_gradient(z0[0], 0.0, mu)
    L = np.array([  # tangent lift: columns (dx, dvx) -> (dx, dy, dvx, dvy)
        [1.0, 0.0],
        [0.0, 0.0],
        [0.0, 1.0],
        [(ox0 - 0.0) / z0[3], -z0[2] / z0[3]],
    ])
    V = M @ L
    fc = eom(zc[:4], mu)
    proj = np.array([  # crossing-time correction rows for (x, vx)
        [1.0, -fc[0] / zc[3], 0.0, 0.0],
        [0.0, -fc[2] / zc[3], 1.0, 0.0],
    ])
    return proj @ V


def linearize_map(p: SectionPoint, mu: float, sd: SectionDef,
                  step: float = 1e-6, tol: float = 1e-12,
                  method: str = "fd") -> MapLinearization:
    """2x2 Jacobian of the return map.

    method "fd" uses Richardson-refined central finite differences (step
    halved once); method "stm" lifts section tangents through the energy
    constraint and reduces the state-transition matrix, which stays
    accurate for strongly hyperbolic points where FD loses digits.
    Classification by the trace of the (unit-determinant) Jacobian:
    |tr| < 2 elliptic, |tr| > 2 hyperbolic, |tr| = 2 within 1e-6 parabolic.
    """
    if method == "stm":
        J = _stm_jacobian(p, mu, sd, tol)
    elif method == "fd":
        def diff(h: float) -> np.ndarray:
            J = np.empty((2, 2))
            for j, e in enumerate((np.array([1.0, 0.0]),
                                   np.array([0.0, 1.0]))):
                qp = return_map(SectionPoint(*(p.as_array() + h * e)),
                                mu, sd, tol)
                qm = return_map(SectionPoint(*(p.as_array() - h * e)),
                                mu, sd, tol)
                J[:, j] = (qp.as_array() - qm.as_array()) / (2.0 * h)
            return J

        J = (4.0 * diff(step / 2.0) - diff(step)) / 3.0
    else:
        raise DomainError(f"unknown linearization method {method!r}")
    eigs = np.linalg.eigvals(J)
    tr = float(np.trace(J))
    if abs(abs(tr) - 2.0) <= 1e-6:
        tag = PARABOLIC
    elif abs(tr) < 2.0:
        tag = ELLIPTIC
    else:
        tag = HYPERBOLIC
    return MapLinearization(J, (complex(eigs[0]), complex(eigs[1])), tag)


def fixed_point(guess: SectionPoint, mu: float, sd: SectionDef,
                tol: float = 1e-10, max_iter: int = 20) -> SectionPoint:
    """Newton on return_map(p) - p, Jacobian from linearize_map."""
    p = guess
    best, best_resid = p, math.inf
    for _ in range(max_iter):
        fp = return_map(p, mu, sd)
        r = fp.as_array() - p.as_array()
        resid = float(np.max(np.abs(r)))
        if resid < best_resid:
            best, best_resid = p, resid
        if resid <= tol:
            return p
        J = linearize_map(p, mu, sd, method="stm").jacobian
        A = J - np.eye(2)
        if abs(np.linalg.det(A)) < 1e-12:
            raise DomainError("degenerate fixed-point Jacobian (J - I singular)")
        p = SectionPoint(*(p.as_array() - np.linalg.solve(A, r)))
    raise NonConvergenceError(
        f"fixed-point Newton did not reach {tol} in {max_iter} iterations",
        best=best,
    )


@dataclass(frozen=True)
class ManifoldBranch:
    branch: str
    points: np.ndarray  # shape (m, 2), ordered polyline in (x, vx)
    truncated: bool
    truncation_reason: str


@dataclass(frozen=True)
class HomoclinicReport:
    found: bool
    point: tuple[float, float] | None = None
    angle: float | None = None  # transversality angle, radians
    unstable_segment: int | None = None
    stable_segment: int | None = None


_BRANCHES = ("unstable+", "unstable-", "stable+", "stable-")


def manifold_segment(p: SectionPoint, mu: float, sd: SectionDef, branch: str,
                     steps: int = 30, seeds: int = 200,
                     seed_offset: float = 1e-6, tol: float = 1e-12,
                     escape_radius: float = 5.0) -> ManifoldBranch:
    """Trace one manifold branch of a hyperbolic fixed point.

    Seeds fill a fundamental domain [offset, |lambda| * offset] along the
    (un)stable eigenvector and are iterated with the forward (unstable) or
    reversed-time (stable) return map; escape or collision truncates the
    polyline and is recorded, not raised.
    """
    if branch not in _BRANCHES:
        raise DomainError(f"branch must be one of {_BRANCHES}")
    lin = linearize_map(p, mu, sd, tol=tol, method="stm")
    if lin.tag != HYPERBOLIC:
        raise DomainError(f"fixed point is {lin.tag}, not hyperbolic")
    eigvals, eigvecs = np.linalg.eig(lin.jacobian)
    unstable = branch.startswith("unstable")
    idx = int(np.argmax(np.abs(eigvals))) if unstable else \
        int(np.argmin(np.abs(eigvals)))
    lam = float(np.real(eigvals[idx]))
    v = np.real(eigvecs[:, idx])
    v /= np.linalg.norm(v)
    if branch.endswith("-"):
        v = -v
    step_fn = return_map if unstable else _inverse_map

    # geometric ladder of seeds across one fundamental domain
    ratios = np.abs(lam) ** np.linspace(0.0, 1.0, seeds, endpoint=False)
    pts = [p.as_array() + seed_offset * r * v for r in ratios]
    poly = []
    truncated, reason = False, ""
    for k in range(steps):
        layer = []
        for q in pts:
            try:
                layer.append(step_fn(SectionPoint(*q), mu, sd, tol).as_array())
            except (SingularityError, DomainError, NonConvergenceError) as e:
                truncated, reason = True, f"iterate {k}: {e}"
        if not layer:
            break
        pts = layer
        poly.extend(layer)
    return ManifoldBranch(branch, np.array(poly), truncated, reason)


def _segment_intersection(a0, a1, b0, b1):
    """Intersection point of two closed segments, or None."""
    d1, d2 = a1 - a0, b1 - b0
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < 1e-300:
        return None
    r = b0 - a0
    t = (r[0] * d2[1] - r[1] * d2[0]) / denom
    s = (r[0] * d1[1] - r[1] * d1[0]) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
        return a0 + t * d1
    return None


def homoclinic_intersection(unstable: ManifoldBranch,
                            stable: ManifoldBranch) -> HomoclinicReport:
    """First transversal crossing between stable and unstable polylines.

    Consecutive iterates of a seed ladder form the polyline segments; the
    transversality angle is the angle between the crossing segments.
    """
    U, S = unstable.points, stable.points
    for i in range(len(U) - 1):
        for j in range(len(S) - 1):
            hit = _segment_intersection(U[i], U[i + 1], S[j], S[j + 1])
            if hit is None:
                continue
            du = U[i + 1] - U[i]
            ds = S[j + 1] - S[j]
            nu, ns = np.linalg.norm(du), np.linalg.norm(ds)
            if nu < 1e-300 or ns < 1e-300:
                continue
            cosang = abs(float(np.dot(du, ds))) / (nu * ns)
            angle = math.acos(min(1.0, cosang))
            return HomoclinicReport(True, (float(hit[0]), float(hit[1])),
                                    angle, i, j)
    return HomoclinicReport(False)
