"""Command-line front end.

Subcommands mirror the library modules: sturm, charpoly, inertia,
hermite-count, interlace, jordan, linsolve, floquet, pcr3bp, section.
All numeric defaults live in RunConfig and are echoed into every JSON
output (CSV outputs carry them in a leading comment line).  Exit codes:
0 success, 1 domain or input error, 2 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import (
    DomainError,
    NonConvergenceError,
    SecularError,
    SingularityError,
)
from .floquet import (
    characteristic_exponents,
    classify_periodic_stability,
    hill_system,
    monodromy,
)
from .jordan import classify_3x3, jordan_form
from .linode import (
    FIRST_ORDER,
    SECOND_ORDER,
    SecondOrderSystem,
    classify_stability,
    solve_constant,
    solve_lagrange_oscillation,
    solve_residue,
)
from .matrixcore import (
    QuadraticForm,
    SquareMatrix,
    char_poly,
    hermite_root_count,
    inertia,
    interlacing_check,
)
from .pcr3bp import (
    STABLE,
    correct_periodic,
    jacobi_constant,
    libration_points,
    libration_stability,
    lyapunov_seed,
    orbit_exponents,
)
from .floquet import integrate
from .pcr3bp import _flow_rhs
from .ratpoly import (
    RationalPolynomial,
    RootInterval,
    count_real_roots,
    isolate_real_roots,
    refine_root,
)
from .section import (
    SectionDef,
    SectionPoint,
    homoclinic_intersection,
    manifold_segment,
    section_crossings,
)


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-10  # integrator tolerance
    cluster_tol: float = 1e-8  # eigenvalue clustering tolerance
    fmt: str = "json"
    output: str | None = None

    def __post_init__(self):
        if self.tol <= 0 or self.cluster_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.fmt not in ("json", "csv"):
            raise DomainError(f"unknown output format {self.fmt!r}")

    def echo(self) -> dict:
        return {
            "integrator_tol": self.tol,
            "cluster_tol": self.cluster_tol,
            "version": __version__,
        }


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so we control exit codes."""

    def error(self, message):
        raise DomainError(f"usage: {message}")


# -- serialization helpers ---------------------------------------------------


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _lam_json(lam):
    return _frac_str(lam) if isinstance(lam, Fraction) else _cplx(lam)


def _poly_arg(text: str) -> RationalPolynomial:
    """Polynomial from inline JSON, a file path, or CSV coefficients."""
    text = text.strip()
    if text.startswith("{"):
        return RationalPolynomial.from_json(text)
    if os.path.exists(text):
        with open(text) as fh:
            return RationalPolynomial.from_json(fh.read())
    return RationalPolynomial([Fraction(c) for c in text.split(",")])


def _matrix_arg(path: str) -> SquareMatrix:
    with open(path) as fh:
        return SquareMatrix.from_json(fh.read())


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg: RunConfig, payload: dict) -> None:
    payload = dict(payload)
    payload["config"] = cfg.echo()
    _emit(cfg, json.dumps(payload, sort_keys=True) + "\n")


def _emit_csv(cfg: RunConfig, header: str, rows) -> None:
    echo = " ".join(f"{k}={v}" for k, v in sorted(cfg.echo().items()))
    lines = [f"# {echo}", header]
    lines.extend(",".join(repr(v) if isinstance(v, float) else str(v)
                          for v in row) for row in rows)
    _emit(cfg, "\n".join(lines) + "\n")


# -- subcommands -------------------------------------------------------------


def _cmd_sturm(args, cfg: RunConfig) -> int:
    p = _poly_arg(args.poly)
    if args.action == "count":
        lo = Fraction(args.lo) if args.lo is not None else None
        hi = Fraction(args.hi) if args.hi is not None else None
        if lo is None and hi is None:
            n = count_real_roots(p)
        else:
            n = count_real_roots(p, lo, hi)
        _emit(cfg, f"{n}\n")
        return 0
    if args.action == "isolate":
        ivs = isolate_real_roots(p)
        _emit_json(cfg, {
            "intervals": [[_frac_str(iv.lo), _frac_str(iv.hi)] for iv in ivs],
        })
        return 0
    # refine
    if args.lo is None or args.hi is None:
        raise DomainError("refine requires --lo and --hi")
    iv = RootInterval(Fraction(args.lo), Fraction(args.hi), 1)
    r = refine_root(p, iv, Fraction(args.reftol) if args.reftol else Fraction(1, 10 ** 10))
    _emit(cfg, f"{float(r)!r}\n")
    return 0


def _cmd_charpoly(args, cfg: RunConfig) -> int:
    A = _matrix_arg(args.matrix)
    cp = char_poly(A)
    _emit_json(cfg, {
        "char_poly": {"coeffs": [_frac_str(c) for c in cp.poly.coeffs]},
    })
    return 0


def _cmd_inertia(args, cfg: RunConfig) -> int:
    A = _matrix_arg(args.matrix)
    ine = inertia(QuadraticForm(A))
    _emit_json(cfg, {
        "inertia": {"pos": ine.n_pos, "neg": ine.n_neg, "zero": ine.n_zero},
        "signature": ine.signature,
    })
    return 0


def _cmd_hermite_count(args, cfg: RunConfig) -> int:
    A = _matrix_arg(args.matrix)
    distinct, distinct_real = hermite_root_count(char_poly(A).poly)
    _emit_json(cfg, {"distinct": distinct, "distinct_real": distinct_real})
    return 0


def _cmd_interlace(args, cfg: RunConfig) -> int:
    A = _matrix_arg(args.matrix)
    rep = interlacing_check(A)
    _emit_json(cfg, {
        "passed": rep.passed,
        "outer_intervals": [[_frac_str(iv.lo), _frac_str(iv.hi)]
                            for iv in rep.outer_intervals],
        "inner_intervals": [[_frac_str(iv.lo), _frac_str(iv.hi)]
                            for iv in rep.inner_intervals],
        "gaps": list(rep.gap_results),
    })
    return 0


def _cmd_jordan(args, cfg: RunConfig) -> int:
    A = _matrix_arg(args.matrix)
    if args.flavor and args.flavor != A.flavor:
        A = SquareMatrix(A.to_numpy(), "numeric") if args.flavor == "numeric" \
            else A
    dec = jordan_form(A, cluster_tol=cfg.cluster_tol)
    out = {
        "J": json.loads(dec.J.to_json()),
        "P": json.loads(dec.P.to_json()),
        "blocks": [{"lambda": _lam_json(lam), "sizes": list(sizes)}
                   for lam, sizes in dec.blocks],
        "warnings": list(dec.warnings),
    }
    if args.classify3:
        t3 = classify_3x3(A)
        out["type3"] = {"tag": t3.tag, "scalar": t3.scalar}
    _emit_json(cfg, out)
    return 0


def _cmd_linsolve(args, cfg: RunConfig) -> int:
    A = _matrix_arg(args.matrix)
    x0 = [Fraction(v) for v in args.x0.split(",")]
    if args.form == "second":
        v0 = ([Fraction(v) for v in args.v0.split(",")]
              if args.v0 else [Fraction(0)] * len(x0))
        sol, modes, verdict = solve_lagrange_oscillation(
            SecondOrderSystem(A), x0, v0)
        payload = {
            "verdict": verdict.tag,
            "strict_lagrange": verdict.strict_lagrange,
            "modes": [{"alpha": m.alpha, "rate": m.rate,
                       "vector": list(m.vector)} for m in modes],
        }
    else:
        solver = solve_residue if args.method == "residue" else solve_constant
        sol = solver(A, x0)
        verdict = classify_stability(A, FIRST_ORDER)
        payload = {"verdict": verdict.tag,
                   "strict_lagrange": verdict.strict_lagrange}
    payload["terms"] = [
        {"lambda": _cplx(t.lam),
         "poly": [[_cplx(c) for c in vec] for vec in t.coeffs]}
        for t in sol.terms
    ]
    _emit_json(cfg, payload)
    return 0


def _hill_point(a: float, q: float, cfg: RunConfig):
    sys_ = hill_system(a, q)
    exps = characteristic_exponents(monodromy(sys_, cfg.tol),
                                    cluster_tol=cfg.cluster_tol)
    verdict = classify_periodic_stability(exps)
    return exps, verdict


def _cmd_floquet(args, cfg: RunConfig) -> int:
    if args.system != "hill":
        raise DomainError(f"unknown built-in system {args.system!r}")
    if args.grid:
        try:
            a_part, q_part = args.grid.split(",")
            a0, a1, na = a_part.split(":")
            q0, q1, nq = q_part.split(":")
            a_vals = np.linspace(float(a0), float(a1), int(na))
            q_vals = np.linspace(float(q0), float(q1), int(nq))
        except ValueError as e:
            raise DomainError(f"bad --grid spec (a0:a1:na,q0:q1:nq): {e}")
        cells = [(a, q) for a in a_vals for q in q_vals]
        workers = max(1, int(os.environ.get("SECULAR_THREADS", "1")))

        def work(cell):
            a, q = cell
            exps, verdict = _hill_point(a, q, cfg)
            smax = max(abs(s) for s in exps.multipliers)
            return (float(a), float(q), float(smax), verdict.tag)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(work, cells))
        else:
            rows = [work(c) for c in cells]
        _emit_csv(cfg, "a,q,smax,verdict", rows)
        return 0
    if args.a is None or args.q is None:
        raise DomainError("floquet requires --a and --q (or --grid)")
    exps, verdict = _hill_point(args.a, args.q, cfg)
    _emit_json(cfg, {
        "a": args.a,
        "q": args.q,
        "period": exps.period,
        "multipliers": [_cplx(s) for s in exps.multipliers],
        "exponents": [_cplx(s) for s in exps.exponents],
        "verdict": verdict.tag,
        "marginal_multipliers": [_cplx(s)
                                 for s in verdict.marginal_multipliers],
    })
    return 0


def _parse_state(text: str, n: int):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != n:
        raise DomainError(f"expected {n} comma-separated values, got {len(vals)}")
    return vals


def _cmd_pcr3bp(args, cfg: RunConfig) -> int:
    if args.action == "lagrange":
        pts = libration_points(args.mu)
        _emit_json(cfg, {
            "mu": args.mu,
            "points": [{"label": p.label,
                        "position": [p.position[0], p.position[1]]}
                       for p in pts],
        })
        return 0
    if args.action == "stability":
        pts = {p.label: p for p in libration_points(args.mu)}
        if args.point not in pts:
            raise DomainError(f"unknown libration point {args.point!r}")
        st = libration_stability(args.mu, pts[args.point])
        _emit_json(cfg, {
            "mu": args.mu,
            "point": args.point,
            "position": list(st.point.position),
            "quartic": {"s2_coeff": st.quartic_coeffs[0],
                        "const": st.quartic_coeffs[1]},
            "roots": [_cplx(s) for s in st.roots],
            "classification": st.verdict,
            "verdict": "stable" if st.verdict == STABLE else "unstable",
        })
        return 0
    if args.action == "orbit":
        pts = {p.label: p for p in libration_points(args.mu)}
        if args.point not in pts:
            raise DomainError(f"unknown libration point {args.point!r}")
        seed, t_half = lyapunov_seed(args.mu, pts[args.point],
                                     args.seed_amplitude)
        orbit = correct_periodic(seed, t_half, args.mu,
                                 integrator_tol=cfg.tol)
        rep = orbit_exponents(orbit)
        unstable = any(abs(s) > 1.0 + 1e-6 for s in orbit.multipliers)
        _emit_json(cfg, {
            "mu": args.mu,
            "x0": [float(v) for v in orbit.initial_state],
            "T": orbit.period,
            "C": orbit.jacobi,
            "multipliers": [_cplx(s) for s in orbit.multipliers],
            "exponents": [_cplx(s) for s in orbit.exponents],
            "verdict": "unstable" if unstable else "stable",
            "invariant_flags": list(rep.flags),
        })
        return 0
    # propagate
    state0 = _parse_state(args.state, 4)
    traj = integrate(_flow_rhs(args.mu), state0, (0.0, args.t), cfg.tol)
    ts = np.linspace(0.0, args.t, args.samples)
    rows = []
    for t in ts:
        x, y, vx, vy = traj(t)
        rows.append((float(t), float(x), float(y), float(vx), float(vy),
                     float(jacobi_constant((x, y, vx, vy), args.mu))))
    _emit_csv(cfg, "t,x,y,vx,vy,C", rows)
    return 0


def _cmd_section(args, cfg: RunConfig) -> int:
    sd = SectionDef(args.direction, args.C)
    if args.action == "manifolds":
        x, vx = _parse_state(args.fixed, 2)
        p = SectionPoint(x, vx)
        kw = dict(steps=args.steps, seeds=args.seeds,
                  seed_offset=args.seed_offset, tol=cfg.tol)
        unstable = manifold_segment(p, args.mu, sd, "unstable+", **kw)
        stable = manifold_segment(p, args.mu, sd, "stable+", **kw)
        rep = homoclinic_intersection(unstable, stable)
        payload = {
            "mu": args.mu,
            "C": args.C,
            "fixed": [x, vx],
            "homoclinic": {
                "found": rep.found,
                "point": list(rep.point) if rep.found else None,
                "angle": rep.angle,
                "unstable_segment": rep.unstable_segment,
                "stable_segment": rep.stable_segment,
            },
        }
        if cfg.output:
            base, _ = os.path.splitext(cfg.output)
            for br, name in ((unstable, "unstable"), (stable, "stable")):
                sub = RunConfig(cfg.tol, cfg.cluster_tol, "csv",
                                f"{base}.{name}.csv")
                _emit_csv(sub, "x,vx",
                          [(float(a), float(b)) for a, b in br.points])
        else:
            payload["unstable_polyline"] = [[float(a), float(b)]
                                            for a, b in unstable.points]
            payload["stable_polyline"] = [[float(a), float(b)]
                                          for a, b in stable.points]
        _emit_json(cfg, payload)
        return 0
    x, vx = _parse_state(args.start, 2)
    pts = section_crossings(SectionPoint(x, vx), args.mu, sd, args.n,
                            tol=cfg.tol)
    rows = [(i + 1, float(q.x), float(q.vx)) for i, q in enumerate(pts)]
    _emit_csv(cfg, "i,x,vx", rows)
    return 0


# -- parser ------------------------------------------------------------------


def _build_parser() -> _Parser:
    top = _Parser(prog="secular", description=__doc__)
    top.add_argument("--version", action="version", version=__version__)
    top.add_argument("--tol", type=float, default=1e-10,
                     help="integrator tolerance (default 1e-10)")
    top.add_argument("--cluster-tol", type=float, default=1e-8,
                     help="eigenvalue clustering tolerance (default 1e-8)")
    top.add_argument("--format", choices=("json", "csv"), default="json")
    top.add_argument("--output", default=None, help="output path (default stdout)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sturm", help="real-root counting and isolation")
    p.add_argument("action", choices=("count", "isolate", "refine"))
    p.add_argument("--poly", required=True,
                   help="polynomial as JSON, CSV coefficients, or a file path")
    p.add_argument("--lo", default=None)
    p.add_argument("--hi", default=None)
    p.add_argument("--tol", dest="reftol", default=None,
                   help="refinement tolerance (refine only)")
    p.set_defaults(fn=_cmd_sturm)

    for name, fn in (("charpoly", _cmd_charpoly), ("inertia", _cmd_inertia),
                     ("hermite-count", _cmd_hermite_count),
                     ("interlace", _cmd_interlace)):
        p = sub.add_parser(name)
        p.add_argument("--matrix", required=True, help="matrix JSON file")
        p.set_defaults(fn=fn)

    p = sub.add_parser("jordan", help="Jordan canonical form")
    p.add_argument("--matrix", required=True)
    p.add_argument("--flavor", choices=("exact", "numeric"), default=None)
    p.add_argument("--classify3", action="store_true")
    p.set_defaults(fn=_cmd_jordan)

    p = sub.add_parser("linsolve", help="closed-form linear ODE solution")
    p.add_argument("--matrix", required=True)
    p.add_argument("--x0", required=True, help="initial state, CSV rationals")
    p.add_argument("--v0", default=None, help="initial velocity (second form)")
    p.add_argument("--method", choices=("jordan", "residue"), default="jordan")
    p.add_argument("--form", choices=("first", "second"), default="first")
    p.set_defaults(fn=_cmd_linsolve)

    p = sub.add_parser("floquet", help="Hill/Mathieu stability")
    p.add_argument("--system", default="hill")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--grid", default=None, help="a0:a1:na,q0:q1:nq sweep")
    p.set_defaults(fn=_cmd_floquet)

    p = sub.add_parser("pcr3bp", help="restricted three-body pipeline")
    p.add_argument("action",
                   choices=("lagrange", "stability", "orbit", "propagate"))
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--point", default="L1")
    p.add_argument("--seed-amplitude", dest="seed_amplitude", type=float,
                   default=1e-3)
    p.add_argument("--state", default=None, help="x,y,vx,vy (propagate)")
    p.add_argument("--t", type=float, default=None, help="end time (propagate)")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(fn=_cmd_pcr3bp)

    p = sub.add_parser("section", help="surface-of-section maps")
    p.add_argument("action", nargs="?", choices=("crossings", "manifolds"),
                   default="crossings")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--direction", type=int, choices=(1, -1), default=1)
    p.add_argument("--start", default=None, help="x,vx (crossings)")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--fixed", default=None, help="x,vx fixed point (manifolds)")
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--seeds", type=int, default=40)
    p.add_argument("--seed-offset", dest="seed_offset", type=float,
                   default=1e-7)
    p.set_defaults(fn=_cmd_section)
    return top


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(args.tol, args.cluster_tol, args.format, args.output)
        if args.command == "pcr3bp":
            if args.action == "propagate" and (args.state is None
                                               or args.t is None):
                raise DomainError("propagate requires --state and --t")
        if args.command == "section":
            if args.action == "crossings" and args.start is None:
                raise DomainError("section crossings requires --start")
            if args.action == "manifolds" and args.fixed is None:
                raise DomainError("section manifolds requires --fixed")
        return args.fn(args, cfg)
    except (NonConvergenceError, SingularityError) as e:
        print(f"error: non-convergence: {e}", file=sys.stderr)
        return 2
    except (SecularError, OSError, ValueError, ZeroDivisionError,
            json.JSONDecodeError, KeyError) as e:
        print(f"error: input: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
