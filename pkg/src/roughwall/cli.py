"""Command-line entry point: ``roughwall {cell,corrector,solve,sweep,flat-suite}``."""
import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import harness
from .cell import solve_cell
from .corrector import decay_report, l2_on_box, solve_xi
from .errors import ConfigError, RoughwallError

log = logging.getLogger("roughwall")


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _cell(cfg):
    m = cfg.mesh
    return solve_cell(cfg.profile, Y=m.cell_Y, ppp=cfg.cell_ppp, n2=m.n2,
                      tol=min(cfg.solver.tol, 1e-12), max_iter=cfg.solver.max_iter)


def _csv(header, rows):
    fmt = lambda v: "" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) \
        else str(v)
    return "\n".join([",".join(header)] + [",".join(fmt(v) for v in r) for r in rows]) + "\n"


def cmd_cell(args, cfg):
    sol = _cell(cfg)
    rows = [("beta_bar", "", sol.beta_bar, 0.0), ("tau_bar", "", sol.tau_bar, 0.0)]
    for name, spec in (("eta", sol.eta), ("tau", sol.tau_spectrum)):
        rows += [(name, int(k), float(c.real), float(c.imag)) for k, c in zip(spec.k, spec.coeffs)]
    harness.atomic_write(os.path.join(args.out, "cell.csv"),
                         _csv(("quantity", "k", "real", "imag"), rows))
    return 0


def cmd_corrector(args, cfg):
    m = cfg.mesh
    cell = _cell(cfg)
    kw = dict(ppp=m.ppp, n2=max(8, m.n2 // 2), tol=min(cfg.solver.tol, 1e-11),
              max_iter=cfg.solver.max_iter)
    t0 = time.perf_counter()
    xi = solve_xi(cell, n_periods=m.corrector_periods, Y=m.corrector_Y, **kw)
    rep = decay_report(xi, cfg.decay)
    out = {"n_periods": m.corrector_periods, "Y": m.corrector_Y,
           "h1_norm": xi.h1_norm(), "radial_exponent": rep.radial_exponent,
           "line_exponent": rep.line_exponent, "radial_bound": cfg.decay.radial_bound,
           "line_bound": cfg.decay.line_bound, "no_data": rep.no_data,
           "shells": rep.shells, "lines": rep.lines}
    if args.truncation_check and not rep.no_data:
        big = solve_xi(cell, n_periods=2 * m.corrector_periods, Y=2 * m.corrector_Y, **kw)
        w, h = np.pi * m.corrector_periods, m.corrector_Y / 2
        a, b = l2_on_box(xi, w, h), l2_on_box(big, w, h)
        out["truncation"] = {"box": [w, h], "l2": a, "l2_doubled": b,
                             "relative_change": abs(a - b) / b}
    out["seconds"] = time.perf_counter() - t0
    rows = [("shell", np.sqrt(lo * hi), vmax) for lo, hi, vmax in rep.shells]
    rows += [("line", y, v) for y, v in rep.lines]
    rows += [("radial_exponent", "", rep.radial_exponent),
             ("line_exponent", "", rep.line_exponent)]
    harness.atomic_write(os.path.join(args.out, "decay.csv"),
                         _csv(("kind", "position", "value"), rows))
    harness.atomic_write(os.path.join(args.out, "corrector.json"), _json(out))
    return 0


def _write_report(args, rep, stem):
    harness.atomic_write(os.path.join(args.out, f"{stem}.csv"), rep.to_csv())
    harness.atomic_write(os.path.join(args.out, f"{stem}_slopes.json"),
                         _json({"bc": rep.bc_mode, "slopes": rep.slopes,
                                "floor_flags": rep.flags, "timings": rep.timings}))


def cmd_solve(args, cfg):
    spec = cfg.spec(args.eps)
    u, dofs = harness.solve_exact(spec, args.bc, harness.Resolution(cfg.mesh.ppp),
                                  cfg.solver.tol, cfg.solver.max_iter)
    v = u.mesh.vertices
    harness.atomic_write(os.path.join(args.out, f"field_{args.bc}.csv"),
                         _csv(("x1", "x2", "u"), zip(v[:, 0], v[:, 1], u.values)))
    log.info("eps=%g: %d free dofs", args.eps, dofs)
    return 0


def cmd_sweep(args, cfg):
    rep = harness.error_table(cfg, args.bc, threads=args.threads,
                              floor_check=args.floor_check)
    _write_report(args, rep, f"convergence_{args.bc}")
    return 0


def cmd_flat_suite(args, cfg):
    res = harness.run_flat_suite(c=args.c, C=cfg.C, L=cfg.L, bc_mode=args.bc)
    harness.atomic_write(os.path.join(args.out, "flat_suite.json"), _json(res))
    for ch in res["checks"]:
        print(f"{'PASS' if ch['passed'] else 'FAIL'} {ch['name']} "
              f"{ch['value']:.3e} <= {ch['tolerance']:.1e}")
    return 0 if res["passed"] else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults used when omitted)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--bc", choices=harness.BC_MODES, default="periodic",
                        help="inlet/outlet condition of the exact solve")
    common.add_argument("--threads", type=int, default=1, help="ε rows solved in parallel")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="roughwall", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("cell", parents=[common], help="solve the β and τ cell problems")
    c = sub.add_parser("corrector", parents=[common], help="solve ξ and fit its decay")
    c.add_argument("--truncation-check", action="store_true",
                   help="also solve on the doubled domain and compare")
    s = sub.add_parser("solve", parents=[common], help="one exact solve, written as a vertex field")
    s.add_argument("--eps", type=float, required=True)
    w = sub.add_parser("sweep", parents=[common], help="convergence table over the ε grid")
    w.add_argument("--floor-check", action="store_true",
                   help="re-solve on a refined mesh and flag discretisation-limited errors")
    f = sub.add_parser("flat-suite", parents=[common], help="closed-form flat-wall checks")
    f.add_argument("--c", type=float, default=0.5, help="flat wall depth (in cell units)")
    return p


COMMANDS = {"cell": cmd_cell, "corrector": cmd_corrector, "solve": cmd_solve,
            "sweep": cmd_sweep, "flat-suite": cmd_flat_suite}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = harness.load_config(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, cfg)
    except RoughwallError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
