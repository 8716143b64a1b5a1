"""Batch driver.

    deadoil {forward,adjoint,gradcheck,optimize,verify} --config FILE
            [--out DIR] [--stride K] [--seed S]

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .adjoint import (NonConvergenceWarning, gradient_wrt_control, kkt_residual,
                      solve_adjoint_discrete, solve_adjoint_aggregate)
from .coefficients import verify_hypotheses
from .config import ConfigError, Scenario, load_scenario
from .io import write_levels, write_manifest
from .linsolve import BreakdownError
from .mesh import inner, write_field
from .objective import evaluate_cost
from .optimizer import minimize
from .oracle import (fd_directional, fd_gateaux, refinement_studies, smooth_control,
                     smooth_field)
from .state import GateauxDirection, InstabilityError, gateaux_apply, solve_forward

log = logging.getLogger("deadoil")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


class VerificationFailure(Exception):
    pass


def _forward(sc: Scenario, out: Path, stride: int, seed: int):
    traj = solve_forward(sc.grid, sc.u0, sc.p0, sc.initial_control, sc.coef, sc.tg)
    arts = write_levels(out, sc.grid, "u_%04d.csv", traj.u, stride)
    arts += write_levels(out, sc.grid, "p_%04d.csv", traj.p, stride)
    J = evaluate_cost(traj, sc.initial_control, sc.params, sc.tg)
    return arts, {"J": J}


def _adjoint(sc: Scenario, out: Path, stride: int, seed: int):
    f = sc.initial_control
    traj = solve_forward(sc.grid, sc.u0, sc.p0, f, sc.coef, sc.tg)
    adj = solve_adjoint_discrete(traj, sc.params, sc.coef, sc.tg)
    grad = gradient_wrt_control(f, adj, sc.params, sc.tg)
    arts = write_levels(out, sc.grid, "lamu_%04d.csv", adj.lam_u, stride)
    arts += write_levels(out, sc.grid, "lamp_%04d.csv", adj.lam_p, stride)
    arts += write_levels(out, sc.grid, "grad_%04d.csv", grad, stride)
    agg = solve_adjoint_aggregate(traj, sc.params, sc.coef, sc.tg, strict=False)
    for name, v in (("e1.csv", agg.e1), ("p1.csv", agg.p1)):
        write_field(out / name, sc.grid, v)
        arts.append(out / name)
    kkt = kkt_residual(sc.grid, f, agg, sc.params, sc.tg)
    report = out / "kkt_report.csv"
    with open(report, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kkt_residual", "grad_norm", "gmres_iterations", "gmres_residual",
                    "converged"])
        gn = float(np.sqrt(inner(sc.grid, grad, grad)))
        w.writerow([f"{kkt:.17g}", f"{gn:.17g}", agg.iterations, f"{agg.residual:.17g}",
                    int(agg.converged)])
    arts.append(report)
    print(f"kkt residual {kkt:.6e}  (aggregate solve converged: {agg.converged}, "
          f"residual {agg.residual:.3e})")
    return arts, {"kkt_residual": kkt, "aggregate_converged": agg.converged}


def gradient_check(sc: Scenario, seed: int, directions: int, s: float):
    """Compare adjoint directional derivatives with central differences.

    Returns rows ``(direction, fd, adjoint, rel_error)``.
    """
    rng = np.random.default_rng(seed)
    f = sc.initial_control
    traj = solve_forward(sc.grid, sc.u0, sc.p0, f, sc.coef, sc.tg)
    adj = solve_adjoint_discrete(traj, sc.params, sc.coef, sc.tg)
    grad = gradient_wrt_control(f, adj, sc.params, sc.tg)

    def J(ff):
        tr = solve_forward(sc.grid, sc.u0, sc.p0, ff, sc.coef, sc.tg, check_stability=False)
        return evaluate_cost(tr, ff, sc.params, sc.tg)

    rows = []
    for k in range(directions):
        d = smooth_control(sc.grid, sc.tg.N, rng)
        fd = fd_directional(J, f, d, s)
        ad = inner(sc.grid, grad, d)
        rows.append((k, fd, ad, abs(fd - ad) / max(abs(fd), np.finfo(float).tiny)))
    return rows


def _gradcheck(sc: Scenario, out: Path, stride: int, seed: int):
    gc = sc.values["gradcheck"]
    rows = gradient_check(sc, seed, gc["directions"], gc["step"])
    path = out / "gradcheck.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["direction", "fd", "adjoint", "rel_error"])
        for k, fd, ad, err in rows:
            w.writerow([k, f"{fd:.17g}", f"{ad:.17g}", f"{err:.17g}"])
    worst = max(r[3] for r in rows)
    print(f"gradient check: max relative error {worst:.3e} (tolerance {gc['rtol']:.1e})")
    extra = {"max_rel_error": worst}
    if worst > gc["rtol"]:
        raise VerificationFailure(([path], extra),
                                  f"gradient check failed: {worst:.3e} > {gc['rtol']:.1e}")
    return [path], extra


def _optimize(sc: Scenario, out: Path, stride: int, seed: int):
    res = minimize(sc.grid, sc.u0, sc.p0, sc.initial_control, sc.params, sc.coef, sc.tg,
                   sc.opts)
    path = out / "convergence.csv"
    res.write_log(path)
    arts = [path] + write_levels(out, sc.grid, "f_%04d.csv", res.best_control, stride)
    print(f"optimize: status {res.status}, {res.iterations} iterations, "
          f"J {res.J_history[0]:.6e} -> {res.J_history[-1]:.6e}, "
          f"|grad| {res.grad_norm_history[0]:.3e} -> {res.grad_norm_history[-1]:.3e}")
    extra = {"status": res.status, "iterations": res.iterations,
             "final_J": res.J_history[-1], "final_grad_norm": res.grad_norm_history[-1]}
    if res.status == "line-search-failure":
        raise InstabilityError("line search failed after the maximum number of shrinks")
    return arts, extra


def _verify(sc: Scenario, out: Path, stride: int, seed: int):
    arts, failures = [], []
    rep = verify_hypotheses(sc.coef, -10.0, 10.0, 1000)
    path = out / "hypotheses.txt"
    path.write_text(str(rep) + "\n")
    arts.append(path)
    if not rep.passed:
        failures.append("hypotheses: " + "; ".join(c.name for c in rep.failures()))

    # Gateaux derivative against central differences at a random smooth point
    rng = np.random.default_rng(seed)
    grid = sc.grid

    def smooth():
        return smooth_field(grid, rng)

    point = (smooth(), smooth(), smooth())
    direc = GateauxDirection(smooth(), smooth(), smooth())
    xi = gateaux_apply(grid, *point, direc, sc.coef)
    scale = max(np.max(np.abs(xi[0])), np.max(np.abs(xi[1])))
    path = out / "gateaux_check.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "max_rel_error"])
        errs = []
        for s in (1e-3, 1e-4, 1e-5):
            fd = fd_gateaux(grid, point, direc, sc.coef, s)
            err = max(np.max(np.abs(fd[0] - xi[0])), np.max(np.abs(fd[1] - xi[1]))) / scale
            errs.append(err)
            w.writerow([f"{s:.1e}", f"{err:.17g}"])
    arts.append(path)
    if errs[-1] > 1e-6:
        failures.append(f"gateaux derivative: relative error {errs[-1]:.3e} > 1e-6")

    v = sc.values["verify"]
    space, time_rep = refinement_studies(sc.coef, v["mms_T"], v["mms_levels"] + 1)
    space.write_csv(out / "mms_space.csv")
    time_rep.write_csv(out / "mms_time.csv")
    arts += [out / "mms_space.csv", out / "mms_time.csv"]
    print(space)
    print(time_rep)
    for label, rep_, target in (("spatial", space, 2.0), ("temporal", time_rep, 1.0)):
        last = (rep_.orders_u[-1], rep_.orders_p[-1])
        if any(abs(o - target) > 0.2 for o in last):
            failures.append(f"{label} order {last} not within {target} +- 0.2")
    extra = {"failures": failures}
    if failures:
        raise VerificationFailure((arts, extra), "; ".join(failures))
    return arts, extra


COMMANDS = {"forward": _forward, "adjoint": _adjoint, "gradcheck": _gradcheck,
            "optimize": _optimize, "verify": _verify}


def run_scenario(config_path, subcommand: str, out=None, stride=None, seed: int = 0) -> int:
    """Run one subcommand and write its artifacts plus ``manifest.json``."""
    try:
        sc = load_scenario(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = Path(out) if out is not None else sc.base_dir / sc.values["output"]["dir"]
    stride = stride if stride is not None else sc.values["output"]["stride"]
    if stride < 1:
        print("config error: stride must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    outdir.mkdir(parents=True, exist_ok=True)
    values = dict(sc.values)
    values["run"] = {"seed": seed, "stride": stride}
    code = EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            arts, extra = COMMANDS[subcommand](sc, outdir, stride, seed)
        except VerificationFailure as exc:
            (arts, extra), msg = exc.args
            print(f"verification failure: {msg}", file=sys.stderr)
            code = EXIT_VERIFY
        except (InstabilityError, FloatingPointError, BreakdownError) as exc:
            print(f"numeric failure: {exc}", file=sys.stderr)
            code = EXIT_NUMERIC
    for w in caught:
        if not issubclass(w.category, NonConvergenceWarning):
            print(f"warning: {w.message}", file=sys.stderr)
    if code == EXIT_NUMERIC:
        return code
    write_manifest(outdir, subcommand, values, sc.grid, sc.tg, arts, {"result": extra})
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="deadoil", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="scenario INI file")
    parser.add_argument("--out", help="output directory (default: [output] dir)")
    parser.add_argument("--stride", type=int, help="save every k-th time level")
    parser.add_argument("--seed", type=int, default=0, help="seed for random directions")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run_scenario(args.config, args.subcommand, args.out, args.stride, args.seed)


if __name__ == "__main__":
    sys.exit(main())
