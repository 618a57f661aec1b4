"""Command-line front end.

Commands: solve, sweep, simulate, verify, mutual-fund, oracle.
Exit codes: 0 success, 1 input error, 2 verification/certification failure.
Output files are written atomically (temp file + rename) with a JSON run
manifest alongside; outputs are a pure function of (input file, flags, seed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from . import __version__, oracle, simulate, solvers
from .errors import (CaseMismatch, ModelValidationError, NoRoot,
                     PikappaError)
from .hamiltonian import value_function
from .jumps import JumpFunctionals
from .models import (LinearPremium, ModelInputs, load_model_file,
                     parse_model_dict, validate_model)
from .models import Utility
from .svgplot import line_chart

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2
MUTUAL_FUND_TOL = 1e-5


def _bundled_configs():
    return resources.files("pikappa").joinpath("configs")


def resolve_model_path(name: str) -> str:
    """A filesystem path, or the name of a bundled reproduction config."""
    if os.path.exists(name):
        return name
    base = name if name.endswith(".json") else name + ".json"
    cand = _bundled_configs().joinpath(base)
    if cand.is_file():
        return str(cand)
    raise FileNotFoundError(f"model file {name!r} not found (not a path or "
                            f"bundled config)")


def _load_inputs(args) -> ModelInputs:
    path = resolve_model_path(args.model)
    inputs = load_model_file(path)
    doc = dict(inputs.raw)
    for flag in ("eta", "r", "R", "b", "q", "mu"):
        v = getattr(args, flag, None)
        if v is None:
            continue
        if flag == "q":
            doc.setdefault("premium", {})
            doc["premium"] = dict(doc["premium"], q=v)
        elif flag == "mu":
            if int(doc["d"]) != 1:
                raise ValueError("--mu override needs a single-asset model")
            doc["mu"] = [v]
        else:
            doc[flag] = v
    if getattr(args, "lam", None) is not None:
        doc["lambda"] = args.lam
    if getattr(args, "rho", None) is not None:
        if int(doc["d"]) == 1:
            doc["rho"] = [args.rho]
        else:
            base = np.asarray(doc["rho"], dtype=float)
            doc["rho"] = (base * (args.rho / float(np.linalg.norm(base)))).tolist()
    return parse_model_dict(doc)


def _file_sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(args, outputs: list[str], t0: float) -> None:
    if not outputs:
        return
    manifest = {
        "command": " ".join(sys.argv[1:]),
        "input_sha256": _file_sha256(resolve_model_path(args.model)),
        "tool_version": __version__,
        "seed": getattr(args, "seed", None),
        "wall_time_s": round(time.time() - t0, 3),
        "outputs": [os.path.basename(p) for p in outputs],
    }
    _atomic_write(outputs[0] + ".manifest.json",
                  json.dumps(manifest, indent=2) + "\n")


def _report_lines(rep: solvers.SolveReport) -> list[str]:
    lines = []
    for i, p in enumerate(rep.policy.pi):
        lines.append(f"pi_{i + 1} = {p:.10g}")
    lines.append(f"pi_sum = {rep.policy.pi_sum:.10g}")
    lines.append(f"kappa = {rep.policy.kappa:.10g}")
    lines.append(f"case = {rep.case_label}")
    xs = "" if rep.xi_star is None else f"{rep.xi_star:.10g}"
    lines.append(f"xi_star = {xs}")
    lines.append(f"objective = {rep.objective.value:.10g}")
    lines.append(f"cert_residual = {rep.certificate.residual:.6g}")
    return lines


def _report_json(rep: solvers.SolveReport) -> dict:
    return {
        "pi": [float(p) for p in rep.policy.pi],
        "pi_sum": rep.policy.pi_sum,
        "kappa": rep.policy.kappa,
        "case": rep.case_label,
        "xi_star": rep.xi_star,
        "objective": rep.objective.value,
        "cert_residual": rep.certificate.residual,
        "cert_in_domain": rep.certificate.in_domain,
    }


def _emit(args, text: str, t0: float) -> None:
    out = getattr(args, "out", None)
    if out:
        _atomic_write(out, text if text.endswith("\n") else text + "\n")
        _write_manifest(args, [out], t0)
    else:
        print(text)


def cmd_solve(args) -> int:
    t0 = time.time()
    inputs = _load_inputs(args)
    report = validate_model(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
    if not report.ok:
        print("validation failed:\n" + str(report), file=sys.stderr)
        return EXIT_INPUT
    if args.thresholds:
        prem = getattr(inputs.friction, "premium", None)
        eta_R, eta_r = solvers.threshold_etas(inputs.model, inputs.jumps, prem)
        if args.format == "json":
            _emit(args, json.dumps({"eta_R": eta_R, "eta_r": eta_r}), t0)
        else:
            _emit(args, f"eta_R = {eta_R:.8f}\neta_r = {eta_r:.8f}", t0)
        return EXIT_OK
    try:
        rep = solvers.solve(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
    except PikappaError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.format == "json":
        _emit(args, json.dumps(_report_json(rep), indent=2), t0)
    else:
        _emit(args, "\n".join(_report_lines(rep)), t0)
    return EXIT_OK


def _threaded_sweep(param, grid, inputs, threads: int) -> oracle.SweepResult:
    if threads <= 1 or len(grid) < 4:
        return oracle.sweep(param, grid, inputs.model, inputs.jumps,
                            inputs.friction, inputs.utility)
    chunks = np.array_split(np.asarray(grid, dtype=float), threads)
    chunks = [c for c in chunks if c.size]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda c: oracle.sweep(param, c, inputs.model, inputs.jumps,
                                   inputs.friction, inputs.utility), chunks))
    points = tuple(p for part in parts for p in part.points)
    return oracle.SweepResult(parameter=param,
                              grid=np.asarray(grid, dtype=float),
                              points=points, metadata=parts[0].metadata)


def cmd_sweep(args) -> int:
    t0 = time.time()
    inputs = _load_inputs(args)
    if args.steps < 1:
        print("--steps must be a positive interval count", file=sys.stderr)
        return EXIT_INPUT
    if args.param not in oracle.SWEEP_PARAMS:
        print(f"unknown --param {args.param!r}; one of "
              f"{', '.join(oracle.SWEEP_PARAMS)}", file=sys.stderr)
        return EXIT_INPUT
    grid = np.linspace(args.frm, args.to, args.steps + 1)
    result = _threaded_sweep(args.param, grid, inputs, args.threads)
    csv_text = oracle.sweep_csv(result, inputs.model.d)
    outputs = []
    out = args.out or "sweep.csv"
    _atomic_write(out, csv_text)
    outputs.append(out)
    n_err = sum(1 for p in result.points if p.error)
    if n_err:
        print(f"{n_err}/{len(result.points)} points failed; see case_label "
              f"column", file=sys.stderr)
    if args.plot:
        ycols = [c.strip() for c in args.y.split(",") if c.strip()]
        series = {}
        for col in ycols:
            series[col] = [None if p.error else getattr(p, col, None)
                           for p in result.points]
        svg = line_chart([p.param_value for p in result.points], series,
                         x_label=args.param)
        _atomic_write(args.plot, svg)
        outputs.append(args.plot)
    _write_manifest(args, outputs, t0)
    return EXIT_OK


def cmd_simulate(args) -> int:
    t0 = time.time()
    inputs = _load_inputs(args)
    report = validate_model(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
    if not report.ok:
        print("validation failed:\n" + str(report), file=sys.stderr)
        return EXIT_INPUT
    from .hamiltonian import eval_objective
    from .models import Policy
    if args.pi is not None:
        pi = np.array([float(v) for v in args.pi.split(",")])
        policy = Policy(pi=pi, kappa=args.kappa if args.kappa is not None else 0.0)
        label = "user-supplied policy"
    else:
        rep = solvers.solve(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
        policy = rep.policy
        label = rep.case_label
    obj = eval_objective(policy, inputs.model, inputs.jumps, inputs.friction,
                         inputs.utility)
    closed = value_function(0.0, args.x0, args.horizon, obj, inputs.model,
                            inputs.jumps, inputs.utility)
    cfg = simulate.SimConfig(horizon=args.horizon, x0=args.x0,
                             n_paths=args.paths, seed=args.seed,
                             antithetic=args.antithetic)
    est = simulate.simulate_terminal_utility(policy, inputs.model,
                                             inputs.jumps, inputs.friction,
                                             inputs.utility, cfg,
                                             dump_csv=args.dump)
    z = (est.mean - closed) / est.std_error if est.std_error > 0 else 0.0
    lines = [f"policy = {label}",
             f"pi = {', '.join(f'{p:.8g}' for p in policy.pi)}",
             f"kappa = {policy.kappa:.8g}",
             f"mc_mean = {est.mean:.10g}",
             f"mc_se = {est.std_error:.4g}",
             f"closed_form = {closed:.10g}",
             f"z = {z:.3f}",
             f"floor_fraction = {est.floor_fraction:.3g}"]
    _emit(args, "\n".join(lines), t0)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.time()
    inputs = _load_inputs(args)
    checks: list[tuple[str, str, str]] = []   # (name, status, detail)

    report = validate_model(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
    if not report.ok:
        print("validation failed:\n" + str(report), file=sys.stderr)
        return EXIT_INPUT
    checks.append(("validation", "pass", ""))

    try:
        rep = solvers.solve(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
        checks.append(("certificate", "pass",
                       f"residual={rep.certificate.residual:.3e}"))
    except PikappaError as exc:
        checks.append(("certificate", "fail", str(exc)))
        for name, status, detail in checks:
            print(f"[{status}] {name} {detail}")
        return EXIT_VERIFY

    pol, val, bound = oracle.grid_maximize(inputs.model, inputs.jumps,
                                           inputs.friction, inputs.utility)
    gap = val - rep.objective.value
    ok = gap <= bound + 1e-12
    checks.append(("oracle-gap", "pass" if ok else "fail",
                   f"gap={gap:.3e} bound={bound:.3e}"))

    obj = rep.objective
    closed = value_function(0.0, 1.0, 1.0, obj, inputs.model, inputs.jumps,
                            inputs.utility)
    cfg = simulate.SimConfig(horizon=1.0, x0=1.0, n_paths=args.mc_paths,
                             seed=args.seed)
    est = simulate.simulate_terminal_utility(rep.policy, inputs.model,
                                             inputs.jumps, inputs.friction,
                                             inputs.utility, cfg)
    if est.std_error > 0.01 * abs(closed):
        checks.append(("mc-vs-closed-form", "inconclusive",
                       f"SE={est.std_error:.3g} too wide at "
                       f"{args.mc_paths} paths"))
    else:
        z = (est.mean - closed) / est.std_error if est.std_error else 0.0
        checks.append(("mc-vs-closed-form", "pass" if abs(z) <= 3.0 else "fail",
                       f"z={z:.2f}"))

    failed = any(s == "fail" for _, s, _ in checks)
    for name, status, detail in checks:
        print(f"[{status}] {name} {detail}".rstrip())
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_mutual_fund(args) -> int:
    t0 = time.time()
    inputs = _load_inputs(args)
    prem = getattr(inputs.friction, "premium", None)
    if not isinstance(prem, LinearPremium):
        print("mutual-fund separation needs a linear premium model",
              file=sys.stderr)
        return EXIT_INPUT
    if not (args.eta1 < args.eta_bar < args.eta2):
        print("--eta-bar must lie strictly between --eta1 and --eta2",
              file=sys.stderr)
        return EXIT_INPUT
    cache = JumpFunctionals(inputs.jumps)
    try:
        res = solvers.mutual_fund_combine(inputs.model, inputs.jumps, prem,
                                          args.eta1, args.eta2, args.eta_bar,
                                          cache=cache)
    except (CaseMismatch, NoRoot) as exc:
        print(f"mutual-fund combination failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    direct = solvers.solve_diff_rates(inputs.model, inputs.jumps, prem,
                                      Utility(args.eta_bar), cache=cache)
    disc = max(float(np.max(np.abs(res.policy.pi - direct.policy.pi))),
               abs(res.policy.kappa - direct.policy.kappa))
    lines = [f"delta = {res.delta:.10g}",
             f"combined_pi = {', '.join(f'{p:.10g}' for p in res.policy.pi)}",
             f"combined_kappa = {res.policy.kappa:.10g}",
             f"direct_pi = {', '.join(f'{p:.10g}' for p in direct.policy.pi)}",
             f"direct_kappa = {direct.policy.kappa:.10g}",
             f"cases = {res.endpoint_low.case_label}, "
             f"{direct.case_label}, {res.endpoint_high.case_label}",
             f"max_discrepancy = {disc:.6g}"]
    _emit(args, "\n".join(lines), t0)
    return EXIT_OK if disc <= MUTUAL_FUND_TOL else EXIT_VERIFY


def cmd_oracle(args) -> int:
    t0 = time.time()
    inputs = _load_inputs(args)
    grid = oracle.GridSpec(resolution=args.resolution,
                           refine_resolution=args.refine_resolution,
                           rounds=args.rounds)
    pol, val, bound = oracle.grid_maximize(inputs.model, inputs.jumps,
                                           inputs.friction, inputs.utility,
                                           grid)
    lines = [f"oracle_pi = {', '.join(f'{p:.8g}' for p in pol.pi)}",
             f"oracle_kappa = {pol.kappa:.8g}",
             f"oracle_value = {val:.10g}",
             f"resolution_bound = {bound:.4g}"]
    try:
        rep = solvers.solve(inputs.model, inputs.jumps, inputs.friction,
                            inputs.utility)
        gap = val - rep.objective.value
        lines += [f"solver_value = {rep.objective.value:.10g}",
                  f"gap = {gap:.4g}",
                  f"within_bound = {gap <= bound + 1e-12}"]
    except PikappaError as exc:
        lines.append(f"solver failed: {exc}")
    _emit(args, "\n".join(lines), t0)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, overrides: bool = True) -> None:
    p.add_argument("--model", required=True, help="model file or bundled "
                   "config name (a1, a2, b1, b2, c1, c2, table-etaR, "
                   "section5-example)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write output to this file")
    p.add_argument("--format", choices=("csv", "json", "text"),
                   default="text")
    p.add_argument("--threads", type=int, default=1)
    if overrides:
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--R", dest="R", type=float, default=None)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--b", type=float, default=None)
        p.add_argument("--mu", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pikappa",
        description="Optimal risky allocation and background-risk retention "
                    "under nonlinear portfolio frictions")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one model and print the policy")
    _add_common(p)
    p.add_argument("--thresholds", action="store_true",
                   help="print the risk-aversion thresholds eta_R, eta_r")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", help="solve along a parameter grid, write CSV")
    _add_common(p)
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="frm", type=float, required=True)
    p.add_argument("--to", dest="to", type=float, required=True)
    p.add_argument("--steps", type=int, required=True,
                   help="number of grid intervals")
    p.add_argument("--plot", default=None, help="also write an SVG line plot")
    p.add_argument("--y", default="pi_sum,kappa",
                   help="comma-separated plot columns")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo check of the policy")
    _add_common(p)
    p.add_argument("--paths", type=int, default=1_000_000)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--antithetic", action="store_true")
    p.add_argument("--pi", default=None,
                   help="comma-separated weights; skip the solver")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--dump", default=None,
                   help="write per-path debug CSV (path_id, N_T, G, V_T, "
                        "utility)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("verify", help="certificate + oracle + MC cross-checks")
    _add_common(p)
    p.add_argument("--mc-paths", dest="mc_paths", type=int, default=1_000_000)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("mutual-fund", help="two-fund combination vs direct solve")
    _add_common(p)
    p.add_argument("--eta1", type=float, required=True)
    p.add_argument("--eta2", type=float, required=True)
    p.add_argument("--eta-bar", dest="eta_bar", type=float, required=True)
    p.set_defaults(fn=cmd_mutual_fund)

    p = sub.add_parser("oracle", help="brute-force grid maximization")
    _add_common(p)
    p.add_argument("--resolution", type=int, default=401)
    p.add_argument("--refine-resolution", dest="refine_resolution", type=int,
                   default=2001)
    p.add_argument("--rounds", type=int, default=2)
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (FileNotFoundError, ValueError, ModelValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
