"""Command line entry point: ``philap analyze|check|solve|convergence --config FILE``.

Exit codes: 0 success (for ``solve``: verified solution), 1 configuration or
usage error, 2 iteration budget exhausted, 3 solver stopped without a
verified solution.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import probes
from .config import (ConfigError, ProblemConfig, build_phi, build_potential, build_problem, echo,
                     probe_arguments)
from .gfunc import (conjugate, conjugate_function, delta2_report, matuszewska_indices)
from .probes import _jsonable
from .solver import el_residual, minimize

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_UNVERIFIED = 0, 1, 2, 3


def analyze(cfg: ProblemConfig) -> dict:
    """Conjugate samples, growth conditions and indices of phi."""
    if not cfg.phi_descriptor:
        raise ConfigError("analyze needs a phi section (phi.family = ...)")
    phi = build_phi(cfg)
    radius = cfg.get("analysis.radius", 100.0)
    samples = cfg.get("analysis.samples", 2000)
    e1 = np.zeros(phi.dimension)
    e1[0] = 1.0
    table = []
    for s in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
        row = {"xi_norm": s, "numeric": float(conjugate(phi, s * e1, numeric=True))}
        if phi.conjugate_analytic is not None:
            row["analytic"] = float(conjugate(phi, s * e1))
        table.append(row)
    out = {"phi": phi.descriptor, "n_function": phi.n_function,
           "strictly_convex": phi.strictly_convex, "conjugate_table": table,
           "delta2_phi": delta2_report(phi, radius, samples).to_dict()}
    if phi.structure != "general":
        rep = delta2_report(conjugate_function(phi), radius, samples)
        out["delta2_conjugate"] = rep.to_dict()
    if phi.n_function:
        out["indices"] = matuszewska_indices(phi).to_dict()
    return out


def check(cfg: ProblemConfig, seed: int | None = None) -> dict:
    phi = build_phi(cfg)
    F = build_potential(cfg, phi.dimension)
    return probes.run_all(F, phi, **probe_arguments(cfg, seed)).to_dict()


def solve(cfg: ProblemConfig, seed: int | None = None):
    problem = build_problem(cfg, seed=seed)
    result = minimize(problem)
    report = result.to_dict()
    report["nodes"] = problem.nodes
    report["period"] = problem.period
    return problem, result, report


def convergence(cfg: ProblemConfig, levels: int, seed: int | None = None) -> tuple[dict, list]:
    """Solve on ``N * 2^k`` nodes for ``k = 0..levels``.

    ``consistency_residual`` re-evaluates the finest solution, restricted to
    each coarser grid, in that grid's discrete inclusion; it measures the
    truncation error of the scheme.
    """
    base = build_problem(cfg, seed=seed)
    rows, solutions = [], []
    for k in range(levels + 1):
        prob = base.with_nodes(base.nodes * 2 ** k)
        res = minimize(prob)
        solutions.append((prob, res))
        rows.append({"nodes": prob.nodes, "h": prob.step, "action": res.action,
                     "el_max": res.residual.max, "converged": res.converged,
                     "verified": res.verified})
    fine = solutions[-1][1].trajectory.values
    for k, (prob, _) in enumerate(solutions):
        stride = 2 ** (levels - k)
        rows[k]["consistency_residual"] = el_residual(prob, fine[::stride]).max
    orders = []
    acts = [r["action"] for r in rows]
    for k in range(len(acts) - 2):
        d1, d2 = abs(acts[k] - acts[k + 1]), abs(acts[k + 1] - acts[k + 2])
        orders.append(math.log2(d1 / d2) if d1 > 0 and d2 > 0 else math.inf if d2 == 0 and d1 > 0
                      else math.nan)
    res_orders = []
    cons = [r["consistency_residual"] for r in rows[:-1]]
    for a, b in zip(cons, cons[1:]):
        res_orders.append(math.log2(a / b) if a > 0 and b > 0 else math.nan)
    table = {"rows": rows, "action_orders": orders, "consistency_orders": res_orders,
             "empirical_order": orders[-1] if orders else None,
             "all_converged": all(r["converged"] for r in rows)}
    return table, solutions


def _dump(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="philap", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["analyze", "check", "solve", "convergence"])
    ap.add_argument("--config", required=True, help="problem configuration file")
    ap.add_argument("--out", help="directory for report.json and trajectory CSV files")
    ap.add_argument("--seed", type=int, help="overrides solver.seed and probes.seed")
    ap.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    ap.add_argument("--levels", type=int, default=3, help="refinement levels for convergence")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out) if args.out else None
    try:
        cfg = ProblemConfig.load(args.config)
        report: dict = {"config_echo": echo(cfg)}
        code = EXIT_OK
        csvs: dict[str, str] = {}
        if args.command == "analyze":
            report["analysis"] = analyze(cfg)
        elif args.command == "check":
            report["hypotheses"] = check(cfg, args.seed)
        elif args.command == "solve":
            _, result, rep = solve(cfg, args.seed)
            report["solve"] = rep
            csvs["trajectory.csv"] = result.trajectory.to_csv()
            if result.verified:
                code = EXIT_OK
            elif result.budget_exhausted:
                code = EXIT_BUDGET
            else:
                code = EXIT_UNVERIFIED
        else:
            if args.levels < 0:
                raise ConfigError("--levels must be nonnegative")
            table, sols = convergence(cfg, args.levels, args.seed)
            report["convergence"] = table
            for prob, res in sols:
                csvs[f"trajectory_N{prob.nodes}.csv"] = res.trajectory.to_csv()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = _dump(report)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(text)
        for name, body in csvs.items():
            (out_dir / name).write_text(body)
    if args.json:
        sys.stdout.write(text)
    else:
        _summary(args.command, report, code)
    return code


def _summary(command: str, report: dict, code: int) -> None:
    if command == "analyze":
        a = report["analysis"]
        idx = a.get("indices", {})
        print(f"phi={a['phi']} delta2={a['delta2_phi']['delta2_constant']} "
              f"alpha={idx.get('alpha')} beta={idx.get('beta')}")
    elif command == "check":
        h = report["hypotheses"]
        for name, r in h["results"].items():
            print(f"{name:9s} {r['status']}")
        print("theorems passing:", ", ".join(h["theorems_passing"]) or "none")
    elif command == "solve":
        s = report["solve"]
        print(f"action={s['action']:.12g} el_max={s['el_residual']['max']:.3e} "
              f"converged={s['converged']} verified={s['verified']} exit={code}")
    else:
        c = report["convergence"]
        for r in c["rows"]:
            print(f"N={r['nodes']:6d} action={r['action']:.12g} el_max={r['el_max']:.3e} "
                  f"consistency={r['consistency_residual']:.3e} converged={r['converged']}")
        print("empirical order:", c["empirical_order"])


if __name__ == "__main__":
    sys.exit(main())
