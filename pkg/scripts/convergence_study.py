"""Grid-refinement study: action and consistency residual under N -> 2N.

Usage: python scripts/convergence_study.py [CONFIG] [--levels K]
"""

import argparse
from pathlib import Path

from philap import cli
from philap.config import ProblemConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", default=str(CONFIGS / "smooth_benchmark.cfg"))
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--nodes", type=int, help="coarsest grid (defaults to the config value)")
    args = ap.parse_args()

    cfg = ProblemConfig.load(args.config)
    if args.nodes:
        cfg = cfg.with_values(problem__nodes=args.nodes)
    table, _ = cli.convergence(cfg, args.levels)
    print(f"{'N':>7} {'action':>20} {'EL max':>10} {'consistency':>12} converged")
    for r in table["rows"]:
        print(f"{r['nodes']:7d} {r['action']:20.12g} {r['el_max']:10.3e} "
              f"{r['consistency_residual']:12.3e} {r['converged']}")
    print("action orders:", ", ".join(f"{o:.3f}" for o in table["action_orders"]))
    print("consistency orders:", ", ".join(f"{o:.3f}" for o in table["consistency_orders"]))


if __name__ == "__main__":
    main()
