"""Probe the hypotheses and solve the p = 3 Laplacian system and the (3, 3) block example.

Usage: python scripts/laplacian_example.py [--out DIR]
"""

import argparse
import json
from pathlib import Path

from philap import cli
from philap.config import ProblemConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, help="write the reports here")
    args = ap.parse_args()

    reports = {}
    for name in ("p_laplacian", "pq_laplacian_33"):
        cfg = ProblemConfig.load(CONFIGS / f"{name}.cfg")
        hyp = cli.check(cfg)
        _, result, solve = cli.solve(cfg)
        reports[name] = {"hypotheses": hyp, "solve": solve}
        status = {h: r["status"] for h, r in hyp["results"].items() if r["status"] != "not-probed"}
        print(f"{name}: {status}")
        print(f"  theorems passing: {', '.join(hyp['theorems_passing']) or 'none'}")
        print(f"  action {result.action:.10g}, EL max residual {result.residual.max:.3e}, "
              f"verified {result.verified}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "laplacian_example.json").write_text(cli._dump(reports))


if __name__ == "__main__":
    main()
