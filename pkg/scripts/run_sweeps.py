"""Default (t, p) grids for both benchmark problems, ideal-polynomial mode.

Writes ``results/<problem>.csv`` plus the ``_qmia.csv`` and ``_meta.json``
siblings and prints the best QGFA and QMIA errors.

    python scripts/run_sweeps.py [--out results] [--workers 4]
"""
import argparse
import math
from pathlib import Path

from qgfa.sweep import SweepConfig, emit_csv, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--problems", nargs="+", default=["tensile", "cantilever"])
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for problem in args.problems:
        cfg = SweepConfig(problem=problem, workers=args.workers, timeout=None if args.workers == 1 else 300.0)
        result = run_sweep(cfg)
        emit_csv(result, out / f"{problem}.csv")
        best = min((r for r in result.rows if not math.isnan(r.R)), key=lambda r: r.R)
        best_inv = min(q.R_inv for q in result.qmia_rows)
        print(f"{problem}: kappa={result.metadata['kappa']:.4f} best R={best.R:.3e} "
              f"(t={best.t:g}, p={best.p}) best R_inv={best_inv:.3e} errors={len(result.metadata['errors'])}")


if __name__ == "__main__":
    main()
