"""Run every sweep preset and write CSV (and optionally gnuplot) files.

    python scripts/reproduce_figures.py --out results --jobs 4 --plot
"""

import argparse
import time
from pathlib import Path

from wiretapkey.sweep import presets, write_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--plot", action="store_true")
    ap.add_argument("--only", nargs="*", help="subset of preset names")
    ap.add_argument("--no-timestamp", action="store_true")
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    table = presets()
    names = args.only or list(table)
    for name in names:
        t0 = time.perf_counter()
        path, rows = write_sweep(
            table[name], args.out / f"{name}.csv", timestamp=not args.no_timestamp, jobs=args.jobs, plot=args.plot
        )
        n_err = sum(1 for r in rows if r.error)
        print(f"{name:8s} {len(rows):5d} rows  {n_err} errors  {time.perf_counter() - t0:6.1f}s  -> {path}")


if __name__ == "__main__":
    main()
