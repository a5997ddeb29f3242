"""Recompute the M3 and c1 tables at the standard lambda values and write them as CSV.

Usage: python scripts/reproduce_tables.py [--out-dir results] [--restarts 500] [--seed 0] [--workers 1]
"""
import argparse
from pathlib import Path

from cavcal import cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="results")
    p.add_argument("--restarts", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    common = ["--restarts", str(args.restarts), "--seed", str(args.seed), "--workers", str(args.workers)]
    for name in ("table1", "table2"):
        path = out / f"{name}.csv"
        code = cli.main([name, *common, "--out", str(path)])
        if code:
            raise SystemExit(code)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
