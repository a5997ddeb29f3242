"""Write the data behind the four supremum figures as CSV (fig1..fig4).

fig1/fig3 use the ascent (|G| and G-), fig2/fig4 the grid method. The G- grid run at
its default 1e8 samples takes a few minutes; pass --n-neg to shrink it for a preview.
"""
import argparse
from pathlib import Path

from cavcal import cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="results")
    p.add_argument("--which", default="fig1,fig2,fig3,fig4")
    p.add_argument("--restarts", type=int, default=500)
    p.add_argument("--n-neg", type=int, default=None, help="sample count for fig4 (default 1e8)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.which.split(","):
        argv = [name, "--restarts", str(args.restarts), "--seed", str(args.seed), "--workers", str(args.workers)]
        if name == "fig4" and args.n_neg is not None:
            argv += ["--n", str(args.n_neg)]
        path = out / f"{name}.csv"
        code = cli.main(argv + ["--out", str(path)])
        if code:
            raise SystemExit(code)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
