"""Monte Carlo RMSE sweeps over SNR, coupling strength and snapshot count.

Desk scale (50 trials) by default; ``--scale paper`` uses 500 trials and takes
hours on one core.
"""
import argparse
from pathlib import Path

from imisc import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--scale", choices=["desk", "paper"], default="desk")
    ap.add_argument("--only", choices=["snr", "coupling", "snapshots"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in [args.only] if args.only else ["snr", "coupling", "snapshots"]:
        cfg = ex.preset(name, args.scale)
        cfg.seed, cfg.workers = args.seed, args.workers
        res = ex.run(cfg)
        (out / f"{name}.csv").write_text(res.csv())
        print(f"wrote {out / name}.csv" + ("" if res.complete else " (some points had no successful trial)"))


if __name__ == "__main__":
    main()
