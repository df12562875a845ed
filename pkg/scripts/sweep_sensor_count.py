"""uDOF and coupling leakage versus sensor count for all four arrays.

Writes udof.csv and leakage.csv into the output directory.
"""
import argparse
from pathlib import Path

from imisc import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, fname in (("udof-vs-q", "udof.csv"), ("leakage-vs-q", "leakage.csv")):
        res = ex.run(ex.preset(name))
        (out / fname).write_text(res.csv())
        print(f"wrote {out / fname} ({len(res.rows)} rows)")


if __name__ == "__main__":
    main()
