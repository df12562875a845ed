"""Closed-form and coverage checks; prints one line per check and a failure count."""
import argparse

from imisc import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-q", type=int, default=200)
    ap.add_argument("--appendix-q", default="10,16,22,28,34")
    args = ap.parse_args()
    qs = [int(q) for q in args.appendix_q.split(",")]
    rep = ex.run_verifications(range(10, args.max_q + 1), qs)
    for ln in rep.lines:
        if not ln.passed:
            print(ln.text())
    print(f"{len(rep.lines)} checks, {rep.failures} failures")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
