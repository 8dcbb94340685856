"""Run the inequality sweeps and write one report per sweep.

    python scripts/verify_lemmas.py --out-dir results/ [--res 10]
"""

import argparse
import pathlib
import sys
import time

from l1bubble.cli import run_sweeps, sweep_grids


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--res", type=int, default=None, help="coarser eta/r resolution")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grids = sweep_grids(args.res, args.seed)
    failed = False
    for name in ("extra", "hfun", "psum", "appendix"):
        t0 = time.perf_counter()
        rep = run_sweeps(name, grids)[name]
        (out / f"sweep_{name}.txt").write_text(rep.to_text())
        failed |= not rep.ok
        print(
            f"{name:9s} checked {rep.checked:9d} violations {rep.violation_count:6d} "
            f"min_margin {rep.min_margin:+.3e}  {time.perf_counter() - t0:6.1f}s"
        )
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
