"""Write the (eta, r) phase diagram as CSV plus the separation curves as SVG.

    python scripts/phase_diagram.py --res 200 --out-dir results/
"""

import argparse
import collections
import csv
import pathlib

from l1bubble.cli import RunConfig, phase_csv, phase_svg
from l1bubble.closed_forms import eta_triple, r_triple


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--res", type=int, default=200)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = RunConfig("phase-diagram", res=args.res)
    text = phase_csv(cfg)
    (out / "phase_diagram.csv").write_text(text)
    (out / "phase_curves.svg").write_text(phase_svg(cfg))

    counts = collections.Counter(row["optimal"] for row in csv.DictReader(text.splitlines()))
    total = sum(counts.values())
    for label, n in sorted(counts.items()):
        print(f"{label:10s} {n:6d}  {n / total:6.2%}")
    print(f"triple point eta={eta_triple():.6f} r={r_triple():.6f}")
    print(f"wrote {out / 'phase_diagram.csv'} and {out / 'phase_curves.svg'}")


if __name__ == "__main__":
    main()
