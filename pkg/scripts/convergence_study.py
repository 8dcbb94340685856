"""Lattice minima against the Type III energy under refinement.

Volumes are held fixed while the cell size halves, so cell counts grow
fourfold per level.  Prints the absolute and relative gap per level.

    python scripts/convergence_study.py --na 50 --nb 5 --levels 3
"""

import argparse
import json
import time
from fractions import Fraction

from l1bubble.closed_forms import Params, energy_type3
from l1bubble.optimizer import AnnealSchedule, anneal


def study(na: int, nb: int, eta: float, levels: int, steps_per_cell: int, chains: int, seed: int = 0):
    target = float(energy_type3(Params(eta, na, nb)))
    rows = []
    for level in range(levels):
        h = Fraction(1, 2**level)
        n_a, n_b = na * 4**level, nb * 4**level
        schedule = AnnealSchedule.default(
            n_a, n_b, h, steps_per_temperature=steps_per_cell * (n_a + n_b),
            chains=chains, master_seed=seed,
        )
        t0 = time.perf_counter()
        res = anneal(n_a, n_b, eta, h, schedule)
        best = float(res.best_energy)
        rows.append({
            "h": str(h),
            "n_a": n_a,
            "n_b": n_b,
            "best": best,
            "candidates": {k: float(v) for k, v in res.candidate_energies.items()},
            "gap": best - target,
            "rel_gap": (best - target) / target,
            "seconds": time.perf_counter() - t0,
        })
    return target, rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--na", type=int, default=50)
    ap.add_argument("--nb", type=int, default=5)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--steps-per-cell", type=int, default=200)
    ap.add_argument("--chains", type=int, default=4)
    ap.add_argument("--json", help="also dump the rows to this file")
    args = ap.parse_args()

    target, rows = study(args.na, args.nb, args.eta, args.levels, args.steps_per_cell, args.chains)
    print(f"E_III = {target:.10g}")
    print(f"{'h':>6s} {'cells':>7s} {'best':>10s} {'gap':>10s} {'rel gap':>10s} {'time':>7s}")
    for row in rows:
        print(
            f"{row['h']:>6s} {row['n_a'] + row['n_b']:7d} {row['best']:10.5f} "
            f"{row['gap']:10.5f} {row['rel_gap']:10.3e} {row['seconds']:6.1f}s"
        )
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"E_III": target, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
