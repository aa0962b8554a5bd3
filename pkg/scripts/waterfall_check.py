"""Compare the structure synthesiser with exhaustive search and time long marches.

    python scripts/waterfall_check.py --profiles 500
"""

import argparse
import random
import sys
import time

from structsynth.bench import descent_field, profile_candidate, profile_field
from structsynth.config import SolverParams
from structsynth.pipeline import analyse
from structsynth.waterfall import brute_force_structure, waterfall


def oracle(n_profiles: int, seed: int) -> int:
    p = SolverParams()
    rng = random.Random(seed)
    misses = 0
    for _ in range(n_profiles):
        n = rng.randint(2, 8)
        top = rng.randint(5, 32)
        prof = [top, rng.randint(0, top - 5)] + [rng.randint(0, 32) for _ in range(n - 2)]
        f = profile_field(prof)
        m = analyse(f, p)
        c = profile_candidate(m)
        a = waterfall(c, f, m, p)
        b = brute_force_structure(c, f, m, p, max_len=n)
        ca = None if a is None else a.cost_blocks
        cb = None if b is None else b.cost_blocks
        if ca != cb:
            misses += 1
            print(f"mismatch {prof}: waterfall {ca}, exhaustive {cb}")
    print(f"{n_profiles} profiles, {misses} mismatches")
    return misses


def timing(lengths) -> None:
    p = SolverParams(max_structure_cells=4096)
    last = None
    for n in lengths:
        f = descent_field(n)
        m = analyse(f, p)
        c = profile_candidate(m)
        best = float("inf")
        for _ in range(5):
            t0 = time.perf_counter()
            T = waterfall(c, f, m, p)
            best = min(best, time.perf_counter() - t0)
        ratio = "" if last is None else f"  x{best / last:.2f}"
        print(f"n={n:5d}  cells={len(T.cells):5d}  {best * 1e3:8.2f} ms{ratio}")
        last = best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profiles", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lengths", type=int, nargs="+", default=[64, 128, 256, 512])
    args = ap.parse_args()
    misses = oracle(args.profiles, args.seed)
    timing(args.lengths)
    return 1 if misses else 0


if __name__ == "__main__":
    sys.exit(main())
