"""Solve a synthetic staircase and write the solution, metrics and a rendering.

    python scripts/stairs_demo.py --treads 7 --riser 16 --out-dir stairs_out
"""

import argparse
import sys
from pathlib import Path

from structsynth.bench import stairs_field
from structsynth.config import SolverParams
from structsynth.pipeline import dumps, metrics_doc, solution_doc, solve
from structsynth.render import render


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--treads", type=int, default=7)
    ap.add_argument("--riser", type=float, default=16.0)
    ap.add_argument("--depth", type=int, default=40)
    ap.add_argument("--out-dir", default="stairs_out")
    args = ap.parse_args()

    f = stairs_field(treads=args.treads, depth=args.depth, riser=args.riser)
    res = solve(f, SolverParams())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "solution.json").write_text(dumps(solution_doc(res)))
    (out / "metrics.json").write_text(dumps(metrics_doc(res.metrics)))
    render(f, res.regions, res.chosen, out / "stairs.ppm", [s.b for s in res.chosen])

    print(f"{len(res.regions.regions)} regions, {len(res.structures)} candidate structures")
    for s in res.chosen:
        print(f"  structure {s.id}: regions {s.region_a}->{s.region_b}, heights {s.heights}, "
              f"{s.cost_blocks} blocks")
    print(f"total {res.metrics.blocks_used} blocks, exit code {res.exit_code}")
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
