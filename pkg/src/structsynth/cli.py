"""Command line entry point: ``structsynth solve`` and ``structsynth bench``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .bench import run_bench
from .config import CheckerboardSpec, ParameterError, SolverParams
from .heightfield import load_height_field
from .pipeline import EXIT_INPUT, dumps, metrics_doc, preprocess, solution_doc, solve
from .pnm import FormatError
from .render import render

log = logging.getLogger("structsynth")


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("STRUCTSYNTH_THREADS")
    return int(env) if env else 1


def _add_params(ap: argparse.ArgumentParser) -> None:
    d = SolverParams()
    ap.add_argument("--cell-size", type=float, default=None, help="cm per grid cell")
    ap.add_argument("--lb", type=float, default=d.L_B, help="block side (cm)")
    ap.add_argument("--dz-cliff", type=float, default=d.dz_cliff, help="cliff threshold (cm)")
    ap.add_argument("--k-steep", type=float, default=d.k_steep, help="slope threshold (cm/cm)")
    ap.add_argument("--window", type=float, default=d.d, help="slope averaging window (cm)")
    ap.add_argument("--alpha", type=float, default=d.alpha, help="buildability fraction of L_B")
    ap.add_argument("--min-region-side", type=float, default=d.min_region_side)
    ap.add_argument("--max-cells", type=int, default=d.max_structure_cells)
    ap.add_argument("--timeout", type=float, default=d.timeout, help="search budget (s)")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker processes for structure synthesis (env STRUCTSYNTH_THREADS)")
    ap.add_argument("--seed", type=int, default=0)


def _params(args) -> SolverParams:
    return SolverParams(L_B=args.lb, dz_cliff=args.dz_cliff, k_steep=args.k_steep, d=args.window,
                        alpha=args.alpha, min_region_side=args.min_region_side,
                        max_structure_cells=args.max_cells, timeout=args.timeout)


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_solve(args) -> int:
    try:
        p = _params(args)
        f = load_height_field(args.map, cell_size=args.cell_size, z_scale=args.z_scale)
        f = preprocess(f, args.median_filter, args.quantize)
    except (FormatError, ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    res = solve(f, p, threads=_threads(args.threads))
    _write(args.out, dumps(solution_doc(res)))
    if args.metrics:
        _write(args.metrics, dumps(metrics_doc(res.metrics)))
    if args.render:
        try:
            render(f, res.regions, res.chosen, args.render, [s.b for s in res.chosen])
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    log.info("exit %d: %d structures, %d blocks", res.exit_code, len(res.chosen), res.metrics.blocks_used)
    return res.exit_code


def cmd_bench(args) -> int:
    try:
        p = _params(args)
        spec = CheckerboardSpec(n=args.board_n, square_side=args.square_side,
                                height_max=args.height_max, increment=args.increment,
                                seed=args.seed, cell_size=args.cell_size or 1.0, L_B=p.L_B)
        if args.trials < 1:
            raise ParameterError("--trials must be >= 1")
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc = run_bench(spec, args.trials, p, timeout=args.timeout, threads=_threads(args.threads))
    _write(args.out, dumps(doc))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="structsynth", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one map")
    s.add_argument("--map", required=True, help="text grid or PGM height map")
    s.add_argument("--z-scale", type=float, default=1.0, help="cm per map unit")
    s.add_argument("--median-filter", type=int, nargs="?", const=3, default=None, metavar="W")
    s.add_argument("--quantize", type=int, default=None, metavar="K")
    s.add_argument("--out", default="-", help="solution document (default stdout)")
    s.add_argument("--render", default=None, help="PPM rendering path")
    s.add_argument("--metrics", default=None, help="metrics document path")
    _add_params(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="random checkerboard benchmark")
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--board-n", type=int, default=3)
    b.add_argument("--square-side", type=int, default=None, help="cells (default 6 L_B)")
    b.add_argument("--height-max", type=float, default=None, help="cm (default 3 L_B)")
    b.add_argument("--increment", type=float, default=1.0, help="height step (cm)")
    b.add_argument("--out", default="-", help="summary document (default stdout)")
    _add_params(b)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
