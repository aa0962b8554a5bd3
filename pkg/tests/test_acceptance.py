"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import random
import time

import numpy as np
import pytest

from structsynth import cli
from structsynth.bbmst import bbmst, brute_force_spanning, validate_solution
from structsynth.bench import checkerboard, descent_field, profile_candidate, small_instance, stairs_field
from structsynth.config import CheckerboardSpec, SolverParams
from structsynth.conflict import build_conflict_index
from structsynth.heightfield import HeightField, save_height_field
from structsynth.pipeline import EXIT_FEASIBLE, analyse, solve
from structsynth.terrain import build_region_map
from structsynth.waterfall import brute_force_structure, waterfall

from conftest import profile_setup
from test_terrain import flood_fill_partition, partition_of

P = SolverParams()


def record(log, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    log.append(line)
    assert ok, line


def test_1_waterfall_optimality(acceptance_log):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    cost_miss = none_miss = built = 0
    for _ in range(500):
        n = rng.randint(2, 8)
        top = rng.randint(5, 32)
        prof = [top, rng.randint(0, top - 5)] + [rng.randint(0, 32) for _ in range(n - 2)]
        f, m, c = profile_setup(prof, P)
        T = waterfall(c, f, m, P)
        B = brute_force_structure(c, f, m, P, max_len=n, max_h=6)
        none_miss += (T is None) != (B is None)
        if T is not None and B is not None:
            built += 1
            cost_miss += T.cost_blocks != B.cost_blocks
    dt = time.perf_counter() - t0
    record(acceptance_log, 1, cost_miss == 0 and none_miss == 0 and dt < 30,
           f"500 profiles, {built} structures, cost mismatches {cost_miss}, "
           f"none mismatches {none_miss}, {dt:.1f} s")


@pytest.fixture(scope="module")
def lemma3():
    return {"violations": 0, "searches": 0}


def test_2_bbmst_exactness(acceptance_log, lemma3):
    t0 = time.perf_counter()
    cost_miss = verdict_miss = feasible = with_conflicts = 0
    for seed in range(100):
        f, m, structs = small_instance(seed, P)
        conflicts = build_conflict_index(structs)
        with_conflicts += bool(conflicts.pair_conflicts)
        sol, stats = bbmst(m.regions, structs, conflicts, m, P, f=f)
        oracle = brute_force_spanning(m.regions, structs, f, m, P)
        lemma3["violations"] += stats.bound_violations
        lemma3["searches"] += 1
        feasible += oracle.feasible
        verdict_miss += sol.feasible != oracle.feasible
        cost_miss += sol.total_cost != oracle.total_cost
    dt = time.perf_counter() - t0
    record(acceptance_log, 2, cost_miss == 0 and verdict_miss == 0 and dt < 60,
           f"100 instances, {with_conflicts} with pair conflicts, {feasible} feasible, "
           f"cost mismatches {cost_miss}, verdict mismatches {verdict_miss}, {dt:.1f} s")


@pytest.fixture(scope="module")
def board_runs():
    spec = CheckerboardSpec(n=3, square_side=int(3 * P.L_B), seed=0)
    runs = []
    for k in range(200):
        f = checkerboard(spec, k)
        t0 = time.perf_counter()
        res = solve(f, P, timeout=60)
        runs.append((f, res, time.perf_counter() - t0))
    return runs


@pytest.mark.slow
def test_5_checkerboard(acceptance_log, board_runs, lemma3):
    invalid = confirmed = unconfirmed = timeouts = solved = infeasible = 0
    for f, res, dt in board_runs:
        lemma3["violations"] += res.stats.bound_violations
        lemma3["searches"] += 1
        if res.stats.timed_out or dt > 60:
            timeouts += 1
            continue
        if res.solution.feasible:
            solved += 1
            if validate_solution(res.chosen, f, res.regions, P) != (True, True):
                invalid += 1
        else:
            infeasible += 1
            if len(res.structures) <= 10:
                oracle = brute_force_spanning(res.regions.regions, res.structures, f, res.regions, P)
                if oracle.feasible:
                    unconfirmed += 1
                else:
                    confirmed += 1
    done = len(board_runs) - timeouts
    record(acceptance_log, 5, invalid == 0 and unconfirmed == 0 and done >= 0.9 * len(board_runs),
           f"{solved} solved, {infeasible} infeasible, {confirmed} small enough for the oracle and confirmed, "
           f"{timeouts} over 60 s, {invalid} invalid")


@pytest.mark.slow
def test_3_lemma3_bound(acceptance_log, lemma3, board_runs):
    # depends on the searches collected by criteria 2 and 5
    if lemma3["searches"] < 300:
        pytest.skip("run together with criteria 2 and 5")
    record(acceptance_log, 3, lemma3["violations"] == 0,
           f"{lemma3['searches']} searches, {lemma3['violations']} bound violations")


def test_4_stairs(acceptance_log):
    f = stairs_field(treads=7, riser=16.0)
    res = solve(f, P)
    costs = sorted(s.cost_blocks for s in res.chosen)
    valid = validate_solution(res.chosen, f, res.regions, P) == (True, True)
    ok = (res.exit_code == EXIT_FEASIBLE and len(costs) == 6 and set(costs) == {3} and valid)
    record(acceptance_log, 4, ok, f"{len(res.regions.regions)} regions, {len(costs)} structures, "
                                  f"costs {costs}, validated {valid}")


def test_6_region_labeling(acceptance_log):
    rng = np.random.default_rng(6)
    miss = 0
    for k in range(200):
        # alternate terraced fields (cliffs) with rough ones (steep nodes)
        if k % 2:
            z = rng.integers(0, 4, (12, 12)) * 5.0
        else:
            z = rng.uniform(0, 12, (12, 12))
        f = HeightField(z)
        miss += partition_of(build_region_map(f, P)) != flood_fill_partition(f, P)
    record(acceptance_log, 6, miss == 0, f"200 fields, {miss} mismatches")


def test_7_determinism(acceptance_log, tmp_path):
    path = tmp_path / "stairs.txt"
    save_height_field(stairs_field(), path)
    docs = []
    for k in range(2):
        sol, met = tmp_path / f"sol{k}.json", tmp_path / f"met{k}.json"
        code = cli.main(["solve", "--map", str(path), "--out", str(sol), "--metrics", str(met)])
        assert code == 0
        metrics = met.read_text().splitlines()
        masked = [ln for ln in metrics if "_time" not in ln]
        docs.append((sol.read_bytes(), masked))
    record(acceptance_log, 7, docs[0] == docs[1],
           "solution documents byte-identical, metrics identical outside timing fields")


def test_8_linearity(acceptance_log):
    p = SolverParams(max_structure_cells=4096)
    times = {}
    for n in (64, 128, 256):
        f = descent_field(n)
        m = analyse(f, p)
        c = profile_candidate(m)
        T = waterfall(c, f, m, p)
        assert T is not None and len(T.cells) >= n
        best = float("inf")
        for _ in range(7):
            t0 = time.perf_counter()
            waterfall(c, f, m, p)
            best = min(best, time.perf_counter() - t0)
        times[n] = best
    r1, r2 = times[128] / times[64], times[256] / times[128]
    record(acceptance_log, 8, r1 <= 2.5 and r2 <= 2.5,
           f"times {times[64]:.4f}/{times[128]:.4f}/{times[256]:.4f} s, ratios {r1:.2f}, {r2:.2f}")
