import csv
import io
import json

import pytest

from qrdeploy.bench import CSV_COLUMNS, BenchRecord, run_sweep, scaling_fit, write_csv, write_jsonl
from qrdeploy.exact import OracleBudget
from qrdeploy.placement import placement_from_solution, solution_to_dict
from qrdeploy.topology import all_pairs_distances, generate_random_topology
from qrdeploy.verify import verify


def test_path_sca_and_exact(path3):
    recs = run_sweep(path3, [100], [1], ["sca", "exact"], repeats=3)
    assert [r.algorithm for r in recs] == ["exact", "sca"]
    assert [r.repeaters_total for r in recs] == [1, 1]
    assert all(r.feasible and r.runtime >= 0 for r in recs)


def test_grid_size_and_order(fig6):
    recs = run_sweep(fig6, [130, 40, 60], [1], ["mca-flex", "sca", "mca-gp"], repeats=1)
    assert len(recs) == 9
    keys = [(r.algorithm, r.l_max) for r in recs]
    assert keys == sorted(keys)


def test_budget_gives_skipped_row():
    t = generate_random_topology(25, "geometric", seed=0)
    recs = run_sweep(t, [200], [1], ["exact", "sca"], repeats=1, budget=OracleBudget(max_candidate_nodes=10))
    skipped = [r for r in recs if r.algorithm == "exact"][0]
    assert not skipped.feasible and skipped.repeaters_total is None and "skipped" in skipped.note


def test_infeasible_row(path3):
    (rec,) = run_sweep(path3, [100], [2], ["sca"], repeats=1)
    assert not rec.feasible and rec.note.startswith("infeasible")


def test_records_reverify(fig6):
    o = all_pairs_distances(fig6)
    for r in run_sweep(fig6, [60, 100], [1, 2], repeats=1):
        if r.feasible:
            again = placement_from_solution(json.loads(json.dumps(solution_to_dict(r.placement))), fig6)
            assert verify(again, fig6, o).feasible


def test_counts_are_stable_across_runs(fig6):
    a = [r.repeaters_total for r in run_sweep(fig6, [50, 90], repeats=2)]
    b = [r.repeaters_total for r in run_sweep(fig6, [50, 90], repeats=2)]
    assert a == b


def test_csv_columns(fig6):
    buf = io.StringIO()
    write_csv(run_sweep(fig6, [100], repeats=1), buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4


def test_jsonl_fields(fig6):
    buf = io.StringIO()
    write_jsonl(run_sweep(fig6, [100], repeats=1), buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 3
    assert tuple(json.loads(lines[0])) == CSV_COLUMNS


def test_bad_arguments(path3):
    with pytest.raises(ValueError):
        run_sweep(path3, [], [1])
    with pytest.raises(ValueError):
        run_sweep(path3, [100], [1], ["nope"])


def _rec(n, runtime):
    return BenchRecord("t", "sca", 1.0, 1, 1, 0, runtime, 0.0, True, n_nodes=n)


def test_flat_series_exponent():
    assert scaling_fit([_rec(n, 0.5) for n in (50, 100, 200, 400)]) == pytest.approx(0.0, abs=1e-9)


def test_quadratic_series_exponent():
    assert scaling_fit([_rec(n, 1e-6 * n * n) for n in (50, 100, 200, 400)]) == pytest.approx(2.0)


def test_fit_needs_enough_sizes():
    with pytest.raises(ValueError):
        scaling_fit([_rec(50, 1.0), _rec(100, 2.0)])
