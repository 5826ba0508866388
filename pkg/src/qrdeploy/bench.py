"""Parameter sweeps: repeater counts and runtimes per algorithm, l_max and k."""

from __future__ import annotations

import csv
import json
import logging
import statistics
import time
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .exact import OracleBudget, exact_min_placement
from .exceptions import BudgetExceededError, InfeasibleError
from .mca import run_mca
from .placement import Placement
from .sca import run_sca, run_sca_robust
from .topology import DistanceOracle, Topology, all_pairs_distances
from .validation import check_algorithm

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("topology", "algorithm", "l_max_km", "k", "repeaters_total",
               "repeaters_synthetic", "runtime_s", "apsp_s", "feasible")


@dataclass
class BenchRecord:
    topology: str
    algorithm: str
    l_max: float
    k: int
    repeaters_total: int | None
    repeaters_new_synthetic: int | None
    runtime: float | None
    apsp: float
    feasible: bool
    n_nodes: int = 0
    note: str = ""
    placement: Placement | None = field(default=None, repr=False, compare=False)

    def as_row(self) -> dict:
        return {
            "topology": self.topology,
            "algorithm": self.algorithm,
            "l_max_km": self.l_max,
            "k": self.k,
            "repeaters_total": self.repeaters_total,
            "repeaters_synthetic": self.repeaters_new_synthetic,
            "runtime_s": self.runtime,
            "apsp_s": self.apsp,
            "feasible": self.feasible,
        }


def solve(t: Topology, oracle: DistanceOracle, algorithm: str, l_max: float, k: int = 1,
          budget: OracleBudget | None = None) -> Placement:
    """Dispatch to a placement algorithm by name."""
    algorithm = check_algorithm(algorithm)
    if algorithm == "sca":
        return run_sca(t, oracle, l_max) if k == 1 else run_sca_robust(t, oracle, l_max, k)
    if algorithm == "exact":
        return exact_min_placement(t, oracle, l_max, k, budget)
    return run_mca(t, oracle, l_max, k, variant=algorithm.split("_")[1])


def _median_time(fn, repeats: int):
    times, results = [], []
    for _ in range(repeats):
        start = time.perf_counter()
        results.append(fn())
        times.append(time.perf_counter() - start)
    return statistics.median(times), results


def run_sweep(t: Topology, l_max_list: Sequence[float], k_list: Sequence[int] = (1,),
              algorithms: Sequence[str] = ("sca", "mca_gp", "mca_flex"), repeats: int = 3,
              budget: OracleBudget | None = None) -> list[BenchRecord]:
    """One record per (algorithm, l_max, k); runtime is the median of ``repeats`` runs."""
    if not l_max_list or not k_list or not algorithms:
        raise ValueError("l_max_list, k_list and algorithms must be non-empty")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    algorithms = [check_algorithm(a) for a in algorithms]
    apsp, oracles = _median_time(lambda: all_pairs_distances(t), repeats)
    oracle = oracles[0]
    n_nodes = len(t.site_ids)

    records = []
    for algorithm in algorithms:
        for l_max in l_max_list:
            for k in k_list:
                base = dict(topology=t.name, algorithm=algorithm, l_max=float(l_max), k=int(k),
                            apsp=apsp, n_nodes=n_nodes)
                try:
                    runtime, placements = _median_time(
                        lambda: solve(t, oracle, algorithm, l_max, k, budget), repeats)
                except BudgetExceededError as exc:
                    logger.warning("skipping %s at l_max=%g k=%d: %s", algorithm, l_max, k, exc)
                    records.append(BenchRecord(repeaters_total=None, repeaters_new_synthetic=None,
                                               runtime=None, feasible=False, note=f"skipped: {exc}", **base))
                    continue
                except InfeasibleError as exc:
                    records.append(BenchRecord(repeaters_total=None, repeaters_new_synthetic=None,
                                               runtime=None, feasible=False, note=f"infeasible: {exc}", **base))
                    continue
                counts = {p.n_repeaters for p in placements}
                if len(counts) != 1:
                    raise RuntimeError(f"{algorithm} gave differing repeater counts across repeats: {counts}")
                p = placements[0]
                records.append(BenchRecord(repeaters_total=p.n_repeaters,
                                           repeaters_new_synthetic=p.n_synthetic(t),
                                           runtime=runtime, feasible=True, placement=p, **base))
    return sorted(records, key=lambda r: (r.topology, r.algorithm, r.l_max, r.k))


def write_csv(records: Iterable[BenchRecord], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        row = r.as_row()
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def write_jsonl(records: Iterable[BenchRecord], stream: IO[str]) -> None:
    for r in records:
        stream.write(json.dumps(r.as_row()) + "\n")


def scaling_fit(records: Iterable[BenchRecord], *, min_sizes: int = 4) -> float:
    """Least-squares slope of log(runtime) against log(node count).

    Runtimes at the same size are reduced to their median first.
    """
    by_size: dict[int, list[float]] = {}
    for r in records:
        if r.runtime is None or r.n_nodes <= 0:
            continue
        by_size.setdefault(r.n_nodes, []).append(r.runtime)
    if len(by_size) < min_sizes:
        raise ValueError(f"scaling fit needs at least {min_sizes} distinct sizes, got {len(by_size)}")
    sizes = np.array(sorted(by_size), dtype=float)
    times = np.array([max(statistics.median(by_size[int(s)]), 1e-9) for s in sizes])
    slope, _ = np.polyfit(np.log(sizes), np.log(times), 1)
    return float(slope)
