"""Command-line entry point.

Exit codes: 0 feasible/success, 2 model infeasible, 1 usage/IO/budget error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .bench import run_sweep, solve, write_csv, write_jsonl
from .exact import OracleBudget, exact_min_placement
from .exceptions import BudgetExceededError, InfeasibleError, TopologyError, UnknownNodeError
from .placement import read_solution, write_solution
from .topology import (all_pairs_distances, augment_long_links, dump_topology,
                       generate_random_topology, read_topology, write_topology)
from .validation import check_algorithm, check_k, check_l_max
from .verify import verify

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

logger = logging.getLogger("qrdeploy")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; 2 is reserved for infeasibility here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        return check_l_max(float(text))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        return check_k(int(text))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    return [_positive_float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [_positive_int(x) for x in text.split(",") if x.strip()]


def _algo(text: str) -> str:
    try:
        return check_algorithm(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _algo_list(text: str) -> list[str]:
    return [_algo(x.strip()) for x in text.split(",") if x.strip()]


def _budget(args) -> OracleBudget:
    return OracleBudget(args.max_candidate_nodes, args.max_subsets)


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-candidate-nodes", type=int, default=OracleBudget.max_candidate_nodes,
                   help="exact search refuses topologies with more nodes than this")
    p.add_argument("--max-subsets", type=int, default=OracleBudget.max_subsets)


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- commands ---------------------------------------------------------------------

def cmd_solve(args) -> int:
    t = read_topology(args.topology)
    oracle = all_pairs_distances(t)
    start = time.perf_counter()
    try:
        placement = solve(t, oracle, args.algo, args.lmax, args.k, _budget(args))
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    elapsed = time.perf_counter() - start
    if args.out:
        write_solution(placement, args.out)
    print(f"repeaters: {placement.n_repeaters} "
          f"(centers {len(placement.centers)}, intermediates {len(placement.intermediates)}, "
          f"synthetic {len(placement.synthetic_added)})")
    print(f"runtime_s: {elapsed:.6f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    t = read_topology(args.topology)
    placement = read_solution(args.solution, t)
    if placement.topology_name and placement.topology_name != t.name:
        raise _UsageError(f"solution is for topology {placement.topology_name!r}, "
                          f"not {t.name!r}")
    oracle = all_pairs_distances(t)
    l_max = placement.l_max if args.lmax is None else args.lmax
    k = placement.k if args.k is None else args.k
    report = verify(placement, t, oracle, l_max, k)
    if report.feasible:
        print(f"feasible: {placement.n_repeaters} repeaters, l_max={l_max:g}, k={k}")
        return EXIT_OK
    a, b = report.failing_pair
    print(f"infeasible: {a} {b}", file=sys.stderr)
    return EXIT_INFEASIBLE


def cmd_augment(args) -> int:
    t = read_topology(args.topology)
    out = augment_long_links(t, args.lmax)
    _emit(dump_topology(out), args.out)
    added = len(out.node_ids) - len(t.node_ids)
    print(f"added {added} synthetic node(s)", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    kwargs = {}
    if args.side_km is not None:
        kwargs["side_km"] = args.side_km
    if args.radius_km is not None:
        kwargs["radius_km"] = args.radius_km
    if args.edge_prob is not None:
        kwargs["edge_prob"] = args.edge_prob
    t = generate_random_topology(args.n, args.model, args.seed, **kwargs)
    _emit(dump_topology(t), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    t = read_topology(args.topology)
    records = run_sweep(t, args.lmax_list, args.k_list, args.algos, args.repeats, _budget(args))
    writer = write_jsonl if args.format == "jsonl" else write_csv
    if args.out in (None, "-"):
        writer(records, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            writer(records, fh)
    return EXIT_OK


def cmd_compare(args) -> int:
    """Heuristics against the exact optimum at one (l_max, k).

    Long links are split first so the exact search, which only uses
    existing nodes, sees the same candidate sites as the heuristics.
    """
    raw = read_topology(args.topology)
    t = augment_long_links(raw, args.lmax)
    oracle = all_pairs_distances(t)
    try:
        best = exact_min_placement(t, oracle, args.lmax, args.k, _budget(args))
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    rows = [{"algorithm": "exact", "repeaters_total": best.n_repeaters, "gap": 0}]
    for algo in args.algos:
        try:
            p = solve(t, oracle, algo, args.lmax, args.k)
        except InfeasibleError:
            rows.append({"algorithm": algo, "repeaters_total": None, "gap": None})
            continue
        rows.append({"algorithm": algo, "repeaters_total": p.n_repeaters,
                     "gap": p.n_repeaters - best.n_repeaters})
    _emit(json.dumps({"topology": t.name, "l_max_km": args.lmax, "k": args.k,
                      "synthetic_nodes_added": len(t.node_ids) - len(raw.node_ids), "results": rows},
                     indent=2) + "\n", args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrdeploy", description="Quantum repeater placement planner.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="compute a repeater placement")
    p.add_argument("--topology", required=True)
    p.add_argument("--lmax", type=_positive_float, required=True, help="max hop distance in km")
    p.add_argument("--algo", type=_algo, default="sca", help="sca | mca-gp | mca-flex | exact")
    p.add_argument("--k", type=_positive_int, default=1, help="required disjoint routes")
    p.add_argument("--out", help="solution JSON path")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution file")
    p.add_argument("--topology", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--lmax", type=_positive_float, help="defaults to the solution's value")
    p.add_argument("--k", type=_positive_int, help="defaults to the solution's value")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("augment", help="split links longer than l_max")
    p.add_argument("--topology", required=True)
    p.add_argument("--lmax", type=_positive_float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("gen", help="generate a seeded random topology")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--model", default="geometric", choices=["unit", "unit_complete_like", "geometric"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--side-km", type=_positive_float)
    p.add_argument("--radius-km", type=_positive_float)
    p.add_argument("--edge-prob", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="sweep algorithms over l_max and k")
    p.add_argument("--topology", required=True)
    p.add_argument("--lmax-list", type=_float_list, required=True)
    p.add_argument("--k-list", type=_int_list, default=[1])
    p.add_argument("--algos", type=_algo_list, default=["sca", "mca_gp", "mca_flex"])
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--out")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="heuristics versus the exact optimum")
    p.add_argument("--topology", required=True)
    p.add_argument("--lmax", type=_positive_float, required=True)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--algos", type=_algo_list, default=["sca", "mca_gp", "mca_flex"])
    p.add_argument("--out")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
    except (_UsageError, TopologyError, UnknownNodeError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
