import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_distances, brute_route_count, make_topology
from qrdeploy.exceptions import UnknownNodeError
from qrdeploy.placement import empty_placement, extended_distances, repeater_placement, sites_on_link, Placement, CenterSet
from qrdeploy.sca import run_sca_robust
from qrdeploy.topology import all_pairs_distances, augment_long_links
from qrdeploy.verify import disjoint_routes, route_count, survive_failures, verify


def place(nodes, l_max=100, k=1):
    return repeater_placement(nodes, algorithm="manual", l_max=l_max, k=k)


def test_single_center_path(path3):
    assert verify(place(["B"]), path3, all_pairs_distances(path3)).feasible


def test_empty_path_reports_pair(path3):
    r = verify(place([]), path3, all_pairs_distances(path3))
    assert not r.feasible
    assert r.failing_pair == ("ghost(A)", "ghost(C)")
    assert r.notes


def test_opposite_corners_of_cycle(cycle4):
    # B and D are 200 apart and no repeater sits between them, so {B, D}
    # gives them zero routes even though (A, C) gets two.
    o = all_pairs_distances(cycle4)
    p = place(["B", "D"], k=2)
    r = verify(p, cycle4, o)
    assert not r.feasible
    assert r.failing_pair == ("ghost(B)", "ghost(D)")
    assert route_count("A", "C", p, cycle4, o) == 2
    assert route_count("B", "D", p, cycle4, o) == 0
    assert not survive_failures(p, cycle4, o)


def test_full_cycle_is_two_robust(cycle4):
    o = all_pairs_distances(cycle4)
    p = place(["A", "B", "C", "D"], k=2)
    assert verify(p, cycle4, o).feasible
    assert survive_failures(p, cycle4, o)
    assert not verify(p, cycle4, o, k=3).feasible


def test_sca_robust_output_survives(cycle4):
    o = all_pairs_distances(cycle4)
    p = run_sca_robust(cycle4, o, 100, 2)
    assert verify(p, cycle4, o).feasible
    assert survive_failures(p, cycle4, o)


def test_cut_vertex_cannot_survive(path3):
    o = all_pairs_distances(path3)
    assert not survive_failures(place(["B"], k=2), path3, o)
    with pytest.raises(ValueError):
        survive_failures(place(["B"], k=1), path3, o)


def test_direct_link_is_one_route():
    t = make_topology([("A", "B", 50)])
    o = all_pairs_distances(t)
    assert verify(place([]), t, o).feasible
    assert not verify(place([], k=2), t, o).feasible
    assert verify(place(["A"], k=2), t, o).feasible


def test_k1_report_has_no_route_table(path3):
    assert verify(place(["B"]), path3, all_pairs_distances(path3)).min_routes == {}


def test_route_table_for_k2(cycle4):
    r = verify(place(["A", "B", "C", "D"], k=2), cycle4, all_pairs_distances(cycle4))
    assert set(r.min_routes.values()) == {2}
    assert len(r.min_routes) == 6


def test_unknown_repeater(path3):
    with pytest.raises(UnknownNodeError):
        verify(place(["Q"]), path3, all_pairs_distances(path3))


def test_synthetic_sites_bridge_long_link():
    t = make_topology([("A", "B", 250)], "long")
    o = all_pairs_distances(t)
    sites = sites_on_link(t, "A", "B", 100)
    assert len(sites) == 2
    p = Placement(CenterSet(), (), tuple(sites), "manual", 100.0, 1)
    assert verify(p, t, o).feasible
    assert not verify(Placement(CenterSet(), (), tuple(sites[:1]), "manual", 100.0, 1), t, o).feasible


def test_extended_distances_match_augmented_graph():
    # independent oracle: materialize the sites as real nodes and rerun APSP
    t = make_topology([("A", "B", 300), ("B", "C", 40), ("A", "D", 70)], "ext")
    sites = sites_on_link(t, "A", "B", 100)
    ids, dist = extended_distances(t, all_pairs_distances(t), sites)
    aug = augment_long_links(t, 100)
    ref = all_pairs_distances(aug)
    rename = dict(zip([s.id for s in sites], sorted(set(aug.node_ids) - set(t.node_ids))))
    for i, u in enumerate(ids):
        for j, v in enumerate(ids):
            assert dist[i, j] == pytest.approx(ref.d(rename.get(u, u), rename.get(v, v)))


# -- max-flow core -----------------------------------------------------------------

def test_disjoint_routes_basic():
    adj = np.array([[1, 0], [0, 1]], dtype=bool)
    assert disjoint_routes(np.array([1, 1], bool), np.array([1, 1], bool), adj) == 2
    assert disjoint_routes(np.array([1, 0], bool), np.array([0, 1], bool), adj) == 0
    assert disjoint_routes(np.array([1, 1], bool), np.array([1, 1], bool), adj, cap=1) == 1


@st.composite
def instances(draw):
    n = draw(st.integers(3, 12))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    ids = [f"v{i:02d}" for i in range(n)]
    edges = {}
    for i in range(1, n):
        edges[(ids[int(rng.integers(0, i))], ids[i])] = int(rng.integers(10, 60))
    for _ in range(int(rng.integers(0, n))):
        a, b = sorted(rng.choice(n, 2, replace=False))
        edges.setdefault((ids[a], ids[b]), int(rng.integers(10, 60)))
    t = make_topology([(a, b, w) for (a, b), w in edges.items()])
    reps = sorted(draw(st.sets(st.sampled_from(ids), max_size=min(n, 6))))
    l_max = draw(st.sampled_from([40.0, 60.0, 90.0]))
    return t, reps, l_max


@settings(max_examples=60, deadline=None)
@given(instances())
def test_route_counts_match_enumeration(inst):
    t, reps, l_max = inst
    o = all_pairs_distances(t)
    brute = brute_distances(t)
    p = place(reps, l_max=l_max)
    for a, b in itertools.combinations(t.site_ids, 2):
        assert route_count(a, b, p, t, o) == brute_route_count(brute, a, b, reps, l_max)


@settings(max_examples=60, deadline=None)
@given(instances(), st.integers(1, 3))
def test_feasibility_matches_enumeration(inst, k):
    t, reps, l_max = inst
    o = all_pairs_distances(t)
    brute = brute_distances(t)
    expected = all(brute_route_count(brute, a, b, reps, l_max) >= k
                   for a, b in itertools.combinations(t.site_ids, 2))
    assert verify(place(reps, l_max=l_max, k=k), t, o).feasible == expected


@settings(max_examples=60, deadline=None)
@given(instances(), st.integers(2, 3))
def test_robustness_is_monotone_in_k(inst, k):
    t, reps, l_max = inst
    o = all_pairs_distances(t)
    p = place(reps, l_max=l_max, k=k)
    if verify(p, t, o).feasible:
        assert verify(p, t, o, k=k - 1).feasible
        assert survive_failures(p, t, o)


@settings(max_examples=60, deadline=None)
@given(instances(), st.integers(1, 2))
def test_adding_a_repeater_keeps_feasibility(inst, k):
    t, reps, l_max = inst
    o = all_pairs_distances(t)
    if not verify(place(reps, l_max=l_max, k=k), t, o).feasible:
        return
    for extra in t.site_ids:
        if extra not in reps:
            assert verify(place(reps + [extra], l_max=l_max, k=k), t, o).feasible


def test_empty_placement_helper(path3):
    p = empty_placement("sca", 300, 1, "path3")
    assert verify(p, path3, all_pairs_distances(path3)).feasible
