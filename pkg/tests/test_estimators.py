import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from conftest import make_topology
from qrdeploy.estimators import ExactPlacer, GhostAttacher, LongLinkAugmenter, MCAPlacer, SCAPlacer
from qrdeploy.exceptions import InfeasibleError
from qrdeploy.topology import topology_to_dict, dump_topology


def test_sca_fit_predict(path3):
    est = SCAPlacer(l_max=100).fit(path3)
    assert est.repeaters_ == ("B",) and est.n_repeaters_ == 1
    assert est.report_.feasible
    assert est.predict().tolist() == [False, True, False]


def test_accepts_dict_path_and_bytes(tmp_path, path3):
    p = tmp_path / "t.json"
    p.write_text(dump_topology(path3))
    for X in (topology_to_dict(path3), str(p), p, dump_topology(path3).encode()):
        assert SCAPlacer(l_max=100).fit_predict(X).tolist() == [False, True, False]


def test_get_set_params_and_clone():
    est = MCAPlacer(l_max=70, k=2, variant="gp")
    assert est.get_params() == {"l_max": 70, "k": 2, "variant": "gp"}
    twin = clone(est).set_params(variant="flex")
    assert twin.variant == "flex" and est.variant == "gp"


def test_mca_variants(fig6):
    gp = MCAPlacer(l_max=100, variant="gp").fit(fig6)
    flex = MCAPlacer(l_max=100, variant="flex").fit(fig6)
    assert gp.report_.feasible and flex.report_.feasible
    with pytest.raises(ValueError):
        MCAPlacer(l_max=100, variant="tree").fit(fig6)


def test_exact_placer(fig6):
    est = ExactPlacer(l_max=100).fit(fig6)
    assert est.n_repeaters_ <= SCAPlacer(l_max=100).fit(fig6).n_repeaters_


@pytest.mark.parametrize("bad", [{"l_max": 0}, {"l_max": "far"}, {"k": 0}, {"k": 1.5}])
def test_parameter_validation(path3, bad):
    with pytest.raises((TypeError, ValueError)):
        SCAPlacer(**{"l_max": 100, **bad}).fit(path3)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        SCAPlacer().predict()


def test_infeasible_propagates(path3):
    with pytest.raises(InfeasibleError):
        SCAPlacer(l_max=100, k=2).fit(path3)


def test_predict_rejects_other_topology(path3, cycle4):
    est = SCAPlacer(l_max=100).fit(path3)
    with pytest.raises(ValueError):
        est.predict(cycle4)


def test_augment_pipeline():
    t = make_topology([("A", "B", 250), ("B", "C", 60)], "long")
    aug = LongLinkAugmenter(l_max=100)
    out = aug.fit_transform(t)
    assert aug.n_added_ == 2 and out.n_synthetic == 2

    pipe = make_pipeline(LongLinkAugmenter(l_max=100), SCAPlacer(l_max=100))
    pipe.fit(t)
    placer = pipe[-1]
    assert placer.report_.feasible
    assert placer.placement_.synthetic_added == ()
    assert placer.predict().shape == (5,)


def test_ghost_attacher(path3):
    g = GhostAttacher().fit_transform(path3)
    assert g.has_ghosts and len(g.node_ids) == 6
    mask = SCAPlacer(l_max=100).fit(g).predict()
    assert mask.dtype == np.bool_ and mask.sum() == 1
