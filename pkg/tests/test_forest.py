import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srtf.errors import InvalidArgumentError
from srtf.forest import SrfModel, combine, predict_srf, train_srf, tree_seed
from srtf.functions import franke, osc_1d
from srtf.params import WorkingParams
from srtf.sampling import halton_sequence
from srtf.tree import train_srt

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.fixture(scope="module")
def osc_forest():
    X = np.linspace(-5, 5, 1000)[:, None]
    f = osc_1d(X)
    model, reports = train_srf(X, f, WorkingParams(), n_t=5, master_seed=4)
    return X, f, model, reports


class TestCombine:
    def test_hand_example(self):
        assert combine([[1.0], [1.0], [4.0]])[0] == 1.0

    def test_agreement(self):
        assert combine([[0.3], [0.3], [0.3], [0.3]])[0] == 0.3

    def test_single_tree(self):
        np.testing.assert_array_equal(combine([[1.5, -2.0, 7.0]]), [1.5, -2.0, 7.0])

    def test_two_trees_fall_back_to_mean(self):
        # both deviations are equal, so the filter set is empty
        assert combine([[1.0], [3.0]])[0] == 2.0

    @settings(max_examples=300, deadline=None)
    @given(st.lists(finite, min_size=1, max_size=12))
    def test_hull(self, values):
        out = combine(np.array(values)[:, None])[0]
        assert min(values) <= out <= max(values)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(finite, min_size=1, max_size=12), st.randoms(use_true_random=False))
    def test_tree_order_does_not_matter(self, values, rnd):
        shuffled = list(values)
        rnd.shuffle(shuffled)
        assert combine(np.array(values)[:, None])[0] == combine(np.array(shuffled)[:, None])[0]

    @settings(max_examples=200, deadline=None)
    @given(st.lists(finite, min_size=3, max_size=12))
    def test_filter_keeps_at_least_one(self, values):
        s = np.array(values)
        m = s.mean()
        dev = (s - m) ** 2
        if np.ptp(dev) > 1e-9 * max(1.0, dev.max()):
            keep = s[dev < dev.mean()]
            assert len(keep) >= 1
            assert combine(s[:, None])[0] == pytest.approx(keep.mean(), rel=1e-9, abs=1e-9)


class TestTrain:
    def test_single_tree_forest_equals_tree(self):
        X = halton_sequence(1500, 2)
        f = franke(X)
        forest, _ = train_srf(X, f, n_t=1, master_seed=7)
        tree, _ = train_srt(X, f, seed=tree_seed(7, 0))
        probe = np.random.default_rng(0).random((400, 2))
        np.testing.assert_array_equal(forest.predict(probe), tree.predict(probe))

    def test_five_distinct_structures(self, osc_forest):
        _, _, model, _ = osc_forest
        assert model.trees[0].mode == "equal"
        assert all(t.mode == "random" for t in model.trees[1:])
        roots = {t.root.hyperplane.threshold for t in model.trees if t.root.hyperplane is not None}
        signatures = {tuple((n.path, n.n_points) for n in t.nodes()) for t in model.trees}
        assert len(signatures) == 5
        assert len(roots) >= 2

    def test_deterministic(self, osc_forest):
        X, f, model, _ = osc_forest
        again, _ = train_srf(X, f, WorkingParams(), n_t=5, master_seed=4, threads=3)
        probe = np.linspace(-5.3, 5.3, 777)[:, None]
        np.testing.assert_array_equal(model.predict(probe), again.predict(probe))

    def test_prediction_in_tree_hull(self, osc_forest):
        _, _, model, _ = osc_forest
        probe = np.linspace(-5, 5, 2001)[:, None]
        preds = model.tree_predictions(probe)
        out = predict_srf(model, probe)
        assert np.all(out >= preds.min(axis=0)) and np.all(out <= preds.max(axis=0))

    def test_seeds_distinct(self):
        assert len({tree_seed(0, i) for i in range(50)}) == 50
        assert tree_seed(1, 0) != tree_seed(0, 1)

    def test_empty_forest(self):
        with pytest.raises(InvalidArgumentError):
            SrfModel(trees=[], n_t=0, master_seed=0)
        with pytest.raises(InvalidArgumentError):
            train_srf(np.eye(3), np.ones(3), n_t=0)
