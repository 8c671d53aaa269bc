import numpy as np
import pytest

from textprop import synth
from textprop.boost import (
    Stump,
    StumpEnsemble,
    TrainingSet,
    harvest_training_data,
    load_ensemble,
    load_pretrained,
    pretrained_path,
    train,
)
from textprop.pipeline import preset


def fixture_data(seed, n=200):
    """Two well-separated classes of nonnegative dispersion vectors."""
    rng = np.random.default_rng(seed)
    pos = np.abs(rng.normal(0.1, 0.05, size=(n, 5)))
    neg = np.abs(rng.normal(0.8, 0.3, size=(n, 5)))
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n), -np.ones(n)])
    return X, y


class TestStump:
    def test_validation(self):
        with pytest.raises(ValueError):
            Stump(5, 0.5, 0.0, 0.0)
        with pytest.raises(ValueError):
            Stump(-1, 0.5, 0.0, 0.0)
        with pytest.raises(ValueError):
            Stump(0, float("nan"), 0.0, 0.0)
        with pytest.raises(ValueError):
            Stump(0, 0.5, float("inf"), 0.0)


class TestConfidence:
    def test_single_stump_exact_leaves(self):
        model = StumpEnsemble([Stump(2, 1.5, -0.75, 0.25)])
        f = np.zeros(5)
        f[2] = 1.0
        assert model.confidence(f) == -0.75
        f[2] = 1.5  # boundary falls right (split is strict less-than)
        assert model.confidence(f) == 0.25

    def test_sums_over_stumps(self):
        model = StumpEnsemble([Stump(0, 0.5, 1.0, -1.0), Stump(1, 0.5, 2.0, -2.0)])
        assert model.confidence(np.zeros(5)) == 3.0

    def test_matrix_input(self):
        model = StumpEnsemble([Stump(0, 0.5, 1.0, -1.0)])
        F = np.array([[0.0] * 5, [1.0] + [0.0] * 4])
        assert model.confidence(F).tolist() == [1.0, -1.0]

    def test_piecewise_constant_within_cell(self):
        model = StumpEnsemble([Stump(0, 0.5, 1.0, -1.0), Stump(0, 0.8, 0.5, -0.5)])
        a = model.confidence(np.array([0.51, 0, 0, 0, 0]))
        b = model.confidence(np.array([0.79, 9, 9, 9, 9]))
        assert a == b  # both rows live in the same cell of feature 0

    def test_rejects_non_finite_and_bad_shape(self):
        model = StumpEnsemble([Stump(0, 0.5, 1.0, -1.0)])
        with pytest.raises(ValueError):
            model.confidence(np.array([np.nan, 0, 0, 0, 0]))
        with pytest.raises(ValueError):
            model.confidence(np.zeros(4))


class TestTrain:
    def test_separable_one_round(self):
        X = np.zeros((8, 5))
        X[4:, 0] = 1.0
        y = np.array([1, 1, 1, 1, -1, -1, -1, -1])
        model = train(TrainingSet(X, y), rounds=1)
        conf = model.confidence(X)
        assert ((conf > 0) == (y > 0)).all()  # training error 0

    def test_contradictory_duplicates_give_zero_confidence(self):
        X = np.full((6, 5), 0.3)
        y = np.array([1, -1, 1, -1, 1, -1])
        model = train(TrainingSet(X, y), rounds=3)
        assert model.confidence(X[0]) == pytest.approx(0.0, abs=1e-12)

    def test_fixture_heldout_accuracy(self):
        X, y = fixture_data(seed=10)
        model = train(TrainingSet(X, y), rounds=50)
        Xh, yh = fixture_data(seed=11)
        acc = (np.sign(model.confidence(Xh)) == yh).mean()
        assert acc >= 0.95

    def test_zero_vector_scores_text_side(self):
        X, y = fixture_data(seed=12)
        model = train(TrainingSet(X, y), rounds=50)
        assert model.confidence(np.zeros(5)) > 0

    def test_permutation_invariance(self):
        X, y = fixture_data(seed=13, n=40)
        rng = np.random.default_rng(0)
        perm = rng.permutation(len(y))
        m1 = train(TrainingSet(X, y), rounds=20)
        m2 = train(TrainingSet(X[perm], y[perm]), rounds=20)
        assert m1 == m2  # exact: canonical row order inside train

    def test_exp_loss_nonincreasing(self):
        X, y = fixture_data(seed=14, n=60)
        model = train(TrainingSet(X, y), rounds=25)
        w0 = np.full(len(y), 1.0 / len(y))
        conf = np.zeros(len(y))
        losses = []
        for st in model.stumps:
            conf += np.where(X[:, st.feature] < st.threshold, st.c_left, st.c_right)
            losses.append(float(np.sum(w0 * np.exp(-y * conf))))
        assert all(b <= a * (1 + 1e-12) for a, b in zip(losses, losses[1:]))
        assert losses[0] <= 1.0 + 1e-12

    def test_respects_weights(self):
        # one contradictory heavy row flips the optimal split side
        X = np.zeros((4, 5))
        X[2:, 0] = 1.0
        y = np.array([1, 1, -1, 1])
        heavy_right = train(
            TrainingSet(X, y, weights=np.array([1.0, 1.0, 0.01, 5.0])), rounds=1
        )
        assert heavy_right.confidence(np.array([1.0, 0, 0, 0, 0])) > 0
        heavy_neg = train(
            TrainingSet(X, y, weights=np.array([1.0, 1.0, 5.0, 0.01])), rounds=1
        )
        assert heavy_neg.confidence(np.array([1.0, 0, 0, 0, 0])) < 0

    def test_validation(self):
        X, y = fixture_data(seed=1, n=5)
        with pytest.raises(ValueError):
            train(TrainingSet(X, y), rounds=0)
        with pytest.raises(ValueError):
            train(TrainingSet(X[:1], y[:1]))
        with pytest.raises(ValueError):
            train(TrainingSet(X, np.ones(len(y))))
        bad = X.copy()
        bad[0, 0] = np.inf
        with pytest.raises(ValueError):
            train(TrainingSet(bad, y))
        with pytest.raises(ValueError):
            train(TrainingSet(X, y, weights=np.zeros(len(y))))

    def test_training_set_validation(self):
        with pytest.raises(ValueError):
            TrainingSet(np.zeros((3, 4)), np.ones(3))
        with pytest.raises(ValueError):
            TrainingSet(np.zeros((3, 5)), np.ones(2))
        with pytest.raises(ValueError):
            TrainingSet(np.zeros((3, 5)), np.ones(3), weights=np.ones(2))


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        X, y = fixture_data(seed=15, n=50)
        model = train(TrainingSet(X, y), rounds=12)
        path = tmp_path / "m.txt"
        model.save(path)
        loaded = load_ensemble(path)
        assert loaded == model
        probe = np.abs(np.random.default_rng(2).normal(0.4, 0.3, size=(64, 5)))
        np.testing.assert_allclose(
            loaded.confidence(probe), model.confidence(probe), rtol=0, atol=1e-15
        )

    def test_header_format(self, tmp_path):
        model = StumpEnsemble([Stump(3, 0.25, -1.5, 2.5)])
        path = tmp_path / "m.txt"
        model.save(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "textprop-stumps v1 1"
        assert lines[1].split() == ["3", "0.25", "-1.5", "2.5"]

    def test_load_errors(self, tmp_path):
        p = tmp_path / "m.txt"
        p.write_text("")
        with pytest.raises(ValueError):
            load_ensemble(p)
        p.write_text("wrong-magic v1 1\n0 0.5 1.0 -1.0\n")
        with pytest.raises(ValueError):
            load_ensemble(p)
        p.write_text("textprop-stumps v1 2\n0 0.5 1.0 -1.0\n")
        with pytest.raises(ValueError):
            load_ensemble(p)
        p.write_text("textprop-stumps v1 1\n0 0.5 1.0\n")
        with pytest.raises(ValueError):
            load_ensemble(p)
        with pytest.raises(FileNotFoundError):
            load_ensemble(tmp_path / "missing.txt")


class TestPretrained:
    def test_bundled_model_loads(self):
        assert pretrained_path().name == "pretrained-stumps-v1.txt"
        model = load_pretrained()
        assert len(model.stumps) >= 1
        assert np.isfinite(model.confidence(np.zeros(5)))

    def test_bundled_model_structure(self):
        model = load_pretrained()
        assert len({st.feature for st in model.stumps}) >= 2
        probe = np.abs(np.random.default_rng(0).normal(0.3, 0.4, size=(32, 5)))
        assert np.isfinite(model.confidence(probe)).all()


@pytest.fixture(scope="module")
def harvested():
    scenes = [synth.render_scene(seed) for seed in (500, 501)]
    return harvest_training_data(scenes, preset("fast"))


class TestHarvest:
    def test_shapes_and_labels(self, harvested):
        assert harvested.features.shape[1] == 5
        assert np.isfinite(harvested.features).all()
        assert set(np.unique(harvested.labels)) == {-1, 1}
        assert (harvested.features >= 0).all()  # dispersions are nonnegative

    def test_trains_usable_model(self, harvested):
        model = train(harvested, rounds=30)
        acc = (np.sign(model.confidence(harvested.features)) == harvested.labels).mean()
        assert acc > 0.6  # clearly better than chance on its own data

    def test_no_gt_is_error(self):
        img = synth.render_scene(502)[0]
        with pytest.raises(ValueError):
            harvest_training_data([(img, np.zeros((0, 4)))], preset("fast"))

    def test_empty_samples_is_error(self):
        with pytest.raises(ValueError):
            harvest_training_data([], preset("fast"))

    def test_band_bounds_validated(self):
        img, gt = synth.render_scene(503)
        with pytest.raises(ValueError):
            harvest_training_data([(img, gt)], preset("fast"),
                                  text_iou=0.2, background_iou=0.7)
