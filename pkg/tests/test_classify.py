"""Classifier, evaluation, voting, and model-file tests."""

import numpy as np
import pytest

from specdetect.classify import (
    DegenerateClusterError,
    KMeansConfig,
    KMeansModel,
    LogRegConfig,
    LogRegModel,
    SvmConfig,
    SvmModel,
    evaluate,
    fit_kmeans,
    load_model,
    logreg_objective,
    majority_vote,
    predict,
    save_model,
    train_logreg,
    train_svm,
    vote_by_group,
)

SEPARABLE_X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
SEPARABLE_Y = np.array([0, 0, 1, 1])


class TestTrainSvm:
    def test_separable_1d_perfect_training_accuracy(self):
        model = train_svm(SEPARABLE_X, SEPARABLE_Y, SvmConfig(seed=0))
        assert evaluate(model, SEPARABLE_X, SEPARABLE_Y).accuracy == 1.0

    def test_duplicated_data_same_decision_signs(self):
        base = train_svm(SEPARABLE_X, SEPARABLE_Y, SvmConfig(seed=0))
        doubled = train_svm(np.vstack([SEPARABLE_X, SEPARABLE_X]),
                            np.concatenate([SEPARABLE_Y, SEPARABLE_Y]), SvmConfig(seed=0))
        grid = np.linspace(-3, 3, 41).reshape(-1, 1)
        signs_a = [predict(base, g)[0] for g in grid]
        signs_b = [predict(doubled, g)[0] for g in grid]
        assert signs_a == signs_b

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            train_svm(np.zeros((3, 2)), np.zeros(3, dtype=int))

    def test_bit_exact_determinism(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(30, 5))
        y = (X[:, 0] > 0).astype(int)
        a = train_svm(X, y, SvmConfig(seed=3))
        b = train_svm(X, y, SvmConfig(seed=3))
        assert (a.weights == b.weights).all() and a.bias == b.bias

    def test_label_invariant_under_positive_model_rescale(self):
        model = train_svm(SEPARABLE_X, SEPARABLE_Y, SvmConfig(seed=0))
        scaled = SvmModel(weights=7.5 * model.weights, bias=7.5 * model.bias,
                          config=model.config)
        grid = np.linspace(-3, 3, 21).reshape(-1, 1)
        assert [predict(model, g)[0] for g in grid] == [predict(scaled, g)[0] for g in grid]


class TestTrainLogreg:
    def test_separable_1d_perfect_training_accuracy(self):
        model = train_logreg(SEPARABLE_X, SEPARABLE_Y, LogRegConfig(seed=0))
        assert evaluate(model, SEPARABLE_X, SEPARABLE_Y).accuracy == 1.0

    def test_zero_epochs_gives_coin_flip_probability(self):
        model = train_logreg(SEPARABLE_X, SEPARABLE_Y, LogRegConfig(epochs=0))
        label, score = predict(model, np.array([3.0]))
        assert score == 0.5
        assert label == 0  # exact tie predicts real

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(12, 4))
        y = rng.integers(0, 2, 12)
        w = rng.normal(size=4)
        b = float(rng.normal())
        l2 = 0.05
        loss, gw, gb = logreg_objective(X, y, w, b, l2)
        h = 1e-6
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            num = (logreg_objective(X, y, w + e, b, l2)[0]
                   - logreg_objective(X, y, w - e, b, l2)[0]) / (2 * h)
            assert abs(num - gw[i]) / max(abs(num), abs(gw[i]), 1e-12) < 1e-5
        num_b = (logreg_objective(X, y, w, b + h, l2)[0]
                 - logreg_objective(X, y, w, b - h, l2)[0]) / (2 * h)
        assert abs(num_b - gb) / max(abs(num_b), abs(gb), 1e-12) < 1e-5

    def test_bit_exact_determinism(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(20, 3))
        y = (X.sum(axis=1) > 0).astype(int)
        a = train_logreg(X, y, LogRegConfig(seed=1))
        b = train_logreg(X, y, LogRegConfig(seed=1))
        assert (a.weights == b.weights).all() and a.bias == b.bias


class TestFitKmeans:
    def test_two_tight_clusters(self):
        X = np.array([[0.0], [0.1], [10.0], [10.1]])
        model = fit_kmeans(X, KMeansConfig(seed=0))
        lows = sorted(model.centroids[:, 0])
        assert abs(lows[0] - 0.05) < 1e-9 and abs(lows[1] - 10.05) < 1e-9
        # raw-space inertia around the published centroids
        d2 = ((X[:, None, :] - model.centroids[None]) ** 2).sum(axis=2)
        assert abs(d2.min(axis=1).sum() - 0.01) < 1e-9

    def test_permutation_invariant_inertia(self):
        rng = np.random.default_rng(11)
        X = np.vstack([rng.normal(0, 0.2, (20, 3)), rng.normal(4, 0.2, (20, 3))])
        perm = rng.permutation(40)

        def best_inertia(data):
            model = fit_kmeans(data, KMeansConfig(seed=5, n_init=4))
            from specdetect.classify import _condition
            z = _condition(data, model.offset, model.scale)
            d2 = ((z[:, None, :] - model.cond_centroids[None]) ** 2).sum(axis=2)
            return d2.min(axis=1).sum()

        assert abs(best_inertia(X) - best_inertia(X[perm])) < 1e-9

    def test_identical_points_degenerate(self):
        with pytest.raises(DegenerateClusterError):
            fit_kmeans(np.ones((5, 3)), KMeansConfig(seed=0))

    def test_calibration_fixes_mapping(self):
        rng = np.random.default_rng(12)
        X = np.vstack([rng.normal(0, 0.1, (10, 2)), rng.normal(3, 0.1, (10, 2))])
        y = np.array([0] * 10 + [1] * 10)
        model = fit_kmeans(X, KMeansConfig(seed=0), calibration=(X, y))
        assert evaluate(model, X, y).accuracy == 1.0

    def test_high_band_convention_calls_hot_cluster_fake(self):
        rng = np.random.default_rng(13)
        cold = rng.uniform(0.0, 0.01, (15, 8))
        hot = cold + 0.0
        hot = rng.uniform(0.0, 0.01, (15, 8))
        hot[:, 6:] += 0.5  # energy in the top quarter of bins
        X = np.vstack([cold, hot])
        y = np.array([0] * 15 + [1] * 15)
        model = fit_kmeans(X, KMeansConfig(seed=0))
        assert evaluate(model, X, y).accuracy == 1.0


class TestPredict:
    def test_svm_positive_score(self):
        model = SvmModel(weights=np.array([1.0]), bias=0.0)
        assert predict(model, np.array([2.0])) == (1, 2.0)

    def test_exact_zero_score_predicts_real(self):
        model = SvmModel(weights=np.array([1.0]), bias=0.0)
        assert predict(model, np.array([0.0]))[0] == 0

    def test_logreg_zero_weights_probability_half(self):
        model = LogRegModel(weights=np.zeros(3), bias=0.0)
        label, score = predict(model, np.ones(3))
        assert score == 0.5 and label == 0

    def test_length_mismatch(self):
        model = SvmModel(weights=np.ones(4), bias=0.0)
        with pytest.raises(ValueError):
            predict(model, np.ones(5))

    def test_kmeans_margin_sign(self):
        model = KMeansModel(centroids=np.array([[0.0], [10.0]]),
                            cluster_to_label=(0, 1))
        label, score = predict(model, np.array([9.0]))
        assert label == 1 and score > 0
        label, score = predict(model, np.array([1.0]))
        assert label == 0 and score < 0


class TestEvaluate:
    def test_perfect_predictions(self):
        model = SvmModel(weights=np.array([1.0]), bias=0.0)
        X = np.array([[-1.0], [-2.0], [1.0], [2.0]])
        y = np.array([0, 0, 1, 1])
        report = evaluate(model, X, y)
        assert report.accuracy == 1.0
        assert report.confusion[0, 1] == 0 and report.confusion[1, 0] == 0

    def test_constant_predictor_on_balanced_set(self):
        model = SvmModel(weights=np.array([0.0]), bias=-1.0)
        X = np.ones((10, 1))
        y = np.array([0, 1] * 5)
        assert evaluate(model, X, y).accuracy == 0.5

    def test_confusion_sums_to_n(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            n = int(rng.integers(1, 40))
            X = rng.normal(size=(n, 3))
            y = rng.integers(0, 2, n)
            model = SvmModel(weights=rng.normal(size=3), bias=float(rng.normal()))
            report = evaluate(model, X, y)
            assert report.confusion.sum() == n
            assert 0.0 <= report.accuracy <= 1.0

    def test_kmeans_best_mapping_at_least_half_on_balanced(self):
        rng = np.random.default_rng(15)
        X = rng.normal(size=(20, 4))
        y = np.array([0, 1] * 10)
        model = fit_kmeans(X, KMeansConfig(seed=2))
        report = evaluate(model, X, y)
        assert report.best_mapping_accuracy >= 0.5

    def test_empty_set_rejected(self):
        model = SvmModel(weights=np.array([1.0]), bias=0.0)
        with pytest.raises(ValueError):
            evaluate(model, np.zeros((0, 1)), np.zeros(0, dtype=int))


class TestMajorityVote:
    def test_majority_fake(self):
        assert majority_vote([1, 1, 0]) == 1

    def test_majority_real(self):
        assert majority_vote([0, 0, 0, 1]) == 0

    def test_tie_goes_to_fake(self):
        assert majority_vote([0, 1]) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            majority_vote([])

    def test_vote_by_group(self):
        votes = vote_by_group(["a", "a", "a", "b", "b"], [1, 1, 0, 0, 0])
        assert votes == {"a": 1, "b": 0}


class TestModelFiles:
    def test_svm_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(16)
        model = SvmModel(weights=rng.normal(size=7), bias=float(rng.normal()),
                         config=SvmConfig(C=0.75, epochs=13, seed=5))
        path = tmp_path / "svm.model"
        save_model(model, path)
        back = load_model(path)
        assert (back.weights == model.weights).all()
        assert back.bias == model.bias
        assert back.config == model.config

    def test_logreg_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(17)
        model = LogRegModel(weights=rng.normal(size=4) * 1e-7, bias=-1.0 / 3.0,
                            config=LogRegConfig(learning_rate=0.05, l2=1e-6,
                                                epochs=9, seed=2))
        path = tmp_path / "lr.model"
        save_model(model, path)
        back = load_model(path)
        assert (back.weights == model.weights).all() and back.bias == model.bias

    def test_kmeans_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(18)
        X = np.vstack([rng.normal(0, 0.1, (8, 5)), rng.normal(2, 0.1, (8, 5))])
        model = fit_kmeans(X, KMeansConfig(seed=1))
        path = tmp_path / "km.model"
        save_model(model, path)
        back = load_model(path)
        assert (back.centroids == model.centroids).all()
        assert (back.cond_centroids == model.cond_centroids).all()
        assert (back.offset == model.offset).all() and (back.scale == model.scale).all()
        assert back.cluster_to_label == model.cluster_to_label
        trial = rng.normal(size=5)
        assert predict(back, trial) == predict(model, trial)

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text("format_version 1\nmodel_kind tree\n")
        with pytest.raises(ValueError):
            load_model(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "old.model"
        path.write_text("format_version 99\nmodel_kind svm\n")
        with pytest.raises(ValueError):
            load_model(path)
