import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg, stats

from haptic_p300 import classify
from haptic_p300.classify import (SelectionResult, SwldaModel, TrainingSet, entry_pvalues,
                                  removal_pvalues, score, select, train_lda, train_swlda)
from haptic_p300.errors import EmptyModelError, InvalidParameterError, NumericalError


def _noise_labels(rng, m):
    y = np.where(np.arange(m) % 4 == 0, 1.0, -1.0)
    rng.shuffle(y)
    return y


def _dataset(seed, m=300, d=136, informative=(3, 40, 77), gain=0.8):
    rng = np.random.default_rng(seed)
    y = _noise_labels(rng, m)
    X = rng.standard_normal((m, d))
    for j in informative:
        X[:, j] += gain * y
    return TrainingSet(X, y)


# independent oracle: full refits with and without each column
def _rss(X, y, cols):
    A = np.column_stack([np.ones(len(y))] + [X[:, c] for c in cols])
    coef = linalg.lstsq(A, y)[0]
    r = y - A @ coef
    return r @ r


def _brute_entry_p(X, y, sel, j):
    m = len(y)
    rss0, rss1 = _rss(X, y, sel), _rss(X, y, sel + [j])
    df = m - len(sel) - 2
    return stats.f.sf((rss0 - rss1) / (rss1 / df), 1, df)


def _brute_removal_p(X, y, sel, j):
    m = len(y)
    rest = [c for c in sel if c != j]
    rss_full, rss_red = _rss(X, y, sel), _rss(X, y, rest)
    df = m - len(sel) - 1
    return stats.f.sf((rss_red - rss_full) / (rss_full / df), 1, df)


def _ols_oracle(X, y, sel):
    A = np.column_stack([np.ones(len(y)), X[:, sel]])
    coef = linalg.solve(A.T @ A, A.T @ y, assume_a="pos")
    return coef[1:], coef[0]


def test_training_set_validation():
    X = np.zeros((10, 4))
    with pytest.raises(InvalidParameterError):
        TrainingSet(np.zeros((7, 4)), np.array([1, -1] * 3 + [1.0]))
    with pytest.raises(InvalidParameterError):
        TrainingSet(X, np.ones(10))
    with pytest.raises(InvalidParameterError):
        TrainingSet(X, np.array([1, -1] * 4 + [0, 1.0]))
    bad = X.copy()
    bad[0, 0] = np.inf
    with pytest.raises(InvalidParameterError):
        TrainingSet(bad, np.array([1, -1] * 5, float))


def test_label_column_selected_first():
    rng = np.random.default_rng(0)
    y = _noise_labels(rng, 200)
    X = rng.standard_normal((200, 136))
    X[:, 57] = y
    model = train_swlda(TrainingSet(X, y))
    assert model.selected[0] == 57
    assert model.meta["history"][0][:2] == ("add", 57)
    pred = np.sign([score(model, x) for x in X])
    assert np.all(pred == y)
    w, b = _ols_oracle(X, y, list(model.selected))
    np.testing.assert_allclose(model.weights, w, rtol=1e-8, atol=1e-10)
    assert model.intercept == pytest.approx(b, rel=1e-8, abs=1e-10)


def test_pure_noise_empty_model():
    rng = np.random.default_rng(12)
    y = _noise_labels(rng, 200)
    X = rng.standard_normal((200, 136))
    with pytest.raises(EmptyModelError):
        train_swlda(TrainingSet(X, y), p_enter=1e-6, p_remove=1e-5)


def test_swlda_deterministic():
    data = _dataset(5)
    a, b = train_swlda(data), train_swlda(data)
    assert a.selected == b.selected
    assert a.weights.tobytes() == b.weights.tobytes() and a.intercept == b.intercept


def test_swlda_finds_informative_columns():
    model = train_swlda(_dataset(1, gain=1.0))
    assert {3, 40, 77} <= set(model.selected)
    assert len(model.selected) <= 60


def test_max_features_cap():
    model = train_swlda(_dataset(2, informative=tuple(range(0, 136, 9)), gain=1.0), max_features=4)
    assert len(model.selected) <= 4


@pytest.mark.parametrize("seed", range(20))
def test_weights_match_least_squares(seed):
    m = 120 + 9 * seed
    data = _dataset(seed, m=m, informative=tuple(range(seed % 7, 136, 17)), gain=0.5)
    model = train_swlda(data)
    w, b = _ols_oracle(data.features, data.labels, list(model.selected))
    coef = np.r_[model.intercept, model.weights]
    ref = np.r_[b, w]
    assert np.linalg.norm(coef - ref) <= 1e-8 * np.linalg.norm(ref)


def _toy(seed=0, m=400):
    """a and b together pin the label down; c is a noisier proxy that
    enters first and is dropped once a and b are in."""
    rng = np.random.default_rng(seed)
    y = _noise_labels(rng, m)
    shared = rng.standard_normal(m)
    a = y + shared + 0.02 * rng.standard_normal(m)
    b = shared
    c = y + 0.5 * shared + 0.6 * rng.standard_normal(m)
    return np.column_stack([a, b, c, rng.standard_normal((m, 2))]), y


def test_partial_f_against_brute_force():
    X, y = _toy()
    model = train_swlda(TrainingSet(X, y))
    Xc, yc = X - X.mean(axis=0), y - y.mean()
    sel = []
    assert any(h[0] == "remove" for h in model.meta["history"])
    for action, j, p in model.meta["history"]:
        _, p_in = entry_pvalues(Xc, yc, sel)
        for c in range(5):
            if c not in sel:
                assert p_in[c] == pytest.approx(_brute_entry_p(X, y, sel, c), rel=1e-8)
        if sel:
            _, p_out = removal_pvalues(Xc, yc, sel)
            for c, pc in zip(sel, p_out):
                assert pc == pytest.approx(_brute_removal_p(X, y, sel, c), rel=1e-8)
        if action == "add":
            assert p == pytest.approx(_brute_entry_p(X, y, sel, j), rel=1e-8)
            sel.append(j)
        else:
            assert p == pytest.approx(_brute_removal_p(X, y, sel, j), rel=1e-8)
            sel.remove(j)
    assert tuple(sel) == model.selected


@pytest.mark.parametrize("seed", range(3))
def test_backward_step_removes_redundant_feature(seed):
    X, y = _toy(seed)
    model = train_swlda(TrainingSet(X, y))
    actions = [h[:2] for h in model.meta["history"]]
    assert actions == [("add", 2), ("add", 1), ("add", 0), ("remove", 2)]
    assert model.selected == (1, 0)


def test_collinear_candidate_never_enters():
    rng = np.random.default_rng(6)
    y = _noise_labels(rng, 100)
    X = rng.standard_normal((100, 6))
    X[:, 0] += y
    X[:, 5] = 2 * X[:, 0]
    model = train_swlda(TrainingSet(X, y))
    assert not {0, 5} <= set(model.selected)


def test_bad_thresholds():
    with pytest.raises(InvalidParameterError):
        train_swlda(_dataset(0), p_enter=0)
    with pytest.raises(InvalidParameterError):
        train_swlda(_dataset(0), max_features=0)


def test_lda_separated_gaussians():
    rng = np.random.default_rng(0)
    d = 136
    mu = np.zeros(d)
    mu[:10] = 1.0

    def draw(n):
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        return rng.standard_normal((n, d)) + np.outer(y, mu), y

    X, y = draw(1000)
    model = train_lda(TrainingSet(X, y))
    Xt, yt = draw(1000)
    acc = np.mean(np.sign([score(model, x) for x in Xt]) == yt)
    assert acc >= 0.99
    assert model.selected == tuple(range(d))


def test_lda_identical_means_is_chance():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((2000, 136))
    y = np.where(rng.random(2000) < 0.5, 1.0, -1.0)
    model = train_lda(TrainingSet(X, y))
    Xt = rng.standard_normal((1000, 136))
    yt = np.where(rng.random(1000) < 0.5, 1.0, -1.0)
    acc = np.mean(np.sign([score(model, x) for x in Xt]) == yt)
    assert abs(acc - 0.5) <= 0.05


@pytest.mark.parametrize("trainer", [train_lda, train_swlda])
def test_feature_scaling_keeps_choice(trainer):
    data = _dataset(9)
    m1 = trainer(data)
    m2 = trainer(TrainingSet(2 * data.features, data.labels))
    rng = np.random.default_rng(2)
    for _ in range(20):
        cands = rng.standard_normal((4, 136))
        assert select(m1, cands).chosen == select(m2, 2 * cands).chosen


def test_lda_singular_without_ridge():
    X = np.zeros((20, 136))
    X[:, 0] = np.r_[np.ones(10), -np.ones(10)]
    y = np.r_[np.ones(10), -np.ones(10)]
    with pytest.raises(NumericalError):
        train_lda(TrainingSet(X, y), ridge=0.0)
    with pytest.raises(InvalidParameterError):
        train_lda(TrainingSet(X, y), ridge=-1)


def _model(sel, w, b):
    return SwldaModel(sel, w, b, {"n_features": 136})


def test_score_examples():
    fv = np.zeros(136)
    fv[0] = 3
    assert score(_model([], [], 1.5), fv) == 1.5
    assert score(_model([0], [2], 1), fv) == 7
    with pytest.raises(InvalidParameterError):
        score(_model([0], [2], 1), np.zeros(135))


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 1000))
def test_score_affine(a, b, seed):
    rng = np.random.default_rng(seed)
    m = _model(rng.choice(136, 10, replace=False), rng.standard_normal(10), rng.standard_normal())
    x, y = rng.standard_normal(136), rng.standard_normal(136)
    lhs = score(m, a * x + b * y)
    rhs = a * score(m, x) + b * score(m, y) - (a + b - 1) * m.intercept
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_select_examples():
    m = _model([0], [1.0], 0.0)
    vecs = [np.eye(136)[0] * v for v in (1, 0, 0, 0)]
    assert select(m, vecs) == SelectionResult(1, (1.0, 0.0, 0.0, 0.0))
    tie = {1: np.zeros(136), 2: np.eye(136)[0], 3: np.eye(136)[0], 4: np.zeros(136)}
    assert select(m, tie).chosen == 2
    with pytest.raises(InvalidParameterError):
        select(m, {1: np.zeros(136), 2: np.zeros(136), 3: np.zeros(136)})


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.01, 100))
def test_argmax_invariances(seed, lam):
    rng = np.random.default_rng(seed)
    sel = rng.choice(136, 8, replace=False)
    w = rng.standard_normal(8)
    cands = rng.standard_normal((4, 136))
    m0 = _model(sel, w, 0.0)
    assert select(m0, cands).chosen == select(m0, lam * cands).chosen
    m1 = _model(sel, w, 3.0)
    v = rng.standard_normal(136)
    assert select(m1, cands).chosen == select(m1, cands + v).chosen


def test_model_json_round_trip(tmp_path):
    model = train_swlda(_dataset(3))
    model.save(tmp_path / "m.json")
    back = SwldaModel.load(tmp_path / "m.json")
    assert back.selected == model.selected
    np.testing.assert_array_equal(back.weights, model.weights)
    assert back.intercept == model.intercept
    d = json.load(open(tmp_path / "m.json"))
    assert set(d) == {"selected", "weights", "intercept", "meta"}


def test_model_loader_rejects_mismatch():
    with pytest.raises(InvalidParameterError):
        SwldaModel.from_dict({"selected": [1, 2], "weights": [0.5], "intercept": 0, "meta": {}})
    with pytest.raises(InvalidParameterError):
        SwldaModel.from_dict({"selected": [1, 1], "weights": [0.5, 1], "intercept": 0})
    with pytest.raises(InvalidParameterError):
        SwldaModel.from_dict({"selected": [136], "weights": [0.5], "intercept": 0})
