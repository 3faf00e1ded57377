"""Target classification: stepwise linear discriminant (SWLDA) and ridge LDA.

SWLDA regresses +1/-1 labels on the feature matrix, growing the set of
regressors with forward partial-F tests and pruning it with backward
tests until neither step changes the set. The discriminant is then the
ordinary least-squares fit on the surviving columns.
"""
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (EmptyModelError, InvalidParameterError, NumericalError)
from .dsp import N_FEATURES

# relative residual norm below which a candidate column counts as collinear
COLLINEAR_TOL = 1e-10


@dataclass
class TrainingSet:
    """Single-trial feature rows with +1/-1 labels.

    ``codes`` and ``groups`` (stimulus code and selection index per row)
    are optional bookkeeping filled in by calibration runs.
    """
    features: np.ndarray
    labels: np.ndarray
    codes: np.ndarray = None
    groups: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise InvalidParameterError(f"features {X.shape} and labels {y.shape} disagree")
        if X.shape[0] < 8:
            raise InvalidParameterError(f"need at least 8 training rows, got {X.shape[0]}")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise InvalidParameterError("labels must be +1 (target) or -1 (non-target)")
        if not (np.any(y > 0) and np.any(y < 0)):
            raise InvalidParameterError("both classes must be present")
        if not np.all(np.isfinite(X)):
            raise InvalidParameterError("features contain non-finite values")
        self.features, self.labels = X, y

    @property
    def n_features(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class SwldaModel:
    selected: tuple
    weights: np.ndarray
    intercept: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        sel = tuple(int(i) for i in self.selected)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(sel) != len(w):
            raise InvalidParameterError(f"{len(sel)} selected indices but {len(w)} weights")
        if len(set(sel)) != len(sel):
            raise InvalidParameterError("selected feature indices must be unique")
        n = self.n_features
        if any(not 0 <= i < n for i in sel):
            raise InvalidParameterError(f"selected index outside 0..{n - 1}")
        object.__setattr__(self, "selected", sel)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_features(self):
        return int(self.meta.get("n_features", N_FEATURES))

    def to_dict(self):
        return {"selected": list(self.selected), "weights": self.weights.tolist(),
                "intercept": self.intercept, "meta": self.meta}

    @classmethod
    def from_dict(cls, d):
        return cls(d["selected"], d["weights"], d["intercept"], d.get("meta", {}))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class SelectionResult:
    chosen: int
    scores: tuple


def _orthobasis(Xs):
    if Xs.shape[1] == 0:
        return Xs
    q, _ = np.linalg.qr(Xs)
    return q


def entry_pvalues(Xc, yc, selected):
    """Partial-F p-values for adding each unselected column.

    ``Xc`` and ``yc`` are already mean-centred, which accounts for the
    intercept. Returns ``(F, p)`` arrays over all columns; selected and
    collinear columns get ``F = 0, p = 1``.
    """
    M, d = Xc.shape
    k = len(selected)
    df = M - k - 2
    F = np.zeros(d)
    p = np.ones(d)
    if df <= 0:
        return F, p
    Q = _orthobasis(Xc[:, list(selected)])
    r = yc - Q @ (Q.T @ yc)
    rss = r @ r
    Z = Xc - Q @ (Q.T @ Xc)
    zz = np.einsum("ij,ij->j", Z, Z)
    xx = np.einsum("ij,ij->j", Xc, Xc)
    ok = zz > COLLINEAR_TOL * np.maximum(xx, np.finfo(float).tiny)
    ok[list(selected)] = False
    gain = np.zeros(d)
    gain[ok] = (Z[:, ok].T @ r) ** 2 / zz[ok]
    rss_new = np.maximum(rss - gain, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        F[ok] = np.where(rss_new[ok] > 0, gain[ok] / (rss_new[ok] / df), np.inf)
    p[ok] = stats.f.sf(F[ok], 1, df)
    return F, p


def removal_pvalues(Xc, yc, selected):
    """Partial-F p-values for dropping each selected column (same order)."""
    M = Xc.shape[0]
    k = len(selected)
    df = M - k - 1
    if k == 0:
        return np.zeros(0), np.ones(0)
    Xs = Xc[:, list(selected)]
    q, R = np.linalg.qr(Xs)
    beta = np.linalg.solve(R, q.T @ yc)
    r = yc - Xs @ beta
    rss = r @ r
    if df <= 0:
        return np.full(k, np.inf), np.zeros(k)
    Rinv = np.linalg.solve(R, np.eye(k))
    var_diag = np.einsum("ij,ij->i", Rinv, Rinv)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.where(rss > 0, beta ** 2 / (var_diag * rss / df), np.inf)
    return F, stats.f.sf(F, 1, df)


def _ols(X, y, selected):
    A = np.column_stack([np.ones(len(y)), X[:, list(selected)]])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef[1:], coef[0]


def train_swlda(data, p_enter=0.10, p_remove=0.15, max_features=60, max_steps=None):
    """Stepwise regression of labels on features.

    Each pass tries one forward step (best partial-F candidate, if its
    p-value is below ``p_enter`` and the model is not full) and then one
    backward step (worst selected feature, if its p-value exceeds
    ``p_remove``). Training stops when a pass changes nothing, or when a
    previously visited feature set comes round again.
    """
    if not 0 < p_enter <= 1 or not 0 < p_remove <= 1:
        raise InvalidParameterError("p_enter and p_remove must lie in (0, 1]")
    if max_features < 1:
        raise InvalidParameterError("max_features must be >= 1")
    X, y = data.features, data.labels
    M, d = X.shape
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    max_steps = max_steps or 4 * d + 10
    selected = []
    history = []
    seen = {frozenset()}
    for _ in range(max_steps):
        changed = False
        if len(selected) < max_features:
            F, p = entry_pvalues(Xc, yc, selected)
            best = int(np.argmax(F))
            if F[best] > 0 and p[best] < p_enter:
                selected.append(best)
                history.append(("add", best, float(p[best])))
                changed = True
        if selected:
            F, p = removal_pvalues(Xc, yc, selected)
            worst = int(np.argmin(F))
            if p[worst] > p_remove:
                j = selected.pop(worst)
                history.append(("remove", j, float(p[worst])))
                changed = True
        if not changed:
            break
        # a pass is a pure function of the set, so a repeat means a cycle
        key = frozenset(selected)
        if key in seen:
            break
        seen.add(key)
    if not selected:
        raise EmptyModelError(f"no feature entered at p_enter={p_enter}")

    A = Xc[:, selected]
    while selected and np.linalg.matrix_rank(A) < len(selected):
        dropped = selected.pop()
        warnings.warn(f"selected set rank deficient; dropped feature {dropped}")
        A = Xc[:, selected]
    w, b = _ols(X, y, selected)
    meta = {"kind": "swlda", "p_enter": p_enter, "p_remove": p_remove,
            "max_features": max_features, "n_train": M, "n_features": d,
            "history": history}
    return SwldaModel(tuple(selected), w, b, meta)


def train_lda(data, ridge=0.01):
    """Fisher LDA with trace-scaled ridge shrinkage, all features kept.

    The decision threshold sits at the midpoint of the class means.
    """
    if ridge < 0:
        raise InvalidParameterError("ridge must be >= 0")
    X, y = data.features, data.labels
    M, d = X.shape
    pos, neg = X[y > 0], X[y < 0]
    mu_p, mu_n = pos.mean(axis=0), neg.mean(axis=0)
    scatter = (pos - mu_p).T @ (pos - mu_p) + (neg - mu_n).T @ (neg - mu_n)
    cov = scatter / max(M - 2, 1)
    reg = cov + ridge * np.trace(cov) / d * np.eye(d)
    if np.linalg.cond(reg) > 1.0 / np.finfo(float).eps:
        raise NumericalError("regularised covariance is singular")
    w = np.linalg.solve(reg, mu_p - mu_n)
    b = -w @ (mu_p + mu_n) / 2
    meta = {"kind": "lda", "ridge": ridge, "n_train": M, "n_features": d}
    return SwldaModel(tuple(range(d)), w, b, meta)


def score(model, fv):
    fv = np.asarray(fv, dtype=float)
    if fv.shape != (model.n_features,):
        raise InvalidParameterError(
            f"feature vector length {fv.size} != model dimension {model.n_features}")
    if not model.selected:
        return model.intercept
    return float(model.intercept + model.weights @ fv[list(model.selected)])


def select(model, averaged):
    """Score one averaged feature vector per code and pick the best.

    ``averaged`` maps codes 1..4 to feature vectors (a length-4 sequence
    is read as codes 1..4). Ties go to the lowest code.
    """
    if not isinstance(averaged, dict):
        averaged = dict(enumerate(averaged, start=1))
    missing = [c for c in (1, 2, 3, 4) if c not in averaged]
    if missing or len(averaged) != 4:
        raise InvalidParameterError(f"need exactly codes 1..4, missing {missing}")
    scores = tuple(score(model, averaged[c]) for c in (1, 2, 3, 4))
    return SelectionResult(int(np.argmax(scores)) + 1, scores)
