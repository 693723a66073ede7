"""Linear detectors over spectral features plus evaluation helpers.

Supervised: a soft-margin linear SVM trained by seeded stochastic
subgradient descent, and L2-regularized logistic regression by full-batch
gradient descent.  Unsupervised: 2-means with plus-plus seeding and
restarts.  Training is single-threaded and bit-reproducible for a fixed
seed.  Labels are 0 = real, 1 = fake throughout.
"""

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateClusterError",
    "SvmConfig", "SvmModel",
    "LogRegConfig", "LogRegModel",
    "KMeansConfig", "KMeansModel",
    "EvalReport",
    "train_svm", "train_logreg", "logreg_objective", "fit_kmeans",
    "predict", "evaluate", "majority_vote",
    "save_model", "load_model",
]


class DegenerateClusterError(ValueError):
    """Clustering is undefined: fewer than two distinct feature vectors."""


@dataclass
class SvmConfig:
    C: float = 1.0
    epochs: int = 200
    seed: int = 0


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    config: SvmConfig = field(default_factory=SvmConfig)


@dataclass
class LogRegConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 500
    seed: int = 0


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    config: LogRegConfig = field(default_factory=LogRegConfig)


@dataclass
class KMeansConfig:
    seed: int = 0
    max_iter: int = 100
    n_init: int = 8


@dataclass
class KMeansModel:
    centroids: np.ndarray                 # (2, d) raw-space cluster means
    cluster_to_label: tuple[int, int]     # bijection onto {0, 1}
    config: KMeansConfig = field(default_factory=KMeansConfig)
    # conditioning used during the fit; assignment happens in this space
    offset: np.ndarray | None = None
    scale: np.ndarray | None = None
    cond_centroids: np.ndarray | None = None


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray                 # rows true, cols predicted
    n: int
    best_mapping_accuracy: float | None = None


def _check_training_set(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise ValueError("expected X of shape (n, d) and y of shape (n,)")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError("labels must be 0 (real) or 1 (fake)")
    if np.unique(y).size < 2:
        raise ValueError("training data contains a single class")
    return X, y.astype(int)


def _standardizer(X):
    """Per-feature affine map used to condition training.

    Radial power bins span several decades, which stalls gradient
    methods on the raw scale.  Trainers optimize in standardized
    coordinates and fold the map back into (weights, bias), so stored
    models always act on raw features.
    """
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd < 1e-12] = 1.0
    return mu, sd


def _fold_back(w_std, b_std, mu, sd):
    w = w_std / sd
    return w, float(b_std - w @ mu)


def train_svm(X, y, config: SvmConfig | None = None) -> SvmModel:
    """Soft-margin linear SVM: mean hinge loss plus ||w||^2 / (2C).

    Stochastic subgradient descent with the 1/(lambda*t) step schedule
    on standardized features; the bias rides along unregularized.
    Sample order comes from a seeded generator so retraining is
    bit-exact.
    """
    cfg = config or SvmConfig()
    X, y = _check_training_set(X, y)
    n, d = X.shape
    mu, sd = _standardizer(X)
    Z = (X - mu) / sd
    ysign = 2.0 * y - 1.0
    rng = np.random.default_rng(cfg.seed)
    lam = 1.0 / cfg.C
    w = np.zeros(d)
    b = 0.0
    t = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            w *= 1.0 - eta * lam
            if ysign[i] * (Z[i] @ w + b) < 1.0:
                w += (eta * ysign[i]) * Z[i]
                b += eta * ysign[i]
    w, b = _fold_back(w, b, mu, sd)
    return SvmModel(weights=w, bias=b, config=cfg)


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_objective(X, y, w, b, l2):
    """Mean negative log-likelihood + (l2/2)||w||^2, with its gradient.

    Returns (loss, grad_w, grad_b).  Uses logaddexp so large scores do
    not overflow.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    resid = _sigmoid(z) - y
    grad_w = X.T @ resid / X.shape[0] + l2 * w
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def train_logreg(X, y, config: LogRegConfig | None = None) -> LogRegModel:
    """Full-batch gradient descent from zero weights; deterministic.

    Optimizes on standardized features (see _standardizer) and returns
    raw-space parameters.
    """
    cfg = config or LogRegConfig()
    X, y = _check_training_set(X, y)
    mu, sd = _standardizer(X)
    Z = (X - mu) / sd
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(cfg.epochs):
        _, gw, gb = logreg_objective(Z, y, w, b, cfg.l2)
        w -= cfg.learning_rate * gw
        b -= cfg.learning_rate * gb
    w, b = _fold_back(w, b, mu, sd)
    return LogRegModel(weights=w, bias=b, config=cfg)


def _kmeanspp_init(X, rng):
    n = X.shape[0]
    first = int(rng.integers(n))
    cents = [X[first]]
    d2 = ((X - cents[0]) ** 2).sum(axis=1)
    total = d2.sum()
    if total <= 0:
        # all points coincide with the first pick; caller guards distinctness
        second = int(rng.integers(n))
    else:
        second = int(rng.choice(n, p=d2 / total))
    cents.append(X[second])
    return np.array(cents)


def _lloyd(X, cents, max_iter):
    prev = np.inf
    labels = np.zeros(X.shape[0], dtype=int)
    inertia = prev
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(X.shape[0]), labels].sum())
        # Lloyd steps never increase the objective; allow fp slack only
        assert inertia <= prev * (1.0 + 1e-12) + 1e-12
        if inertia == prev:
            break
        prev = inertia
        for c in range(2):
            members = labels == c
            if members.any():
                cents[c] = X[members].mean(axis=0)
            else:
                far = ((X - cents[1 - c]) ** 2).sum(axis=1).argmax()
                cents[c] = X[far]
    return cents, labels, inertia


def _condition(X, offset, scale):
    """Per-bin standardization followed by projection to the unit sphere.

    Raw profiles form one tight cluster (real) and one wide multiplicative
    cone (fake); Lloyd's objective on raw coordinates provably prefers to
    split the cone instead of the classes.  Standardizing the bins and
    normalizing each sample makes the two classes comparably scaled blobs.
    """
    z = (np.asarray(X, dtype=float) - offset) / scale
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms < 1e-15] = 1.0
    return z / norms


def fit_kmeans(X, config: KMeansConfig | None = None, calibration=None) -> KMeansModel:
    """2-means with plus-plus seeding, best of n_init restarts by inertia.

    Lloyd's algorithm runs on conditioned coordinates (see _condition);
    the conditioning affine is stored on the model so prediction assigns
    in the same space, while the published centroids are the raw-space
    cluster means.  Restart r draws from a generator seeded by (seed, r),
    so results do not depend on restart scheduling.  The cluster-to-label
    map comes from a labeled calibration set (X_cal, y_cal) when given,
    picking the bijection with the higher calibration accuracy; otherwise
    the cluster whose raw centroid carries more mean energy over the top
    quarter of bins is called fake.
    """
    cfg = config or KMeansConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("expected at least two feature vectors of shape (n, d)")
    if np.unique(X, axis=0).shape[0] < 2:
        raise DegenerateClusterError("all feature vectors are identical")
    offset = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale < 1e-12] = 1.0
    Z = _condition(X, offset, scale)
    best = None
    for r in range(cfg.n_init):
        rng = np.random.default_rng([cfg.seed, r])
        cents = _kmeanspp_init(Z, rng)
        cents, labels, inertia = _lloyd(Z, cents, cfg.max_iter)
        if best is None or inertia < best[0]:
            best = (inertia, cents, labels)
    _, cond_cents, labels = best
    raw_cents = np.vstack([X[labels == c].mean(axis=0) for c in (0, 1)])
    model = KMeansModel(centroids=raw_cents, cluster_to_label=(0, 1), config=cfg,
                        offset=offset, scale=scale, cond_centroids=cond_cents)
    if calibration is not None:
        x_cal, y_cal = calibration
        z_cal = _condition(x_cal, offset, scale)
        d2 = ((z_cal[:, None, :] - cond_cents[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        acc_id = float(np.mean(assign == np.asarray(y_cal, dtype=int)))
        mapping = (0, 1) if acc_id >= 1.0 - acc_id else (1, 0)
    else:
        d = raw_cents.shape[1]
        high = slice(3 * d // 4, d)
        fake_cluster = int(np.argmax(raw_cents[:, high].mean(axis=1)))
        mapping = (1, 0) if fake_cluster == 0 else (0, 1)
    model.cluster_to_label = mapping
    return model


def _scores(model, X):
    """Decision scores with the shared sign convention: > 0 means fake."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(model, (SvmModel, LogRegModel)):
        if X.shape[1] != model.weights.size:
            raise ValueError(
                f"feature length {X.shape[1]} does not match model ({model.weights.size})"
            )
        raw = X @ model.weights + model.bias
        if isinstance(model, LogRegModel):
            return _sigmoid(raw), raw
        return raw, raw
    if isinstance(model, KMeansModel):
        if X.shape[1] != model.centroids.shape[1]:
            raise ValueError(
                f"feature length {X.shape[1]} does not match model ({model.centroids.shape[1]})"
            )
        if model.cond_centroids is not None:
            pts = _condition(X, model.offset, model.scale)
            cents = model.cond_centroids
        else:
            pts, cents = X, model.centroids
        dist = np.sqrt(((pts[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2))
        real_c = model.cluster_to_label.index(0)
        margin = dist[:, real_c] - dist[:, 1 - real_c]
        return margin, margin
    raise TypeError(f"unknown model type {type(model).__name__}")


def predict(model, feature):
    """Classify one feature vector, returning (label, score).

    SVM scores are w.x + b, logistic scores are the sigmoid probability,
    2-means scores are the distance margin (real-centroid distance minus
    fake-centroid distance).  A score exactly on the decision boundary
    predicts 0 (real).
    """
    score, raw = _scores(model, feature)
    # probability > 0.5 iff raw > 0, so one sign test covers every kind
    return int(raw[0] > 0.0), float(score[0])


def _predict_labels(model, X):
    score, raw = _scores(model, X)
    return (raw > 0.0).astype(int)


def evaluate(model, X, y) -> EvalReport:
    """Accuracy and 2x2 confusion over a labeled test set.

    For 2-means models the report also carries the best-mapping accuracy,
    the maximum over the two cluster-to-label bijections.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("test set must be non-empty")
    preds = _predict_labels(model, X)
    confusion = np.zeros((2, 2), dtype=int)
    for t, p in zip(y, preds):
        confusion[t, p] += 1
    acc = float(np.trace(confusion) / y.size)
    best = None
    if isinstance(model, KMeansModel):
        best = max(acc, float(np.mean((1 - preds) == y)))
    return EvalReport(accuracy=acc, confusion=confusion, n=int(y.size),
                      best_mapping_accuracy=best)


def majority_vote(frame_labels) -> int:
    """Most frequent 0/1 label; an exact tie counts as fake (1)."""
    labels = list(frame_labels)
    if not labels:
        raise ValueError("cannot vote on an empty label list")
    ones = sum(1 for v in labels if v == 1)
    return 1 if 2 * ones >= len(labels) else 0


def vote_by_group(groups, labels) -> dict:
    """Collapse per-frame labels to one majority vote per group.

    Groups keep first-seen order; a None group would merge unrelated
    frames, so callers should substitute unique ids beforehand.
    """
    buckets: dict = {}
    order = []
    for g, v in zip(groups, labels):
        if g not in buckets:
            buckets[g] = []
            order.append(g)
        buckets[g].append(v)
    return {g: majority_vote(buckets[g]) for g in order}


# --- plain-text model files -------------------------------------------------

_FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_vec(v) -> str:
    return " ".join(_fmt(x) for x in v)


def save_model(model, path) -> None:
    """Write a model as versioned key/value text; doubles keep 17 digits."""
    lines = [f"format_version {_FORMAT_VERSION}"]
    if isinstance(model, SvmModel):
        cfg = model.config
        lines += [
            "model_kind svm",
            f"feature_len {model.weights.size}",
            f"c {_fmt(cfg.C)}",
            f"epochs {cfg.epochs}",
            f"seed {cfg.seed}",
            f"bias {_fmt(model.bias)}",
            f"weights {_fmt_vec(model.weights)}",
        ]
    elif isinstance(model, LogRegModel):
        cfg = model.config
        lines += [
            "model_kind logreg",
            f"feature_len {model.weights.size}",
            f"learning_rate {_fmt(cfg.learning_rate)}",
            f"l2 {_fmt(cfg.l2)}",
            f"epochs {cfg.epochs}",
            f"seed {cfg.seed}",
            f"bias {_fmt(model.bias)}",
            f"weights {_fmt_vec(model.weights)}",
        ]
    elif isinstance(model, KMeansModel):
        cfg = model.config
        lines += [
            "model_kind kmeans",
            f"feature_len {model.centroids.shape[1]}",
            f"seed {cfg.seed}",
            f"max_iter {cfg.max_iter}",
            f"n_init {cfg.n_init}",
            f"cluster_to_label {model.cluster_to_label[0]} {model.cluster_to_label[1]}",
            f"centroid_0 {_fmt_vec(model.centroids[0])}",
            f"centroid_1 {_fmt_vec(model.centroids[1])}",
        ]
        if model.cond_centroids is not None:
            lines += [
                f"offset {_fmt_vec(model.offset)}",
                f"scale {_fmt_vec(model.scale)}",
                f"cond_centroid_0 {_fmt_vec(model.cond_centroids[0])}",
                f"cond_centroid_1 {_fmt_vec(model.cond_centroids[1])}",
            ]
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_model(path):
    """Read a model file written by save_model."""
    fields: dict[str, str] = {}
    with open(path, encoding="ascii") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            key, _, value = line.partition(" ")
            fields[key] = value
    if fields.get("format_version") != str(_FORMAT_VERSION):
        raise ValueError(f"unsupported model format version in {path}")
    kind = fields.get("model_kind")

    def vec(key):
        return np.array(fields[key].split(), dtype=float)

    try:
        if kind == "svm":
            cfg = SvmConfig(C=float(fields["c"]), epochs=int(fields["epochs"]),
                            seed=int(fields["seed"]))
            return SvmModel(weights=vec("weights"), bias=float(fields["bias"]), config=cfg)
        if kind == "logreg":
            cfg = LogRegConfig(learning_rate=float(fields["learning_rate"]),
                               l2=float(fields["l2"]), epochs=int(fields["epochs"]),
                               seed=int(fields["seed"]))
            return LogRegModel(weights=vec("weights"), bias=float(fields["bias"]), config=cfg)
        if kind == "kmeans":
            cfg = KMeansConfig(seed=int(fields["seed"]), max_iter=int(fields["max_iter"]),
                               n_init=int(fields["n_init"]))
            mapping = tuple(int(v) for v in fields["cluster_to_label"].split())
            cents = np.vstack([vec("centroid_0"), vec("centroid_1")])
            model = KMeansModel(centroids=cents, cluster_to_label=mapping, config=cfg)
            if "cond_centroid_0" in fields:
                model.offset = vec("offset")
                model.scale = vec("scale")
                model.cond_centroids = np.vstack([vec("cond_centroid_0"),
                                                  vec("cond_centroid_1")])
            return model
    except KeyError as exc:
        raise ValueError(f"model file {path} is missing field {exc}") from None
    raise ValueError(f"unknown model_kind {kind!r} in {path}")
