"""The two scorer slots behind one contract: score(features) in [0, 1].

Slot A is an L2-regularized logistic scorer trained by full-batch gradient
descent. Slot B is a small random forest over raw n-gram counts. Both are
deterministic given their seed and serialize to plain JSON-compatible dicts
so bundle round-trips reproduce scores bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from litscreen.corpus import Label
from litscreen.models.vocab import FeatureVector


class TrainingError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingMeta:
    corpus_digest: str = ""
    seed: int = 0
    trained_utc: str = ""
    hyperparameters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScorerAConfig:
    l2: float = 1e-4
    learning_rate: float = 0.5
    max_epochs: int = 2000
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.l2 < 0 or self.learning_rate <= 0 or self.max_epochs < 1:
            raise ValueError("invalid scorer-A hyperparameters")


@dataclass(frozen=True)
class ScorerBConfig:
    n_trees: int = 50
    max_depth: int = 8
    min_samples_split: int = 2

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.max_depth < 1 or self.min_samples_split < 2:
            raise ValueError("invalid scorer-B hyperparameters")


# counts are clipped here before tree building; abstracts never get close
_MAX_COUNT = 255


def _labels_to_array(labels: Sequence[Label]) -> np.ndarray:
    return np.array([1.0 if l is Label.SUSPECT_ADVERSE else 0.0 for l in labels])


class _SparseCounts:
    """Row-sparse count matrix, just enough linear algebra for training."""

    def __init__(self, features: Sequence[FeatureVector], dim: int):
        self.shape = (len(features), dim)
        self.indptr = np.zeros(len(features) + 1, dtype=np.int64)
        cols = []
        vals = []
        for row, fv in enumerate(features):
            if fv.indices and fv.indices[-1] >= dim:
                raise DimensionError(
                    f"feature index {fv.indices[-1]} outside dimension {dim}"
                )
            self.indptr[row + 1] = self.indptr[row] + len(fv.indices)
            cols.extend(fv.indices)
            vals.extend(fv.counts)
        self.cols = np.array(cols, dtype=np.int64)
        self.vals = np.array(vals, dtype=np.float64)
        self._row_of = np.repeat(
            np.arange(len(features), dtype=np.int64), np.diff(self.indptr)
        )

    def matvec(self, v: np.ndarray) -> np.ndarray:
        prod = self.vals * v[self.cols]
        out = np.zeros(self.shape[0])
        np.add.at(out, self._row_of, prod)
        return out

    def rmatvec(self, u: np.ndarray) -> np.ndarray:
        return np.bincount(
            self.cols, weights=self.vals * u[self._row_of], minlength=self.shape[1]
        )

    def todense_u8(self) -> np.ndarray:
        """Counts clipped to one byte; plenty for title+abstract n-grams."""
        x = np.zeros(self.shape, dtype=np.uint8)
        x[self._row_of, self.cols] = np.minimum(self.vals, _MAX_COUNT).astype(np.uint8)
        return x


def _check_training_input(
    features: Sequence[FeatureVector], labels: Sequence[Label]
) -> None:
    if len(features) != len(labels):
        raise TrainingError("features and labels must align")
    if not features:
        raise TrainingError("empty training set")
    if len(set(labels)) < 2:
        raise TrainingError("training requires both labels")


# ---------------------------------------------------------------------------
# Slot A: logistic scorer
# ---------------------------------------------------------------------------


def _design_matvec(x, v: np.ndarray) -> np.ndarray:
    return x.matvec(v) if isinstance(x, _SparseCounts) else x @ v


def _design_rmatvec(x, u: np.ndarray) -> np.ndarray:
    return x.rmatvec(u) if isinstance(x, _SparseCounts) else x.T @ u


def logistic_loss(w: np.ndarray, x, y: np.ndarray, l2: float) -> float:
    """Mean cross-entropy plus L2 penalty on non-bias weights.

    w has d+1 entries; the last is the unregularized bias. x may be a dense
    array or the internal sparse matrix; both use the same formula.
    """
    z = _design_matvec(x, w[:-1]) + w[-1]
    per_example = np.logaddexp(0.0, z) - y * z  # log(1+e^z) - y z, stable
    return float(np.mean(per_example) + 0.5 * l2 * np.dot(w[:-1], w[:-1]))


def logistic_gradient(w: np.ndarray, x, y: np.ndarray, l2: float) -> np.ndarray:
    z = _design_matvec(x, w[:-1]) + w[-1]
    residual = _sigmoid_vec(z) - y
    grad = np.empty_like(w)
    grad[:-1] = _design_rmatvec(x, residual) / len(y) + l2 * w[:-1]
    grad[-1] = float(np.mean(residual))
    return grad


def _sigmoid_vec(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _sigmoid_scalar(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@dataclass(frozen=True)
class LogisticScorer:
    weights: tuple[float, ...]
    bias: float
    meta: TrainingMeta

    slot = "A"
    algorithm = "logistic_l2_gd"

    def score(self, fv: FeatureVector) -> float:
        z = self.bias
        d = len(self.weights)
        for idx, count in zip(fv.indices, fv.counts):
            if idx >= d:
                raise DimensionError(f"feature index {idx} outside dimension {d}")
            z += self.weights[idx] * count
        return _sigmoid_scalar(z)

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "algorithm": self.algorithm,
            "weights": list(self.weights),
            "bias": self.bias,
            "meta": _meta_to_dict(self.meta),
        }

    @staticmethod
    def from_dict(data: dict) -> "LogisticScorer":
        return LogisticScorer(
            weights=tuple(data["weights"]),
            bias=data["bias"],
            meta=_meta_from_dict(data["meta"]),
        )


def train_scorer_a(
    features: Sequence[FeatureVector],
    labels: Sequence[Label],
    config: ScorerAConfig | None = None,
    seed: int = 0,
    *,
    dim: int | None = None,
    corpus_digest: str = "",
    trained_utc: str = "",
) -> LogisticScorer:
    """Full-batch gradient descent from zeros until the loss plateaus.

    The step size halves whenever a step would increase the loss, so the
    run is monotone and needs no per-corpus tuning.
    """
    cfg = config or ScorerAConfig()
    _check_training_input(features, labels)
    d = dim if dim is not None else _infer_dim(features)
    x = _SparseCounts(features, d)
    y = _labels_to_array(labels)

    w = np.zeros(d + 1)
    loss = logistic_loss(w, x, y, cfg.l2)
    lr = cfg.learning_rate
    for _ in range(cfg.max_epochs):
        grad = logistic_gradient(w, x, y, cfg.l2)
        while True:
            candidate = w - lr * grad
            new_loss = logistic_loss(candidate, x, y, cfg.l2)
            if new_loss <= loss:
                break
            if lr < 1e-12:  # cannot descend further; keep current w
                new_loss = loss
                candidate = w
                break
            lr *= 0.5
        done = abs(loss - new_loss) < cfg.tol
        w, loss = candidate, new_loss
        if done:
            break

    meta = TrainingMeta(
        corpus_digest=corpus_digest,
        seed=seed,
        trained_utc=trained_utc,
        hyperparameters={
            "l2": cfg.l2,
            "learning_rate": cfg.learning_rate,
            "max_epochs": cfg.max_epochs,
            "tol": cfg.tol,
        },
    )
    return LogisticScorer(
        weights=tuple(float(v) for v in w[:-1]), bias=float(w[-1]), meta=meta
    )


def _infer_dim(features: Sequence[FeatureVector]) -> int:
    return 1 + max((fv.indices[-1] for fv in features if fv.indices), default=-1)


# ---------------------------------------------------------------------------
# Slot B: random forest
# ---------------------------------------------------------------------------
#
# Trees split bootstrap samples to fix the structure; leaf values are the
# positive fraction of the full training set routed through that structure.
# The forest score is the mean leaf value, so a forest of stumps on
# featureless input reproduces the class prior exactly.


@dataclass(frozen=True)
class ForestScorer:
    trees: tuple[dict, ...]  # nested {feature, threshold, left, right} | {value}
    dim: int
    meta: TrainingMeta

    slot = "B"
    algorithm = "random_forest_gini"

    def score(self, fv: FeatureVector) -> float:
        if fv.indices and fv.indices[-1] >= self.dim:
            raise DimensionError(
                f"feature index {fv.indices[-1]} outside dimension {self.dim}"
            )
        lookup = dict(zip(fv.indices, fv.counts))
        votes = []
        for tree in self.trees:
            node = tree
            while "value" not in node:
                v = min(lookup.get(node["feature"], 0), _MAX_COUNT)
                node = node["left"] if v <= node["threshold"] else node["right"]
            votes.append(node["value"])
        # exactly-rounded mean: a forest of identical stumps reproduces the
        # class prior bit-for-bit
        return math.fsum(votes) / len(votes)

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "algorithm": self.algorithm,
            "dim": self.dim,
            "trees": list(self.trees),
            "meta": _meta_to_dict(self.meta),
        }

    @staticmethod
    def from_dict(data: dict) -> "ForestScorer":
        return ForestScorer(
            trees=tuple(data["trees"]),
            dim=data["dim"],
            meta=_meta_from_dict(data["meta"]),
        )


def _best_split(
    x: np.ndarray, y: np.ndarray, idx: np.ndarray, feats: np.ndarray
) -> tuple[int, int] | None:
    """Best (feature, threshold) by Gini decrease over candidate features.

    Counts are small integers, so every integer value present at the node
    is a candidate threshold and one bincount per node covers them all.
    Ties resolve to the earliest candidate feature, then lowest threshold.
    """
    m = len(idx)
    k = len(feats)
    span = _MAX_COUNT + 1
    sub = x[np.ix_(idx, feats)].astype(np.int64)  # m x k
    flat = (sub + span * np.arange(k, dtype=np.int64)[np.newaxis, :]).ravel()
    weights = np.repeat(y[idx], k)  # aligns with row-major ravel of (m, k)
    tot = np.bincount(flat, minlength=k * span).reshape(k, span).astype(np.float64)
    pos = np.bincount(flat, weights=weights, minlength=k * span).reshape(k, span)

    left_n = np.cumsum(tot, axis=1)  # threshold t sends value <= t left
    left_pos = np.cumsum(pos, axis=1)
    right_n = m - left_n
    node_pos = left_pos[:, -1:]
    right_pos = node_pos - left_pos

    valid = (left_n > 0) & (right_n > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gini_left = 1.0 - (left_pos / left_n) ** 2 - ((left_n - left_pos) / left_n) ** 2
        gini_right = (
            1.0 - (right_pos / right_n) ** 2 - ((right_n - right_pos) / right_n) ** 2
        )
        weighted = (left_n * gini_left + right_n * gini_right) / m
    p = float(node_pos[0, 0]) / m
    parent = 1.0 - p * p - (1.0 - p) * (1.0 - p)
    decrease = np.where(valid, parent - weighted, -np.inf)
    best = int(np.argmax(decrease))
    f, t = divmod(best, span)
    if not np.isfinite(decrease[f, t]) or decrease[f, t] <= 1e-12:
        return None
    return int(feats[f]), int(t)


def _grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    cfg: ScorerBConfig,
    rng: np.random.Generator,
    n_candidates: int,
) -> dict:
    node_y = y[idx]
    if (
        depth >= cfg.max_depth
        or len(idx) < cfg.min_samples_split
        or node_y.min() == node_y.max()
        or n_candidates == 0
    ):
        return {"value": None}
    feats = rng.choice(x.shape[1], size=n_candidates, replace=False)
    split = _best_split(x, y, idx, feats)
    if split is None:
        return {"value": None}
    f, t = split
    mask = x[idx, f] <= t
    return {
        "feature": f,
        "threshold": t,
        "left": _grow_tree(x, y, idx[mask], depth + 1, cfg, rng, n_candidates),
        "right": _grow_tree(x, y, idx[~mask], depth + 1, cfg, rng, n_candidates),
    }


def _finalize_leaves(node: dict, x: np.ndarray, y: np.ndarray, idx: np.ndarray) -> dict:
    """Replace structural leaves with the full-sample positive fraction."""
    if "value" in node:
        if len(idx) == 0:
            raise TrainingError("a leaf received no training samples")
        return {"value": float(y[idx].mean())}
    mask = x[idx, node["feature"]] <= node["threshold"]
    return {
        "feature": node["feature"],
        "threshold": node["threshold"],
        "left": _finalize_leaves(node["left"], x, y, idx[mask]),
        "right": _finalize_leaves(node["right"], x, y, idx[~mask]),
    }


def train_scorer_b(
    features: Sequence[FeatureVector],
    labels: Sequence[Label],
    config: ScorerBConfig | None = None,
    seed: int = 0,
    *,
    dim: int | None = None,
    corpus_digest: str = "",
    trained_utc: str = "",
) -> ForestScorer:
    cfg = config or ScorerBConfig()
    _check_training_input(features, labels)
    d = dim if dim is not None else _infer_dim(features)
    x = _SparseCounts(features, d).todense_u8()
    y = _labels_to_array(labels)
    n = len(y)
    n_candidates = max(1, math.isqrt(d)) if d else 0

    trees = []
    for stream in np.random.SeedSequence(seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(stream)
        boot = rng.integers(0, n, size=n)
        structure = _grow_tree(x, y, boot, 0, cfg, rng, n_candidates)
        trees.append(_finalize_leaves(structure, x, y, np.arange(n)))

    meta = TrainingMeta(
        corpus_digest=corpus_digest,
        seed=seed,
        trained_utc=trained_utc,
        hyperparameters={
            "n_trees": cfg.n_trees,
            "max_depth": cfg.max_depth,
            "min_samples_split": cfg.min_samples_split,
        },
    )
    return ForestScorer(trees=tuple(trees), dim=d, meta=meta)


# ---------------------------------------------------------------------------
# Common scoring entry point
# ---------------------------------------------------------------------------


def score(scorer: LogisticScorer | ForestScorer, fv: FeatureVector) -> float:
    value = scorer.score(fv)
    if not 0.0 <= value <= 1.0:
        raise AssertionError(f"score {value} outside [0, 1]")
    return value


def _meta_to_dict(meta: TrainingMeta) -> dict:
    return {
        "corpus_digest": meta.corpus_digest,
        "seed": meta.seed,
        "trained_utc": meta.trained_utc,
        "hyperparameters": dict(meta.hyperparameters),
    }


def _meta_from_dict(data: dict) -> TrainingMeta:
    return TrainingMeta(
        corpus_digest=data["corpus_digest"],
        seed=data["seed"],
        trained_utc=data["trained_utc"],
        hyperparameters=dict(data["hyperparameters"]),
    )
