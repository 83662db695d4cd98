"""CART decision tree with Gini impurity, exact tie-breaks, no pruning.

Split search: candidate thresholds are midpoints between consecutive
distinct sorted feature values; the chosen split maximizes the impurity
decrease

    gain = gini(node) - (n_left/n) * gini(left) - (n_right/n) * gini(right)

with ties broken by lower feature index, then lower threshold. Growth stops
on purity, depth, node size, or a best gain below ``min_impurity_decrease``.
Routing sends ``value <= threshold`` left.
"""

from __future__ import annotations

import numpy as np

from ..errors import (EmptyDataError, MissingCellsError, ModelFormatError,
                      NonFiniteError, WidthMismatchError)

FORMAT_VERSION = 1


def validate_training_inputs(X: np.ndarray, y: np.ndarray, what: str) -> None:
    if X.ndim != 2:
        raise ValueError(f"{what}: X must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptyDataError(f"{what}: empty training set")
    if y.shape != (X.shape[0],):
        raise ValueError(f"{what}: labels shape {y.shape} does not match "
                         f"{X.shape[0]} rows")
    if np.isnan(X).any():
        raise MissingCellsError(f"{what}: training data contains missing cells")
    if not np.isfinite(X).all():
        raise NonFiniteError(f"{what}: training data contains non-finite values")


def validate_rows(X: np.ndarray, width: int, what: str) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != width:
        raise WidthMismatchError(f"{what}: rows have width "
                                 f"{X.shape[1] if X.ndim == 2 else '?'}, "
                                 f"model was fitted on {width}")
    if not np.isfinite(X).all():
        raise NonFiniteError(f"{what}: non-finite values in rows")
    return X


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


class DecisionTree:
    """Binary CART classifier over integer class codes."""

    def __init__(self, max_depth: int | None = 16, min_samples_split: int = 2,
                 min_impurity_decrease: float = 0.0):
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be None or >= 0")
        if min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if min_impurity_decrease < 0:
            raise ValueError("min_impurity_decrease must be >= 0")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_impurity_decrease = min_impurity_decrease
        self.classes_: np.ndarray | None = None
        self.root_: dict | None = None
        self.n_features_: int | None = None

    # -- fitting -----------------------------------------------------------

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        validate_training_inputs(X, y, "decision tree fit")
        self.classes_ = np.unique(y)
        self.n_features_ = X.shape[1]
        y_enc = np.searchsorted(self.classes_, y)
        self.root_ = self._build(X, y_enc, np.arange(X.shape[0]), depth=0)
        return self

    def _leaf(self, counts: np.ndarray) -> dict:
        return {"counts": counts.astype(np.int64)}

    def _build(self, X: np.ndarray, y: np.ndarray, idx: np.ndarray,
               depth: int) -> dict:
        counts = np.bincount(y[idx], minlength=len(self.classes_))
        if (counts > 0).sum() <= 1:
            return self._leaf(counts)
        if self.max_depth is not None and depth >= self.max_depth:
            return self._leaf(counts)
        if len(idx) < self.min_samples_split:
            return self._leaf(counts)

        best = self._best_split(X, y, idx, counts)
        if best is None or best[0] < self.min_impurity_decrease:
            return self._leaf(counts)
        _, feature, threshold = best

        mask = X[idx, feature] <= threshold
        left = self._build(X, y, idx[mask], depth + 1)
        right = self._build(X, y, idx[~mask], depth + 1)
        return {"feature": int(feature), "threshold": float(threshold),
                "left": left, "right": right}

    def _best_split(self, X: np.ndarray, y: np.ndarray, idx: np.ndarray,
                    counts: np.ndarray) -> tuple[float, int, float] | None:
        n = len(idx)
        n_classes = len(self.classes_)
        parent_gini = _gini(counts)
        best: tuple[float, int, float] | None = None

        for feature in range(X.shape[1]):
            col = X[idx, feature]
            order = np.argsort(col, kind="stable")
            xs = col[order]
            boundaries = np.flatnonzero(xs[:-1] != xs[1:])
            if boundaries.size == 0:
                continue

            one_hot = np.zeros((n, n_classes), dtype=np.float64)
            one_hot[np.arange(n), y[idx][order]] = 1.0
            cum = np.cumsum(one_hot, axis=0)

            left_counts = cum[boundaries]
            right_counts = counts[None, :] - left_counts
            n_left = (boundaries + 1).astype(np.float64)
            n_right = n - n_left
            gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
            gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
            gains = parent_gini - (n_left / n) * gini_left - (n_right / n) * gini_right

            pos = int(np.argmax(gains))  # first max: lowest threshold wins ties
            gain = float(gains[pos])
            if best is None or gain > best[0]:  # strict: lowest feature wins ties
                b = boundaries[pos]
                threshold = (xs[b] + xs[b + 1]) / 2.0
                best = (gain, feature, float(threshold))
        return best

    # -- prediction --------------------------------------------------------

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        """Leaf class-count vector per row (columns follow ``classes_``)."""
        if self.root_ is None:
            raise ValueError("model is not fitted")
        X = validate_rows(X, self.n_features_, "decision tree predict")
        out = np.zeros((X.shape[0], len(self.classes_)), dtype=np.float64)
        self._route(self.root_, X, np.arange(X.shape[0]), out)
        return out

    def _route(self, node: dict, X: np.ndarray, idx: np.ndarray,
               out: np.ndarray) -> None:
        if idx.size == 0:
            return
        if "counts" in node:
            out[idx] = node["counts"]
            return
        mask = X[idx, node["feature"]] <= node["threshold"]
        self._route(node["left"], X, idx[mask], out)
        self._route(node["right"], X, idx[~mask], out)

    def predict(self, X: np.ndarray) -> np.ndarray:
        scores = self.predict_scores(X)
        # first argmax = lowest class code on leaf-count ties
        return self.classes_[np.argmax(scores, axis=1)]

    # -- introspection and serialization ------------------------------------

    def depth(self) -> int:
        def d(node):
            if "counts" in node:
                return 0
            return 1 + max(d(node["left"]), d(node["right"]))
        return d(self.root_) if self.root_ is not None else 0

    def n_leaves(self) -> int:
        def c(node):
            if "counts" in node:
                return 1
            return c(node["left"]) + c(node["right"])
        return c(self.root_) if self.root_ is not None else 0

    def to_json_dict(self) -> dict:
        if self.root_ is None:
            raise ValueError("model is not fitted")

        def encode(node):
            if "counts" in node:
                return {"counts": [int(c) for c in node["counts"]]}
            return {"feature": node["feature"], "threshold": float(node["threshold"]),
                    "left": encode(node["left"]), "right": encode(node["right"])}

        return {
            "format": "hydet-model", "version": FORMAT_VERSION,
            "kind": "decision_tree",
            "params": {"max_depth": self.max_depth,
                       "min_samples_split": self.min_samples_split,
                       "min_impurity_decrease": self.min_impurity_decrease},
            "classes": [int(c) for c in self.classes_],
            "n_features": self.n_features_,
            "tree": encode(self.root_),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DecisionTree":
        if data.get("kind") != "decision_tree":
            raise ModelFormatError(f"not a decision_tree payload: {data.get('kind')!r}")
        params = data["params"]
        model = cls(max_depth=params["max_depth"],
                    min_samples_split=params["min_samples_split"],
                    min_impurity_decrease=params["min_impurity_decrease"])
        model.classes_ = np.asarray(data["classes"], dtype=np.int64)
        model.n_features_ = int(data["n_features"])

        def decode(node):
            if "counts" in node:
                return {"counts": np.asarray(node["counts"], dtype=np.int64)}
            return {"feature": int(node["feature"]),
                    "threshold": float(node["threshold"]),
                    "left": decode(node["left"]), "right": decode(node["right"])}

        model.root_ = decode(data["tree"])
        return model
