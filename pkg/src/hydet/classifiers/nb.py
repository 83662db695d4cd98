"""Gaussian naive Bayes scoring under conditional feature independence.

Per class c and feature j the model stores the class-conditional sample mean
and population variance; prediction maximizes the log-joint

    score(c | x) = log prior_c
                 + sum_j [ -0.5*log(2*pi*var_cj) - (x_j - mu_cj)^2 / (2*var_cj) ]

with argmax ties going to the lowest class code. Scores are log-joints, not
normalized probabilities. Variances are floored at

    eps = eps_rel * max_j population_variance(feature j over all rows)
"""

from __future__ import annotations

import numpy as np

from ..errors import EmptyDataError, ModelFormatError
from .tree import FORMAT_VERSION, validate_rows, validate_training_inputs

_LOG_2PI = float(np.log(2.0 * np.pi))


class GaussianNb:
    def __init__(self, eps_rel: float = 1e-9):
        if eps_rel <= 0:
            raise ValueError("eps_rel must be > 0")
        self.eps_rel = eps_rel
        self.classes_: np.ndarray | None = None
        self.priors_: np.ndarray | None = None
        self.means_: np.ndarray | None = None
        self.variances_: np.ndarray | None = None
        self.epsilon_: float | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNb":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        validate_training_inputs(X, y, "naive Bayes fit")
        self.classes_ = np.unique(y)

        total_var = np.mean((X - X.mean(axis=0)) ** 2, axis=0)
        if total_var.max() == 0.0:
            raise ValueError("every training feature is constant; Gaussian "
                             "class-conditional densities are undefined")
        self.epsilon_ = float(self.eps_rel * total_var.max())

        priors, means, variances = [], [], []
        for c in self.classes_:
            rows = X[y == c]
            if rows.shape[0] < 2:
                raise EmptyDataError(f"class {int(c)} has {rows.shape[0]} row(s); "
                                     "naive Bayes needs at least 2 per class")
            priors.append(rows.shape[0] / X.shape[0])
            mu = rows.mean(axis=0)
            means.append(mu)
            variances.append(np.maximum(np.mean((rows - mu) ** 2, axis=0),
                                        self.epsilon_))
        self.priors_ = np.asarray(priors)
        self.means_ = np.vstack(means)
        self.variances_ = np.vstack(variances)
        return self

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        if self.means_ is None:
            raise ValueError("model is not fitted")
        X = validate_rows(X, self.means_.shape[1], "naive Bayes predict")
        scores = np.empty((X.shape[0], len(self.classes_)), dtype=np.float64)
        for ci in range(len(self.classes_)):
            var = self.variances_[ci]
            log_norm = -0.5 * (_LOG_2PI + np.log(var))
            quad = (X - self.means_[ci]) ** 2 / (2.0 * var)
            scores[:, ci] = np.log(self.priors_[ci]) + np.sum(log_norm - quad, axis=1)
        return scores

    def predict(self, X: np.ndarray) -> np.ndarray:
        scores = self.predict_scores(X)
        return self.classes_[np.argmax(scores, axis=1)]  # first max: lowest code

    def to_json_dict(self) -> dict:
        if self.means_ is None:
            raise ValueError("model is not fitted")
        return {
            "format": "hydet-model", "version": FORMAT_VERSION, "kind": "gaussian_nb",
            "params": {"eps_rel": self.eps_rel},
            "classes": [int(c) for c in self.classes_],
            "priors": [float(p) for p in self.priors_],
            "means": [[float(v) for v in row] for row in self.means_],
            "variances": [[float(v) for v in row] for row in self.variances_],
            "epsilon": self.epsilon_,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GaussianNb":
        if data.get("kind") != "gaussian_nb":
            raise ModelFormatError(f"not a gaussian_nb payload: {data.get('kind')!r}")
        model = cls(eps_rel=float(data["params"]["eps_rel"]))
        model.classes_ = np.asarray(data["classes"], dtype=np.int64)
        model.priors_ = np.asarray(data["priors"], dtype=np.float64)
        model.means_ = np.asarray(data["means"], dtype=np.float64)
        model.variances_ = np.asarray(data["variances"], dtype=np.float64)
        model.epsilon_ = float(data["epsilon"])
        return model
