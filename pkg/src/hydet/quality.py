"""Data-quality audit and leak-free preprocessing.

The audit covers the three failure modes of raw well telemetry: missing
readings, frozen (stuck-sensor) instance-channels, and boxplot outliers
beyond Tukey fences. Preprocessing models (column-mean imputer, fences for
winsorization, z-score/min-max normalizer) are fitted on training data only
and applied anywhere.

Quartiles use linear interpolation between order statistics at position
(n-1)*p; fences are q1 - k*iqr and q3 + k*iqr with k=1.5 by default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (AllMissingColumnError, EmptyDataError, MissingCellsError,
                     NonFiniteError, WidthMismatchError)
from .dataset.model import FeatureMatrix, TimeSeriesInstance


# ---------------------------------------------------------------------------
# quantiles and boxplot statistics


def quantile(values: np.ndarray, p: float, method: str = "linear") -> float:
    """Quantile of a 1-D array of finite values.

    ``linear``: interpolate between order statistics at position (n-1)*p.
    ``nearest``: the order statistic at round((n-1)*p).
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise EmptyDataError("quantile of empty sample")
    pos = (x.size - 1) * p
    if method == "nearest":
        return float(x[int(np.floor(pos + 0.5))])
    if method != "linear":
        raise ValueError(f"unknown quantile method {method!r}")
    lo = int(np.floor(pos))
    hi = int(np.ceil(pos))
    if lo == hi:
        return float(x[lo])
    frac = pos - lo
    # two-sided lerp with a bracket clamp: plain x[lo]*(1-frac)+x[hi]*frac
    # can underflow on subnormals and break quantile monotonicity by an ulp
    a, b = float(x[lo]), float(x[hi])
    diff = b - a
    r = a + frac * diff if frac < 0.5 else b - diff * (1.0 - frac)
    return min(max(r, a), b)


@dataclass(frozen=True)
class BoxplotStats:
    q1: float
    median: float
    q3: float
    iqr: float
    lower_fence: float
    upper_fence: float
    outlier_row_indices: tuple[int, ...]

    @property
    def n_outliers(self) -> int:
        return len(self.outlier_row_indices)

    def to_json_dict(self) -> dict:
        return {
            "q1": self.q1, "median": self.median, "q3": self.q3,
            "iqr": self.iqr, "lower_fence": self.lower_fence,
            "upper_fence": self.upper_fence,
            "outlier_row_indices": list(self.outlier_row_indices),
        }


def boxplot_stats(column: np.ndarray, tukey_k: float = 1.5,
                  quartile_method: str = "linear") -> BoxplotStats:
    """Five-number/fence statistics of one column; NaN cells are ignored
    for the quantiles and never flagged as outliers."""
    col = np.asarray(column, dtype=np.float64)
    observed = ~np.isnan(col)
    x = col[observed]
    if x.size < 4:
        raise EmptyDataError(f"boxplot needs >= 4 observed values, have {x.size}")
    q1 = quantile(x, 0.25, quartile_method)
    med = quantile(x, 0.50, quartile_method)
    q3 = quantile(x, 0.75, quartile_method)
    iqr = q3 - q1
    lower = q1 - tukey_k * iqr
    upper = q3 + tukey_k * iqr
    outside = observed & ((col < lower) | (col > upper))
    return BoxplotStats(q1=q1, median=med, q3=q3, iqr=iqr,
                        lower_fence=lower, upper_fence=upper,
                        outlier_row_indices=tuple(np.flatnonzero(outside).tolist()))


# ---------------------------------------------------------------------------
# audits


@dataclass(frozen=True)
class MissingScan:
    per_column: tuple[int, ...]
    per_column_fraction: tuple[float, ...]
    n_rows: int
    overall_fraction: float


def scan_missing(matrix: FeatureMatrix) -> MissingScan:
    if matrix.n_rows == 0:
        raise EmptyDataError("scan_missing on empty matrix")
    missing = np.isnan(matrix.values)
    per_col = missing.sum(axis=0)
    return MissingScan(
        per_column=tuple(int(c) for c in per_col),
        per_column_fraction=tuple(float(c) / matrix.n_rows for c in per_col),
        n_rows=matrix.n_rows,
        overall_fraction=float(missing.sum()) / missing.size,
    )


def detect_frozen(instance: TimeSeriesInstance, min_length: int = 2) -> set[str]:
    """Channels whose observed values are all exactly equal.

    A channel qualifies only with at least ``min_length`` observed values;
    all-missing channels are empty, not frozen (see :func:`detect_empty`).
    """
    if min_length < 2:
        raise ValueError("min_length must be >= 2")
    frozen = set()
    for name, values in instance.channels.items():
        observed = [v for v in values if v is not None]
        if len(observed) >= min_length and all(v == observed[0] for v in observed):
            frozen.add(name)
    return frozen


def detect_empty(instance: TimeSeriesInstance) -> set[str]:
    return {name for name, values in instance.channels.items()
            if all(v is None for v in values)}


# ---------------------------------------------------------------------------
# fitted preprocessing models


@dataclass(frozen=True)
class ImputationModel:
    column_names: tuple[str, ...]
    means: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {"columns": list(self.column_names), "means": list(self.means)}


def fit_imputer(train: FeatureMatrix) -> ImputationModel:
    means = []
    for j, name in enumerate(train.column_names):
        col = train.values[:, j]
        observed = col[~np.isnan(col)]
        if observed.size == 0:
            raise AllMissingColumnError(f"column {name!r} has no observed values")
        mean = float(observed.mean())
        if not np.isfinite(mean):
            raise NonFiniteError(f"column {name!r}: training mean is not finite")
        means.append(mean)
    return ImputationModel(column_names=train.column_names, means=tuple(means))


def apply_imputer(model: ImputationModel, matrix: FeatureMatrix) -> FeatureMatrix:
    _check_columns(model.column_names, matrix)
    values = matrix.values.copy()
    for j, mean in enumerate(model.means):
        col = values[:, j]
        col[np.isnan(col)] = mean
    return matrix.with_values(values)


def fit_boxplots(train: FeatureMatrix, tukey_k: float = 1.5,
                 quartile_method: str = "linear") -> tuple[BoxplotStats, ...]:
    return tuple(boxplot_stats(train.values[:, j], tukey_k, quartile_method)
                 for j in range(train.n_cols))


def treat_outliers(matrix: FeatureMatrix,
                   stats: Sequence[BoxplotStats]) -> FeatureMatrix:
    """Winsorize: clamp observed values into [lower_fence, upper_fence].

    Keeps the row count intact (deletion would change totals) and is
    idempotent. Missing cells pass through.
    """
    if len(stats) != matrix.n_cols:
        raise WidthMismatchError(f"{len(stats)} fence sets for "
                                 f"{matrix.n_cols} columns")
    values = matrix.values.copy()
    for j, st in enumerate(stats):
        col = values[:, j]
        observed = ~np.isnan(col)
        col[observed] = np.clip(col[observed], st.lower_fence, st.upper_fence)
    return matrix.with_values(values)


@dataclass(frozen=True)
class NormalizationModel:
    column_names: tuple[str, ...]
    center: tuple[float, ...]
    scale: tuple[float, ...]
    mode: str = "zscore"

    @property
    def zero_scale_columns(self) -> tuple[str, ...]:
        return tuple(name for name, s in zip(self.column_names, self.scale)
                     if s == 0.0)

    def to_json_dict(self) -> dict:
        return {"columns": list(self.column_names), "center": list(self.center),
                "scale": list(self.scale), "mode": self.mode}


def fit_normalizer(train: FeatureMatrix, mode: str = "zscore") -> NormalizationModel:
    """Fit per-column center/scale. ``zscore``: mean and population standard
    deviation. ``minmax``: min and range. Requires a fully observed matrix
    (imputation runs first)."""
    if np.isnan(train.values).any():
        raise MissingCellsError("normalizer fit requires no missing cells")
    if mode not in ("zscore", "minmax"):
        raise ValueError(f"unknown normalization mode {mode!r}")
    center, scale = [], []
    for j in range(train.n_cols):
        col = train.values[:, j]
        if mode == "zscore":
            center.append(float(col.mean()))
            scale.append(float(np.sqrt(np.mean((col - col.mean()) ** 2))))
        else:
            center.append(float(col.min()))
            scale.append(float(col.max() - col.min()))
    return NormalizationModel(column_names=train.column_names,
                              center=tuple(center), scale=tuple(scale), mode=mode)


def apply_normalizer(model: NormalizationModel, matrix: FeatureMatrix) -> FeatureMatrix:
    if np.isnan(matrix.values).any():
        raise MissingCellsError("normalizer requires no missing cells")
    _check_columns(model.column_names, matrix)
    values = matrix.values.copy()
    for j, (c, s) in enumerate(zip(model.center, model.scale)):
        values[:, j] -= c
        if s != 0.0:  # constant columns pass through centered-only
            values[:, j] /= s
    return matrix.with_values(values)


def _check_columns(expected: tuple[str, ...], matrix: FeatureMatrix) -> None:
    if expected != matrix.column_names:
        raise WidthMismatchError(f"fitted on columns {expected}, "
                                 f"applying to {matrix.column_names}")


# ---------------------------------------------------------------------------
# corpus-level report


@dataclass(frozen=True)
class ChannelQuality:
    name: str
    n_total: int
    n_missing: int
    missing_pct: float
    n_frozen_instance_channels: int
    frozen_pct: float
    n_empty_instance_channels: int
    boxplot: BoxplotStats
    outlier_pct: float

    def to_json_dict(self) -> dict:
        from .dataset.model import variable_info
        return {
            "name": self.name,
            "unit": variable_info(self.name).unit,
            "n_total": self.n_total,
            "n_missing": self.n_missing,
            "missing_pct": self.missing_pct,
            "n_frozen_instance_channels": self.n_frozen_instance_channels,
            "frozen_pct": self.frozen_pct,
            "n_empty_instance_channels": self.n_empty_instance_channels,
            "boxplot": self.boxplot.to_json_dict(),
            "n_outliers": self.boxplot.n_outliers,
            "outlier_pct": self.outlier_pct,
        }


@dataclass(frozen=True)
class QualityReport:
    channels: tuple[ChannelQuality, ...]
    n_instances: int
    total_cells: int
    overall_missing_pct: float
    overall_frozen_pct: float
    overall_outlier_pct: float

    def to_json_dict(self) -> dict:
        return {
            "channels": [c.to_json_dict() for c in self.channels],
            "n_instances": self.n_instances,
            "total_cells": self.total_cells,
            "overall_missing_pct": self.overall_missing_pct,
            "overall_frozen_pct": self.overall_frozen_pct,
            "overall_outlier_pct": self.overall_outlier_pct,
        }


def quality_report(instances: Sequence[TimeSeriesInstance],
                   matrix: FeatureMatrix,
                   min_length: int = 2,
                   tukey_k: float = 1.5,
                   quartile_method: str = "linear") -> QualityReport:
    """Aggregate missing/frozen/outlier audits over a corpus.

    ``matrix`` must be the flattening of ``instances`` over the channels to
    audit; all statistics are computed on raw (pre-imputation) data.
    Percentages use the full cell count of each channel as denominator.
    """
    if matrix.n_rows == 0:
        raise EmptyDataError("quality_report on empty matrix")
    n = matrix.n_rows
    missing = np.isnan(matrix.values)

    frozen_counts = {name: 0 for name in matrix.column_names}
    empty_counts = {name: 0 for name in matrix.column_names}
    for inst in instances:
        frozen = detect_frozen(inst, min_length)
        empty = detect_empty(inst)
        for name in matrix.column_names:
            if name in frozen:
                frozen_counts[name] += 1
            if name in empty:
                empty_counts[name] += 1

    n_inst = len(instances)
    channels = []
    total_outliers = 0
    for j, name in enumerate(matrix.column_names):
        bp = boxplot_stats(matrix.values[:, j], tukey_k, quartile_method)
        total_outliers += bp.n_outliers
        channels.append(ChannelQuality(
            name=name,
            n_total=n,
            n_missing=int(missing[:, j].sum()),
            missing_pct=100.0 * missing[:, j].sum() / n,
            n_frozen_instance_channels=frozen_counts[name],
            frozen_pct=100.0 * frozen_counts[name] / n_inst,
            n_empty_instance_channels=empty_counts[name],
            boxplot=bp,
            outlier_pct=100.0 * bp.n_outliers / n,
        ))

    total_cells = n * matrix.n_cols
    total_inst_channels = n_inst * matrix.n_cols
    return QualityReport(
        channels=tuple(channels),
        n_instances=n_inst,
        total_cells=total_cells,
        overall_missing_pct=100.0 * missing.sum() / total_cells,
        overall_frozen_pct=100.0 * sum(frozen_counts.values()) / total_inst_channels,
        overall_outlier_pct=100.0 * total_outliers / total_cells,
    )


# ---------------------------------------------------------------------------
# boxplot SVG export

_SVG_W, _SVG_H = 320, 420
_PLOT_TOP, _PLOT_BOTTOM = 40, 380
_BOX_LEFT, _BOX_RIGHT = 110, 210
_MID_X = (_BOX_LEFT + _BOX_RIGHT) // 2
_MAX_DOTS = 1000


def render_boxplot_svg(column: np.ndarray, name: str, tukey_k: float = 1.5,
                       quartile_method: str = "linear") -> str:
    """Standalone SVG boxplot: box, median, whiskers to the most extreme
    in-fence values, and outlier dots (capped at 1000 for file size)."""
    stats = boxplot_stats(column, tukey_k, quartile_method)
    col = np.asarray(column, dtype=np.float64)
    observed = col[~np.isnan(col)]
    inside = observed[(observed >= stats.lower_fence) & (observed <= stats.upper_fence)]
    whisker_lo = float(inside.min())
    whisker_hi = float(inside.max())
    outliers = [float(col[i]) for i in stats.outlier_row_indices[:_MAX_DOTS]]

    vmin = min([whisker_lo] + outliers)
    vmax = max([whisker_hi] + outliers)
    span = vmax - vmin or 1.0

    def y(v: float) -> float:
        return _PLOT_BOTTOM - (v - vmin) / span * (_PLOT_BOTTOM - _PLOT_TOP)

    def line(x1, y1, x2, y2, width=1.5):
        return (f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                f'stroke="black" stroke-width="{width}"/>')

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<title>{name}</title>',
        f'<text x="{_MID_X}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{name}</text>',
        # whiskers
        line(_MID_X, y(whisker_lo), _MID_X, y(stats.q1)),
        line(_MID_X, y(stats.q3), _MID_X, y(whisker_hi)),
        line(_BOX_LEFT + 20, y(whisker_lo), _BOX_RIGHT - 20, y(whisker_lo)),
        line(_BOX_LEFT + 20, y(whisker_hi), _BOX_RIGHT - 20, y(whisker_hi)),
        # box and median
        f'<rect x="{_BOX_LEFT}" y="{y(stats.q3):.1f}" '
        f'width="{_BOX_RIGHT - _BOX_LEFT}" '
        f'height="{max(y(stats.q1) - y(stats.q3), 0.5):.1f}" '
        f'fill="none" stroke="black" stroke-width="1.5"/>',
        line(_BOX_LEFT, y(stats.median), _BOX_RIGHT, y(stats.median), 2.5),
    ]
    for v in outliers:
        parts.append(f'<circle cx="{_MID_X}" cy="{y(v):.1f}" r="2.5" '
                     f'fill="none" stroke="black"/>')
    if stats.n_outliers > _MAX_DOTS:
        parts.append(f'<text x="{_MID_X}" y="{_SVG_H - 8}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">'
                     f'{stats.n_outliers} outliers ({_MAX_DOTS} drawn)</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
