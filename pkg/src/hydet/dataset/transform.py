"""Flattening episodes into a row-per-timestamp matrix, and splitting it."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import EmptyDataError, MissingVariableError, SplitError
from ..rng import CounterRng
from .model import FeatureMatrix, SplitSpec, TimeSeriesInstance


def flatten(instances: Sequence[TimeSeriesInstance],
            variables: Sequence[str]) -> FeatureMatrix:
    """One matrix row per (instance, timestamp); labels broadcast per instance."""
    if not instances:
        raise EmptyDataError("flatten: no instances")
    if not variables:
        raise EmptyDataError("flatten: no variables requested")
    variables = tuple(variables)

    for inst in instances:
        for var in variables:
            if var not in inst.channels:
                raise MissingVariableError(
                    f"instance {inst.instance_id!r} lacks channel {var!r}")

    n = sum(len(inst) for inst in instances)
    values = np.empty((n, len(variables)), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    origin: list[tuple[str, int]] = []

    row = 0
    for inst in instances:
        m = len(inst)
        for j, var in enumerate(variables):
            col = np.array([np.nan if v is None else v for v in inst.channels[var]],
                           dtype=np.float64)
            values[row:row + m, j] = col
        labels[row:row + m] = int(inst.label)
        origin.extend((inst.instance_id, t) for t in range(m))
        row += m

    return FeatureMatrix(column_names=variables, values=values, labels=labels,
                         origin=tuple(origin))


def _rounded_count(fraction: float, n: int) -> int:
    # round-half-up keeps per-class counts within one row of proportionality
    return int(np.floor(fraction * n + 0.5))


def _pick_test_rows(indices: np.ndarray, fraction: float, rng: CounterRng) -> np.ndarray:
    k = _rounded_count(fraction, len(indices))
    order = rng.permutation(len(indices))
    return indices[order[:k]]


def split(matrix: FeatureMatrix, spec: SplitSpec) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Deterministic, disjoint and exhaustive train/test partition.

    Row order within each part preserves the original matrix order. In
    instance mode all rows of an episode land on the same side.
    """
    n = matrix.n_rows
    if n < 2:
        raise SplitError(f"need at least 2 rows to split, have {n}")
    rng = CounterRng(spec.seed)

    if spec.mode == "row":
        test_idx = _split_row(matrix, spec, rng)
    else:
        test_idx = _split_instance(matrix, spec, rng)

    if len(test_idx) == 0 or len(test_idx) == n:
        raise SplitError(
            f"test_fraction {spec.test_fraction} yields an empty part "
            f"({len(test_idx)} of {n} rows in test)")

    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train = matrix.take(np.flatnonzero(~mask))
    test = matrix.take(np.flatnonzero(mask))
    return train, test


def _split_row(matrix: FeatureMatrix, spec: SplitSpec, rng: CounterRng) -> np.ndarray:
    if not spec.stratified:
        return _pick_test_rows(np.arange(matrix.n_rows), spec.test_fraction,
                               rng.derive(0))
    picks = []
    for label in np.unique(matrix.labels):
        rows = np.flatnonzero(matrix.labels == label)
        if len(rows) < 2:
            raise SplitError(f"class {int(label)} has {len(rows)} row(s); "
                             "stratified row split needs at least 2")
        picks.append(_pick_test_rows(rows, spec.test_fraction,
                                     rng.derive(int(label))))
    return np.concatenate(picks)


def _split_instance(matrix: FeatureMatrix, spec: SplitSpec,
                    rng: CounterRng) -> np.ndarray:
    inst_ids: list[str] = []
    inst_label: dict[str, int] = {}
    inst_rows: dict[str, list[int]] = {}
    for row, (iid, _) in enumerate(matrix.origin):
        if iid not in inst_rows:
            inst_ids.append(iid)
            inst_rows[iid] = []
            inst_label[iid] = int(matrix.labels[row])
        inst_rows[iid].append(row)

    if len(inst_ids) < 2:
        raise SplitError("instance split needs at least 2 instances")

    def rows_of(chosen: Sequence[int]) -> np.ndarray:
        out: list[int] = []
        for i in chosen:
            out.extend(inst_rows[inst_ids[i]])
        return np.asarray(out, dtype=np.int64)

    if not spec.stratified:
        test_inst = _pick_test_rows(np.arange(len(inst_ids)), spec.test_fraction,
                                    rng.derive(0))
        return rows_of(test_inst)

    labels_arr = np.array([inst_label[i] for i in inst_ids])
    picks = []
    for label in np.unique(labels_arr):
        members = np.flatnonzero(labels_arr == label)
        if len(members) < 2:
            raise SplitError(f"class {int(label)} has {len(members)} instance(s); "
                             "stratified instance split needs at least 2")
        picks.append(_pick_test_rows(members, spec.test_fraction,
                                     rng.derive(int(label))))
    return rows_of(np.concatenate(picks))
