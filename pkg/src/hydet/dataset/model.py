"""Domain types for labeled multichannel well time series."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import IntEnum
from typing import Mapping, Sequence

import numpy as np

from ..errors import EmptyDataError, TimestampOrderError


class ClassLabel(IntEnum):
    """Operational condition of a well episode. Codes are fixed: 0/1/2."""

    NORMAL = 0
    RAPID_LOSS = 1
    HYDRATE = 2

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @classmethod
    def from_name(cls, name: str) -> "ClassLabel":
        for label, display in _DISPLAY_NAMES.items():
            if name in (display, label.name):
                return label
        raise ValueError(f"unknown class label name: {name!r}")


_DISPLAY_NAMES = {
    ClassLabel.NORMAL: "NormalCondition",
    ClassLabel.RAPID_LOSS: "RapidProductivityLoss",
    ClassLabel.HYDRATE: "Hydrate",
}


@dataclass(frozen=True)
class SensorVariable:
    """A named sensor channel with its physical unit."""

    name: str
    unit: str


#: The four process variables used for modeling, in canonical column order.
CANONICAL_VARIABLES = (
    SensorVariable("P-TPT", "Pa"),
    SensorVariable("T-TPT", "degC"),
    SensorVariable("P-MON-CKP", "Pa"),
    SensorVariable("T-JUS-CKP", "degC"),
)

CANONICAL_VARIABLE_NAMES = tuple(v.name for v in CANONICAL_VARIABLES)

_CANONICAL_BY_NAME = {v.name: v for v in CANONICAL_VARIABLES}


def variable_info(name: str) -> SensorVariable:
    """Registry lookup; non-canonical channels carry no unit guarantee."""
    return _CANONICAL_BY_NAME.get(name, SensorVariable(name, ""))


Timestamp = int | datetime


@dataclass(frozen=True)
class TimeSeriesInstance:
    """One labeled well episode.

    ``channels`` maps variable name to per-timestep readings, with None for
    missing cells. Every channel has exactly one reading per timestamp.
    """

    instance_id: str
    label: ClassLabel
    timestamps: tuple[Timestamp, ...]
    channels: Mapping[str, tuple[float | None, ...]]

    def __post_init__(self):
        n = len(self.timestamps)
        if n == 0:
            raise EmptyDataError(f"instance {self.instance_id!r} has zero rows")
        if not self.channels:
            raise EmptyDataError(f"instance {self.instance_id!r} has no channels")
        for name, values in self.channels.items():
            if len(values) != n:
                raise ValueError(
                    f"instance {self.instance_id!r} channel {name!r}: "
                    f"{len(values)} values for {n} timestamps")
        for i in range(1, n):
            if self.timestamps[i] < self.timestamps[i - 1]:  # type: ignore[operator]
                raise TimestampOrderError(
                    f"instance {self.instance_id!r}: timestamp at row {i} "
                    f"({self.timestamps[i]}) precedes row {i - 1}")

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(self.channels)


@dataclass(frozen=True)
class ManifestEntry:
    instance_id: str
    path: str
    label: ClassLabel


@dataclass(frozen=True)
class DatasetManifest:
    """Directory inventory: one entry per instance file plus class counts."""

    entries: tuple[ManifestEntry, ...]
    class_counts: Mapping[ClassLabel, int]
    skipped_dirs: tuple[str, ...] = ()

    def __post_init__(self):
        if sum(self.class_counts.values()) != len(self.entries):
            raise ValueError("class_counts does not sum to the entry count")
        paths = [e.path for e in self.entries]
        if len(set(paths)) != len(paths):
            raise ValueError("manifest contains duplicate paths")

    def to_json_dict(self) -> dict:
        return {
            "instances": [
                {"id": e.instance_id, "path": e.path, "label": e.label.display_name}
                for e in self.entries
            ],
            "class_counts": {
                label.display_name: int(self.class_counts.get(label, 0))
                for label in ClassLabel
            },
        }


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-per-timestamp numeric table; NaN marks a missing reading.

    ``origin`` records, per row, the source instance id and timestamp index
    so that partitions can be traced back to episodes.
    """

    column_names: tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray
    origin: tuple[tuple[str, int], ...]

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if values.ndim != 2 or values.shape[1] != len(self.column_names):
            raise ValueError(f"values shape {values.shape} does not match "
                             f"{len(self.column_names)} columns")
        if labels.shape != (values.shape[0],):
            raise ValueError("labels length does not match row count")
        if len(self.origin) != values.shape[0]:
            raise ValueError("origin length does not match row count")
        values.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def take(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            column_names=self.column_names,
            values=self.values[idx].copy(),
            labels=self.labels[idx].copy(),
            origin=tuple(self.origin[i] for i in idx),
        )

    def with_values(self, values: np.ndarray) -> "FeatureMatrix":
        """Same rows/labels/origin with a replaced value grid."""
        return FeatureMatrix(self.column_names, values, self.labels.copy(), self.origin)


@dataclass(frozen=True)
class SplitSpec:
    """Parameters of the deterministic train/test partition."""

    test_fraction: float = 0.25
    seed: int = 42
    mode: str = "row"
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0,1), got {self.test_fraction}")
        if self.mode not in ("row", "instance"):
            raise ValueError(f"mode must be 'row' or 'instance', got {self.mode!r}")
