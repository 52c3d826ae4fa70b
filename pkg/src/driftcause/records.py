"""Categorical record tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, UnknownFeatureError


@dataclass(frozen=True, eq=False)
class Records:
    """Integer-coded categorical data, one column per feature.

    ``values[i, j]`` is the state of feature ``names[j]`` in record ``i``,
    in ``0 .. cardinalities[j] - 1``.
    """

    names: tuple[str, ...]
    values: np.ndarray
    cardinalities: tuple[int, ...]

    def __post_init__(self):
        names = tuple(self.names)
        values = np.asarray(self.values)
        if values.size == 0:
            values = values.reshape(0, len(names))
        if values.ndim != 2 or values.shape[1] != len(names):
            raise DataError(f"values of shape {values.shape} do not match {len(names)} columns")
        if not np.issubdtype(values.dtype, np.integer):
            raise DataError(f"records must be integer coded, got dtype {values.dtype}")
        if len(set(names)) != len(names):
            raise DataError("duplicate column names")
        cards = tuple(int(c) for c in self.cardinalities)
        if len(cards) != len(names):
            raise DataError("one cardinality per column is required")
        if len(values):
            lo, hi = values.min(axis=0), values.max(axis=0)
            for j, name in enumerate(names):
                if lo[j] < 0 or hi[j] >= cards[j]:
                    raise DataError(f"column {name!r} has states outside 0..{cards[j] - 1}")
        values = np.ascontiguousarray(values, dtype=np.int64)
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cardinalities", cards)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Records):
            return NotImplemented
        return (self.names == other.names and self.cardinalities == other.cardinalities
                and np.array_equal(self.values, other.values))

    def column_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownFeatureError(name) from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_index(name)]

    def cardinality(self, name: str) -> int:
        return self.cardinalities[self.column_index(name)]

    def take(self, rows) -> Records:
        return Records(self.names, self.values[rows], self.cardinalities)

    def select(self, names) -> Records:
        idx = [self.column_index(n) for n in names]
        return Records(tuple(names), self.values[:, idx], tuple(self.cardinalities[i] for i in idx))

    def with_column(self, name: str, column, cardinality: int) -> Records:
        if name in self.names:
            raise DataError(f"column {name!r} already present")
        column = np.asarray(column, dtype=np.int64).reshape(-1, 1)
        if column.shape[0] != len(self):
            raise DataError("new column length does not match record count")
        return Records(self.names + (name,), np.hstack([self.values, column]),
                       self.cardinalities + (int(cardinality),))

    @staticmethod
    def concat(parts) -> Records:
        parts = list(parts)
        first = parts[0]
        for p in parts[1:]:
            if p.names != first.names:
                raise DataError("cannot concatenate records with different columns")
        cards = tuple(max(c) for c in zip(*(p.cardinalities for p in parts)))
        return Records(first.names, np.vstack([p.values for p in parts]), cards)
