"""Drifting data streams with an explicit, windowed time feature."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .bayesnet import CategoricalBayesNet, add_root_parent, modify_cpt, sample
from .errors import DataError
from .graph import Dag
from .records import Records

TIME = "__time__"


def _window_starts(n, windows):
    return tuple((w * n + windows - 1) // windows for w in range(windows))


@dataclass(frozen=True, eq=False)
class DriftStream:
    """Ordered records whose last column is the window index of each record.

    ``window_starts[w]`` is the position of the first record of window w
    (windows are contiguous, so record i has time value w iff
    ``window_starts[w] <= i < window_starts[w + 1]``).
    """

    records: Records
    windows: int
    window_starts: tuple[int, ...]
    drift_points: tuple[int, ...] = ()
    time_feature: str = TIME

    def __post_init__(self):
        names = self.records.names
        if names.count(self.time_feature) != 1 or names[-1] != self.time_feature:
            raise DataError(f"time column {self.time_feature!r} must appear once, as the last column")
        if len(self.window_starts) != self.windows:
            raise DataError("one start offset per window is required")
        if self.records.cardinality(self.time_feature) != self.windows:
            raise DataError("time cardinality must equal the window count")
        expected = np.zeros(len(self.records), dtype=np.int64)
        for w, start in enumerate(self.window_starts[1:], start=1):
            expected[start:] = w
        if not np.array_equal(self.records.column(self.time_feature), expected):
            raise DataError("time values do not match the declared windows")

    def __len__(self):
        return len(self.records)

    @property
    def data_features(self) -> tuple[str, ...]:
        return self.records.names[:-1]

    @property
    def data(self) -> Records:
        return self.records.select(self.data_features)

    def window_bounds(self, w: int) -> tuple[int, int]:
        if not 0 <= w < self.windows:
            raise DataError(f"window {w} outside 0..{self.windows - 1}")
        end = self.window_starts[w + 1] if w + 1 < self.windows else len(self.records)
        return self.window_starts[w], end

    @classmethod
    def from_records(cls, records: Records, time_feature: str = TIME,
                     drift_points: Sequence[int] = ()) -> DriftStream:
        """Wrap records that already carry a non-decreasing time column."""
        t = records.column(time_feature)
        if len(t) and np.any(np.diff(t) < 0):
            raise DataError("time column must be non-decreasing")
        windows = records.cardinality(time_feature)
        starts = tuple(int(np.searchsorted(t, w, side="left")) for w in range(windows))
        order = [n for n in records.names if n != time_feature] + [time_feature]
        return cls(records.select(order), windows, starts, tuple(drift_points), time_feature)


def attach_time(records: Records, windows: int, time_feature: str = TIME) -> DriftStream:
    """Record i of n gets window index floor(i * windows / n)."""
    n = len(records)
    if windows < 2:
        raise DataError("at least two windows are required")
    if n < windows:
        raise DataError(f"{n} records cannot fill {windows} windows")
    if time_feature in records.names:
        raise DataError(f"column name {time_feature!r} is reserved for time")
    t = (np.arange(n, dtype=np.int64) * windows) // n
    return DriftStream(records.with_column(time_feature, t, windows), windows,
                       _window_starts(n, windows))


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """Pre-drift samples from ``base_net``, then post-drift samples with CPTs replaced."""

    base_net: CategoricalBayesNet
    modifications: tuple[tuple[str, np.ndarray], ...] = ()
    pre_count: int = 2500
    post_count: int = 2500
    seed: int = 0
    windows: int = 2
    name: str = "scenario"
    _post_net: CategoricalBayesNet = field(init=False, repr=False)

    def __post_init__(self):
        if self.pre_count < 0 or self.post_count < 0:
            raise DataError("sample counts must be non-negative")
        if self.windows < 2:
            raise DataError("at least two windows are required")
        mods = tuple((f, np.asarray(cpt, dtype=float)) for f, cpt in self.modifications)
        object.__setattr__(self, "modifications", mods)
        net = self.base_net.check()
        for f, cpt in mods:
            net = modify_cpt(net, f, cpt)
        object.__setattr__(self, "_post_net", net)

    @property
    def post_net(self) -> CategoricalBayesNet:
        return self._post_net

    @property
    def drifting_features(self) -> tuple[str, ...]:
        """Modified features whose final post-drift CPT differs from the base one."""
        changed = {f for f, _ in self.modifications
                   if not np.array_equal(self.base_net.cpt(f), self._post_net.cpt(f))}
        return tuple(f for f in self.base_net.nodes if f in changed)

    def replace(self, **kw) -> ScenarioSpec:
        args = dict(base_net=self.base_net, modifications=self.modifications,
                    pre_count=self.pre_count, post_count=self.post_count, seed=self.seed,
                    windows=self.windows, name=self.name)
        args.update(kw)
        return ScenarioSpec(**args)


def _phase_windows(counts, windows):
    if windows % len(counts):
        raise DataError(f"{windows} windows cannot be aligned with {len(counts)} drift phases")
    per = windows // len(counts)
    parts, starts, offset = [], [], 0
    for phase, m in enumerate(counts):
        local = (np.arange(m, dtype=np.int64) * per) // max(m, 1)
        parts.append(phase * per + local)
        starts.extend(offset + s for s in _window_starts(m, per))
        offset += m
    return np.concatenate(parts), tuple(starts)


def build_stream(spec: ScenarioSpec, windows: int | None = None, align: bool = True,
                 seed=None, time_feature: str = TIME) -> DriftStream:
    """Sample the pre- and post-drift phases in order and attach the time feature.

    With ``align`` (the default) window boundaries fall on the drift point:
    each phase is split into ``windows / 2`` equal windows. Without it the
    whole stream is cut into equal windows regardless of where the drift is.
    """
    windows = spec.windows if windows is None else windows
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    pre = sample(spec.base_net, spec.pre_count, rng)
    post = sample(spec.post_net, spec.post_count, rng)
    records = Records.concat([pre, post])
    n = len(records)
    if n == 0:
        empty = records.with_column(time_feature, np.zeros(0, dtype=np.int64), windows)
        return DriftStream(empty, windows, (0,) * windows, (spec.pre_count,), time_feature)
    if align:
        t, starts = _phase_windows([spec.pre_count, spec.post_count], windows)
    else:
        if n < windows:
            raise DataError(f"{n} records cannot fill {windows} windows")
        t, starts = (np.arange(n) * windows) // n, _window_starts(n, windows)
    if time_feature in records.names:
        raise DataError(f"column name {time_feature!r} is reserved for time")
    return DriftStream(records.with_column(time_feature, t, windows), windows, starts,
                       (spec.pre_count,), time_feature)


def truth_graph(spec: ScenarioSpec, time_feature: str = TIME) -> Dag:
    """Base graph plus time -> f for every drifting feature, time appended last."""
    g = spec.base_net.graph
    return Dag(g.nodes + (time_feature,),
               set(g.edges) | {(time_feature, f) for f in spec.drifting_features})


def time_augmented_net(spec: ScenarioSpec, windows: int | None = None,
                       time_feature: str = TIME) -> CategoricalBayesNet:
    """The holistic distribution of an aligned stream as one net with time as a root.

    P(time = w) is the share of records in window w; a drifting feature's
    kernel in window w is its pre- or post-drift CPT depending on the phase
    the window belongs to.
    """
    windows = spec.windows if windows is None else windows
    counts = [spec.pre_count, spec.post_count]
    n = sum(counts)
    if n == 0:
        raise DataError("empty scenario has no time distribution")
    _, starts = _phase_windows(counts, windows)
    bounds = list(starts) + [n]
    prior = [(bounds[w + 1] - bounds[w]) / n for w in range(windows)]
    per = windows // 2
    kernels = {f: [spec.base_net.cpt(f) if w < per else spec.post_net.cpt(f)
                   for w in range(windows)]
               for f in spec.drifting_features}
    return add_root_parent(spec.base_net, time_feature, prior, kernels)


def window_slice(stream: DriftStream, w: int) -> Records:
    start, end = stream.window_bounds(w)
    return stream.records.take(slice(start, end))


class Discretized(NamedTuple):
    codes: np.ndarray
    edges: np.ndarray
    constant: bool


def discretize(values, bins: int) -> Discretized:
    """Quantile binning into left-closed bins, empty bins merged away.

    Bin j covers ``[edges[j], edges[j + 1])``; the last bin also holds
    ``edges[-1]``. Columns with at most ``bins`` distinct values are coded
    by rank, so integer categories ``0..k-1`` map to themselves.
    """
    if bins < 2:
        raise ValueError("need at least two bins")
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        return Discretized(np.zeros(0, dtype=np.int64), np.zeros(0), False)
    if not np.all(np.isfinite(values)):
        raise DataError("cannot discretize non-finite values")
    distinct = np.unique(values)
    if distinct.size == 1:
        return Discretized(np.zeros(values.size, dtype=np.int64),
                           np.array([distinct[0], distinct[0]]), True)
    if distinct.size <= bins:
        codes = np.searchsorted(distinct, values).astype(np.int64)
        return Discretized(codes, np.append(distinct, distinct[-1]), False)
    q = np.quantile(values, np.linspace(0.0, 1.0, bins + 1))
    raw = np.searchsorted(q[1:-1], values, side="right")
    used = np.unique(raw)
    remap = np.full(bins, -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    edges = np.append(q[used], q[-1])
    return Discretized(remap[raw], edges, False)


def discretize_columns(columns: dict[str, Sequence[float]], bins: int) -> Records:
    """Discretize each column independently into one record table."""
    names = list(columns)
    codes = [discretize(columns[n], bins).codes for n in names]
    lengths = {c.size for c in codes}
    if len(lengths) > 1:
        raise DataError("columns differ in length")
    values = np.stack(codes, axis=1) if codes else np.zeros((0, 0), dtype=np.int64)
    cards = [max(2, int(c.max()) + 1) if c.size else 2 for c in codes]
    return Records(tuple(names), values, tuple(cards))


def expected_window_marginal(spec: ScenarioSpec, feature: str, w: int, windows: int | None = None):
    """Exact marginal of ``feature`` within window w of an aligned stream."""
    from .bayesnet import condition, enumerate_joint

    net = time_augmented_net(spec, windows)
    joint = condition(enumerate_joint(net), {TIME: w})
    return joint.marginal([feature]).probs
