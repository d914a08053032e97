#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/utility.py
@Time    :   2026/10/19
@Desc    :   Utility metrics of a transformed dataset against the original
"""

from collections import Counter
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist, jensenshannon
from scipy.stats import rankdata

from mobility.geo import Cell, Dataset, Grid
from utils.errors import EmptyDataset, EmptyQuerySet, UnknownTrajectory

HISTOGRAM_BINS = 11
SANITY_FRACTION = 0.01


class RegionQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: Cell
    radius: float = Field(gt=0)


class UtilityReport(BaseModel):
    qa_points_avre: float
    qa_patterns_avre: float
    popularity_kt: float = Field(ge=-1, le=1)
    trip_error_jsd: float = Field(ge=0, le=1)
    diameter_error_jsd: float = Field(ge=0, le=1)
    dtw_mean: float = Field(ge=0)


def _sanity_bound(d: Dataset) -> float:
    return SANITY_FRACTION * len(d)


def _avre(truth: np.ndarray, other: np.ndarray, b: float) -> float:
    return float(np.mean(np.abs(truth - other) / np.maximum(truth, b)))


def region_count(d: Dataset, q: RegionQuery) -> int:
    """Trajectories with at least one cell center inside the circle"""
    cx, cy = q.center
    r2 = q.radius ** 2
    hits = 0
    for traj in d:
        cells = np.asarray(traj.cells)
        if np.any((cells[:, 0] - cx) ** 2 + (cells[:, 1] - cy) ** 2 <= r2):
            hits += 1
    return hits


def qa_points(d: Dataset, d_prime: Dataset, queries: Sequence[RegionQuery]) -> float:
    if not queries:
        raise EmptyQuerySet("point query workload is empty")
    truth = np.array([region_count(d, q) for q in queries], dtype=float)
    other = np.array([region_count(d_prime, q) for q in queries], dtype=float)
    return _avre(truth, other, _sanity_bound(d))


def pattern_counts(d: Dataset) -> Counter:
    counts: Counter = Counter()
    for traj in d:
        counts.update(zip(traj.cells[:-1], traj.cells[1:]))
    return counts


def qa_patterns(d: Dataset, d_prime: Dataset, patterns: Sequence[Tuple[Cell, Cell]]) -> float:
    if not patterns:
        raise EmptyQuerySet("pattern workload is empty")
    ours, theirs = pattern_counts(d), pattern_counts(d_prime)
    keys = [(Cell(*a), Cell(*b)) for a, b in patterns]
    truth = np.array([ours[k] for k in keys], dtype=float)
    other = np.array([theirs[k] for k in keys], dtype=float)
    return _avre(truth, other, _sanity_bound(d))


def cell_counts(d: Dataset) -> np.ndarray:
    counts = np.zeros(d.grid.size)
    for traj in d:
        counts += np.bincount(traj.indices(d.grid), minlength=d.grid.size)
    return counts


def kendall_tau_a(a: np.ndarray, b: np.ndarray) -> float:
    """(concordant - discordant) / all pairs; tied pairs count as neither"""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    n = a.size
    if n < 2:
        return 1.0
    s = np.sign(a[:, None] - a[None, :]) * np.sign(b[:, None] - b[None, :])
    return float(np.triu(s, k=1).sum() / (n * (n - 1) / 2))


def popularity_kendall(d: Dataset, d_prime: Dataset) -> float:
    """tau-a between popularity ranks of the cells visited in d; equal counts rank by cell index"""
    ours, theirs = cell_counts(d), cell_counts(d_prime)
    visited = ours > 0
    return kendall_tau_a(rankdata(ours[visited], method="ordinal"), rankdata(theirs[visited], method="ordinal"))


def _step_lengths(traj_cells) -> np.ndarray:
    cells = np.asarray(traj_cells, dtype=float)
    return np.hypot(*np.diff(cells, axis=0).T) if len(cells) > 1 else np.zeros(0)


def histogram(values: np.ndarray, top: float) -> np.ndarray:
    """Counts over [0, L/10), ..., [9L/10, L), [L, inf)"""
    if top <= 0:
        bins = np.full(values.size, HISTOGRAM_BINS - 1)
    else:
        bins = np.minimum(np.floor(values * (HISTOGRAM_BINS - 1) / top), HISTOGRAM_BINS - 1).astype(int)
    return np.bincount(bins, minlength=HISTOGRAM_BINS).astype(float)


def histogram_jsd(ours: np.ndarray, theirs: np.ndarray) -> float:
    """JSD (log base 2) of the binned samples; bins anchored at the max of ours"""
    if ours.size == 0 or theirs.size == 0:
        raise EmptyDataset("cannot compare empty distributions")
    top = float(ours.max())
    return float(jensenshannon(histogram(ours, top), histogram(theirs, top), base=2) ** 2)


def trip_lengths(d: Dataset) -> np.ndarray:
    return np.array([_step_lengths(t.cells).sum() for t in d], dtype=float)


def step_distances(d: Dataset) -> np.ndarray:
    parts = [_step_lengths(t.cells) for t in d]
    return np.concatenate(parts) if parts else np.zeros(0)


def trip_error(d: Dataset, d_prime: Dataset) -> float:
    return histogram_jsd(trip_lengths(d), trip_lengths(d_prime))


def diameter_error(d: Dataset, d_prime: Dataset) -> float:
    return histogram_jsd(step_distances(d), step_distances(d_prime))


def dtw_distance(a, b) -> float:
    """Full-alignment DTW with Euclidean local cost.

    One row at a time: the step from the left is a running minimum over
    prefix sums of the row costs.
    """
    cost = cdist(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    m = cost.shape[1]
    above = np.concatenate(([0.0], np.full(m, np.inf)))
    for row in cost:
        entry = row + np.minimum(above[1:], above[:-1])
        csum = np.cumsum(row)
        above = np.concatenate(([np.inf], np.minimum.accumulate(entry - csum) + csum))
    return float(above[m])


def dtw_mean(d: Dataset, d_prime: Dataset) -> float:
    if len(d) == 0:
        raise EmptyDataset("cannot average DTW over an empty dataset")
    theirs = d_prime.by_id()
    total = 0.0
    for traj in d:
        if traj.id not in theirs:
            raise UnknownTrajectory(f"trajectory {traj.id!r} missing from the compared dataset")
        total += dtw_distance(traj.cells, theirs[traj.id].cells)
    return total / len(d)


def random_region_queries(grid: Grid, count: int, rng: np.random.Generator) -> List[RegionQuery]:
    """Uniform centers, radius uniform in [1, n/10] cells"""
    top = max(1.0, grid.n / 10)
    centers = rng.integers(0, grid.n, size=(count, 2))
    radii = rng.uniform(1.0, top, size=count)
    return [RegionQuery(center=Cell(int(x), int(y)), radius=float(r)) for (x, y), r in zip(centers, radii)]


def top_patterns(d: Dataset, k: int = 200) -> List[Tuple[Cell, Cell]]:
    """The k most frequent ordered 2-grams; ties by ascending cells"""
    counts = pattern_counts(d)
    return [pair for pair, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]]


def evaluate_utility(
    d: Dataset,
    d_prime: Dataset,
    queries: Sequence[RegionQuery],
    patterns: Sequence[Tuple[Cell, Cell]],
) -> UtilityReport:
    return UtilityReport(
        qa_points_avre=qa_points(d, d_prime, queries),
        qa_patterns_avre=qa_patterns(d, d_prime, patterns),
        popularity_kt=popularity_kendall(d, d_prime),
        trip_error_jsd=min(1.0, trip_error(d, d_prime)),
        diameter_error_jsd=min(1.0, diameter_error(d, d_prime)),
        dtw_mean=dtw_mean(d, d_prime),
    )
