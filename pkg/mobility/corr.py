#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   mobility/corr.py
@Time    :   2026/10/19
@Desc    :   Public 2-gram Markov correlation model, tau-probable and tau-closer sets
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Tuple

import numpy as np
from scipy import sparse

from mobility.geo import Cell, Dataset, Grid, neighbor_indices
from utils.errors import DataError, EmptyCorpus
from utils.logs import logger

ROW_SUM_TOLERANCE = 1e-9
PROBABLE_CACHE_SIZE = 1 << 16


@dataclass(frozen=True)
class TauSet:
    anchor: Cell
    tau: float
    members: FrozenSet[Cell]

    def __contains__(self, cell) -> bool:
        return cell in self.members

    def __len__(self) -> int:
        return len(self.members)


class MarkovModel:
    """Row-stochastic 2-gram transition matrix plus per-cell visit counts.

    Rows are stored sparsely (CSR, sorted column indices). The model is
    immutable after construction; the tau-set cache is a bounded pure memo.
    """

    def __init__(self, grid: Grid, transition: sparse.csr_matrix, visits: np.ndarray):
        size = grid.size
        if transition.shape != (size, size):
            raise DataError(f"transition matrix shape {transition.shape} does not match grid of {size} cells")
        transition = sparse.csr_matrix(transition, dtype=float)
        transition.eliminate_zeros()
        transition.sort_indices()
        if transition.nnz and transition.data.min() < 0:
            raise DataError("transition matrix has negative entries")
        row_sums = np.asarray(transition.sum(axis=1)).ravel()
        bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE)
        if bad.size:
            raise DataError(f"{bad.size} transition rows are not stochastic (first: row {int(bad[0])}, sum {row_sums[bad[0]]:.12f})")
        visits = np.asarray(visits, dtype=float).ravel()
        if visits.shape != (size,) or np.any(visits < 0):
            raise DataError("visits must be a nonnegative vector with one entry per cell")

        self.grid = grid
        self.transition = transition
        self.visits = visits
        self.visits.setflags(write=False)
        self._reset_cache()

    def _reset_cache(self) -> None:
        self._probable = lru_cache(maxsize=PROBABLE_CACHE_SIZE)(self._probable_uncached)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_counts(cls, grid: Grid, pair_counts: sparse.spmatrix, visits: np.ndarray) -> "MarkovModel":
        """Normalize pair counts by row; empty rows fall back to uniform over the Moore neighborhood"""
        counts = sparse.csr_matrix(pair_counts, dtype=float)
        out_totals = np.asarray(counts.sum(axis=1)).ravel()
        scale = np.divide(1.0, out_totals, out=np.zeros_like(out_totals), where=out_totals > 0)
        transition = sparse.diags(scale) @ counts

        empty = np.flatnonzero(out_totals == 0)
        if empty.size:
            rows, cols, vals = [], [], []
            for k in empty:
                nbrs = neighbor_indices(grid, int(k), include_self=False)
                rows.extend([k] * len(nbrs))
                cols.extend(nbrs)
                vals.extend([1.0 / len(nbrs)] * len(nbrs))
            fallback = sparse.csr_matrix((vals, (rows, cols)), shape=counts.shape)
            transition = transition + fallback
            logger.debug(f"{empty.size} of {grid.size} cells have no outgoing transitions; using Moore fallback")
        return cls(grid, sparse.csr_matrix(transition), visits)

    @classmethod
    def uniform_moore(cls, grid: Grid) -> "MarkovModel":
        """Model where every cell moves uniformly to its Moore neighbors (self excluded)"""
        return cls.from_counts(grid, sparse.csr_matrix((grid.size, grid.size)), np.zeros(grid.size))

    @classmethod
    def isotropic(cls, grid: Grid, radius: float = 5 ** 0.5, scale: float = 1.0) -> "MarkovModel":
        """Moves to every cell within radius (self excluded) with weight exp(-d^2 / (2 scale^2)).

        Rows are renormalized at the border. Visits are uniform.
        """
        if radius < 1 or scale <= 0:
            raise DataError(f"isotropic model needs radius >= 1 and scale > 0, got {radius}, {scale}")
        n = grid.n
        reach = int(np.floor(radius))
        ix, iy = np.divmod(np.arange(grid.size), n)
        rows, cols, vals = [], [], []
        for dx in range(-reach, reach + 1):
            for dy in range(-reach, reach + 1):
                d2 = dx * dx + dy * dy
                if d2 == 0 or d2 > radius * radius + 1e-9:
                    continue
                tx, ty = ix + dx, iy + dy
                ok = (tx >= 0) & (tx < n) & (ty >= 0) & (ty < n)
                rows.append(np.flatnonzero(ok))
                cols.append(tx[ok] * n + ty[ok])
                vals.append(np.full(rows[-1].size, np.exp(-d2 / (2.0 * scale * scale))))
        weights = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.size, grid.size)
        )
        return cls.from_counts(grid, weights, np.ones(grid.size))

    # -- row access ---------------------------------------------------------

    def row(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        """(column indices, probabilities) of the outgoing distribution of a cell"""
        start, end = self.transition.indptr[index], self.transition.indptr[index + 1]
        return self.transition.indices[start:end], self.transition.data[start:end]

    def prob(self, from_index: int, to_index: int) -> float:
        cols, probs = self.row(from_index)
        pos = np.searchsorted(cols, to_index)
        if pos < cols.size and cols[pos] == to_index:
            return float(probs[pos])
        return 0.0

    def probable(self, index: int, tau: float) -> Tuple[np.ndarray, np.ndarray]:
        """Members (ascending index) of the tau-probable set and their transition probabilities"""
        return self._probable(int(index), float(tau))

    def _probable_uncached(self, index: int, tau: float) -> Tuple[np.ndarray, np.ndarray]:
        cols, probs = self.row(index)
        keep = probs >= tau
        return cols[keep], probs[keep]

    def step(self, distribution: np.ndarray) -> np.ndarray:
        """Row vector times the transition matrix"""
        return self.transition.T @ distribution

    def sample_next(self, index: int, rng: np.random.Generator) -> int:
        cols, probs = self.row(index)
        return int(cols[rng.choice(cols.size, p=probs)])

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_probable"]
        return state

    def __setstate__(self, state) -> None:
        self.__dict__.update(state)
        self._reset_cache()


def draw_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Position drawn proportionally to nonnegative weights (one uniform draw)"""
    cdf = np.cumsum(weights)
    return min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), cdf.size - 1)


def build_model(d: Dataset) -> MarkovModel:
    """Count consecutive pairs and per-cell points over the corpus"""
    if len(d) == 0:
        raise EmptyCorpus("cannot build correlations from an empty corpus")
    grid = d.grid
    size = grid.size
    sources: List[np.ndarray] = []
    targets: List[np.ndarray] = []
    visits = np.zeros(size, dtype=float)
    for traj in d:
        idx = traj.indices(grid)
        visits += np.bincount(idx, minlength=size)
        if idx.size > 1:
            sources.append(idx[:-1])
            targets.append(idx[1:])
    if sources:
        src = np.concatenate(sources)
        dst = np.concatenate(targets)
        counts = sparse.csr_matrix((np.ones(src.size), (src, dst)), shape=(size, size))
    else:
        counts = sparse.csr_matrix((size, size))
    model = MarkovModel.from_counts(grid, counts, visits)
    logger.info(f"Built 2-gram model from {len(d)} trajectories: {int(counts.sum())} transitions, {model.transition.nnz} nonzero entries")
    return model


def tau_probable_set(m: MarkovModel, g_star: Cell, tau: float) -> TauSet:
    cols, _ = m.probable(m.grid.index(g_star), tau)
    return TauSet(Cell(*g_star), tau, frozenset(m.grid.cell(k) for k in cols))


def closer_mask(grid: Grid, members: np.ndarray, anchor: int, target: int) -> np.ndarray:
    """Members at least as close to target as anchor is (exact integer squared distances)"""
    n = grid.n
    tx, ty = divmod(int(target), n)
    ax, ay = divmod(int(anchor), n)
    mx, my = np.divmod(members, n)
    bound = (ax - tx) ** 2 + (ay - ty) ** 2
    return (mx - tx) ** 2 + (my - ty) ** 2 <= bound


def tau_closer_set(m: MarkovModel, prev_released: Cell, target: Cell, tau: float) -> TauSet:
    grid = m.grid
    anchor = grid.index(prev_released)
    cols, _ = m.probable(anchor, tau)
    keep = cols[closer_mask(grid, cols, anchor, grid.index(target))]
    return TauSet(Cell(*prev_released), tau, frozenset(grid.cell(k) for k in keep))


def emission_weights(m: MarkovModel, index: int) -> Tuple[np.ndarray, np.ndarray]:
    """(neighborhood indices incl. self, normalized emission probabilities)"""
    nbrs = np.asarray(neighbor_indices(m.grid, index, include_self=True))
    counts = m.visits[nbrs]
    total = counts.sum()
    if total <= 0:
        return nbrs, np.full(nbrs.size, 1.0 / nbrs.size)
    return nbrs, counts / total


def emission_distribution(m: MarkovModel, g: Cell) -> Dict[Cell, float]:
    nbrs, probs = emission_weights(m, m.grid.index(g))
    return {m.grid.cell(k): float(p) for k, p in zip(nbrs, probs)}
