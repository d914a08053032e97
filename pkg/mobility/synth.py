#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   mobility/synth.py
@Time    :   2026/10/19
@Desc    :   Synthetic mobility: generating Markov chains and random walks over the grid
"""

from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse

from mobility.corr import MarkovModel, draw_index
from mobility.geo import Cell, Dataset, Grid, Role, Trajectory, neighbor_indices
from utils.errors import DegenerateInput
from utils.logs import logger


def _flow_angles(n: int, rng: np.random.Generator) -> np.ndarray:
    """Smooth preferred-heading field (radians), one value per flat index"""
    ix, iy = np.divmod(np.arange(n * n), n)
    u, v = ix / n, iy / n
    freq = rng.uniform(1.0, 3.0, size=4)
    phase = rng.uniform(0.0, 2 * np.pi, size=4)
    field = (
        np.sin(2 * np.pi * freq[0] * u + phase[0])
        + np.cos(2 * np.pi * freq[1] * v + phase[1])
        + 0.5 * np.sin(2 * np.pi * (freq[2] * u + freq[3] * v) + phase[2])
    )
    return np.pi * field + phase[3]


def random_mobility_model(
    grid: Grid,
    rng: np.random.Generator,
    support: int = 4,
    persistence: float = 2.0,
    burn_in: int = 200,
) -> MarkovModel:
    """Sparse generating chain with Moore-neighborhood moves.

    Each cell keeps its ``support`` best moves, weighted by
    exp(persistence * cos(angle to the local heading)) times a Gamma(2) jitter,
    so walks drift along a smooth flow field instead of diffusing. Visits are
    the chain's distribution after ``burn_in`` steps from uniform.
    """
    if support < 1:
        raise DegenerateInput(f"support must be at least 1, got {support}")
    n = grid.n
    heading = _flow_angles(n, rng)
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    for k in range(grid.size):
        kx, ky = divmod(k, n)
        nbrs = np.asarray(neighbor_indices(grid, k, include_self=False))
        nx, ny = np.divmod(nbrs, n)
        move_angle = np.arctan2(ny - ky, nx - kx)
        weight = np.exp(persistence * np.cos(move_angle - heading[k])) * rng.gamma(2.0, 1.0, size=nbrs.size)
        keep = np.argsort(-weight, kind="stable")[:support]
        w = weight[keep] / weight[keep].sum()
        rows.extend([k] * keep.size)
        cols.extend(nbrs[keep].tolist())
        vals.extend(w.tolist())
    transition = sparse.csr_matrix((vals, (rows, cols)), shape=(grid.size, grid.size))

    dist = np.full(grid.size, 1.0 / grid.size)
    for _ in range(burn_in):
        dist = transition.T @ dist
    # expected point counts of a 10^4-point corpus; keeps every cell reachable as a start
    visits = np.round(dist * 1e4) + 1.0
    logger.debug(f"Generated mobility model on {n}x{n} grid with support {support}")
    return MarkovModel(grid, transition, visits)


def synth_walk(m: MarkovModel, start: int, length: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(length, dtype=np.int64)
    out[0] = start
    for j in range(1, length):
        cols, probs = m.row(int(out[j - 1]))
        out[j] = cols[draw_index(probs, rng)]
    return out


def synth_generate(
    m: MarkovModel,
    count: int,
    length: int,
    rng: np.random.Generator,
    prefix: str = "t",
) -> Dataset:
    """Random walks: start proportional to visits, then length - 1 transitions"""
    if length < 1:
        raise DegenerateInput(f"trajectory length must be at least 1, got {length}")
    grid = m.grid
    weights = m.visits if m.visits.sum() > 0 else np.ones(grid.size)
    trajectories = []
    for k in range(count):
        start = draw_index(weights, rng)
        walk = synth_walk(m, start, length, rng)
        trajectories.append(Trajectory.from_indices(f"{prefix}{k:04d}", Role.RAW, walk, grid))
    return Dataset(grid, trajectories)


def straight_line(
    grid: Grid,
    length: int,
    start: Optional[Cell] = None,
    step: Tuple[int, int] = (1, 0),
    traj_id: str = "line",
) -> Trajectory:
    """Cells start, start + step, ... ; the whole line must fit on the grid"""
    start = Cell(*(start or (0, grid.n // 2)))
    cells = [Cell(start.ix + j * step[0], start.iy + j * step[1]) for j in range(length)]
    if not all(grid.contains(c) for c in cells):
        raise DegenerateInput(f"a straight line of length {length} does not fit on the {grid.n}x{grid.n} grid")
    return Trajectory(traj_id, Role.RAW, tuple(cells))
