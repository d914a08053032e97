#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   mobility/geo.py
@Time    :   2026/10/19
@Desc    :   Coordinates, uniform grid discretization, neighborhoods and trajectory preprocessing
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.errors import DegenerateInput, OutOfBounds, RoleError


class GeoPoint(NamedTuple):
    """Planar (projected) coordinate with an optional timestamp in seconds"""
    x: float
    y: float
    t: Optional[float] = None


class Cell(NamedTuple):
    ix: int
    iy: int


class Role(str, Enum):
    RAW = "raw"
    NOISY = "noisy"
    POST_PROCESSED = "post_processed"
    FINGERPRINTED = "fingerprinted"
    LEAKED = "leaked"


class Grid(BaseModel):
    """Uniform n x n discretization of an axis-aligned bounding box"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(30, ge=2)
    x_min: float = 0.0
    y_min: float = 0.0
    x_max: float = 30.0
    y_max: float = 30.0

    @model_validator(mode="after")
    def _check_bbox(self) -> "Grid":
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate bounding box {self.bbox}")
        for v in self.bbox:
            if not math.isfinite(v):
                raise ValueError("bounding box coordinates must be finite")
        return self

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def size(self) -> int:
        """Alphabet size |G| = n^2"""
        return self.n * self.n

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell.ix < self.n and 0 <= cell.iy < self.n

    def index(self, cell: Cell) -> int:
        """Flat index; ascending index order equals ascending (ix, iy) order"""
        return cell.ix * self.n + cell.iy

    def cell(self, index: int) -> Cell:
        return Cell(int(index) // self.n, int(index) % self.n)

    def centers(self) -> np.ndarray:
        """Cell centers in cell units, shape (n^2, 2), row k is the center of cell(k)"""
        return _centers(self.n)


@lru_cache(maxsize=16)
def _centers(n: int) -> np.ndarray:
    ix, iy = np.divmod(np.arange(n * n), n)
    centers = np.column_stack([ix + 0.5, iy + 0.5]).astype(float)
    centers.setflags(write=False)
    return centers


@lru_cache(maxsize=16)
def _neighbor_table(n: int) -> Tuple[Tuple[int, ...], ...]:
    """Moore neighborhood (self included) of every flat index, ascending"""
    table = []
    for ix in range(n):
        for iy in range(n):
            members = []
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    jx, jy = ix + dx, iy + dy
                    if 0 <= jx < n and 0 <= jy < n:
                        members.append(jx * n + jy)
            table.append(tuple(sorted(members)))
    return tuple(table)


def neighbor_indices(grid: Grid, index: int, include_self: bool = True) -> Tuple[int, ...]:
    members = _neighbor_table(grid.n)[index]
    if include_self:
        return members
    return tuple(k for k in members if k != index)


@dataclass(frozen=True)
class Trajectory:
    id: str
    role: Role
    cells: Tuple[Cell, ...]

    def __post_init__(self):
        if len(self.cells) < 1:
            raise DegenerateInput(f"trajectory {self.id!r} is empty")
        object.__setattr__(self, "cells", tuple(c if isinstance(c, Cell) else Cell(*c) for c in self.cells))

    def __len__(self) -> int:
        return len(self.cells)

    def indices(self, grid: Grid) -> np.ndarray:
        return np.fromiter((c.ix * grid.n + c.iy for c in self.cells), dtype=np.int64, count=len(self.cells))

    def evolve(self, cells: Iterable[Cell], role: Role) -> "Trajectory":
        """Same id, new cells and role"""
        return Trajectory(self.id, role, tuple(Cell(*c) for c in cells))

    @classmethod
    def from_indices(cls, traj_id: str, role: Role, indices: Iterable[int], grid: Grid) -> "Trajectory":
        n = grid.n
        return cls(traj_id, role, tuple(Cell(int(k) // n, int(k) % n) for k in indices))


def require_role(traj: Trajectory, allowed: Sequence[Role], where: str) -> None:
    if traj.role not in allowed:
        names = ", ".join(r.value for r in allowed)
        raise RoleError(f"{where} accepts only [{names}] trajectories, got {traj.role.value} ({traj.id!r})")


@dataclass
class Dataset:
    grid: Grid
    trajectories: List[Trajectory] = field(default_factory=list)

    def __post_init__(self):
        for traj in self.trajectories:
            for c in traj.cells:
                if not self.grid.contains(c):
                    raise OutOfBounds(f"cell {tuple(c)} of trajectory {traj.id!r} is off the {self.grid.n}x{self.grid.n} grid")

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories)

    def by_id(self) -> Dict[str, Trajectory]:
        return {t.id: t for t in self.trajectories}

    def ids(self) -> List[str]:
        return [t.id for t in self.trajectories]

    def with_trajectories(self, trajectories: List[Trajectory]) -> "Dataset":
        return Dataset(self.grid, list(trajectories))

    @property
    def roles(self) -> Set[Role]:
        return {t.role for t in self.trajectories}


def discretize(p: GeoPoint, g: Grid) -> Cell:
    if not (g.x_min <= p.x <= g.x_max and g.y_min <= p.y <= g.y_max):
        raise OutOfBounds(f"point ({p.x}, {p.y}) lies outside bbox {g.bbox}")
    ix = int(math.floor((p.x - g.x_min) / (g.x_max - g.x_min) * g.n))
    iy = int(math.floor((p.y - g.y_min) / (g.y_max - g.y_min) * g.n))
    # points on the max edge belong to the last cell
    return Cell(min(ix, g.n - 1), min(iy, g.n - 1))


def cell_center(c: Cell, g: Grid) -> GeoPoint:
    """Center of a cell in the grid's coordinate space"""
    w = (g.x_max - g.x_min) / g.n
    h = (g.y_max - g.y_min) / g.n
    return GeoPoint(g.x_min + (c.ix + 0.5) * w, g.y_min + (c.iy + 0.5) * h)


def cell_distance(a: Cell, b: Cell) -> float:
    """Euclidean distance in cell units"""
    return math.hypot(a.ix - b.ix, a.iy - b.iy)


def neighbors(c: Cell, g: Grid, include_self: bool = True) -> Set[Cell]:
    """Moore 8-neighborhood clipped at the grid border"""
    return {g.cell(k) for k in neighbor_indices(g, g.index(c), include_self)}


def resample_uniform(points: Sequence[GeoPoint], interval: float) -> List[GeoPoint]:
    """Linear interpolation at t0, t0 + interval, ... up to the last timestamp"""
    if len(points) < 2:
        raise DegenerateInput("resampling needs at least 2 points")
    if interval <= 0:
        raise DegenerateInput(f"interval must be positive, got {interval}")
    if any(p.t is None for p in points):
        raise DegenerateInput("resampling needs timestamped points")
    ts = np.array([p.t for p in points], dtype=float)
    if np.any(np.diff(ts) <= 0):
        raise DegenerateInput("timestamps must be strictly increasing")

    steps = int(math.floor((ts[-1] - ts[0]) / interval + 1e-9))
    grid_t = ts[0] + interval * np.arange(steps + 1)
    xs = np.interp(grid_t, ts, [p.x for p in points])
    ys = np.interp(grid_t, ts, [p.y for p in points])
    return [GeoPoint(float(x), float(y), float(t)) for x, y, t in zip(xs, ys, grid_t)]


def clip_to_area(traj: Sequence[GeoPoint], bbox: Tuple[float, float, float, float], min_length: int = 2) -> List[List[GeoPoint]]:
    """Split into maximal runs of in-area points, dropping runs shorter than min_length"""
    x_min, y_min, x_max, y_max = bbox
    fragments: List[List[GeoPoint]] = []
    current: List[GeoPoint] = []
    for p in traj:
        if x_min <= p.x <= x_max and y_min <= p.y <= y_max:
            current.append(p)
            continue
        if len(current) >= min_length:
            fragments.append(current)
        current = []
    if len(current) >= min_length:
        fragments.append(current)
    return fragments


def preprocess_points(
    traj_id: str,
    points: Sequence[GeoPoint],
    grid: Grid,
    interval: Optional[float] = 60.0,
    min_length: int = 2,
) -> List[Trajectory]:
    """Resample (when timestamps exist), clip to the grid area and discretize.

    Each surviving fragment becomes its own Raw trajectory with id
    ``{traj_id}`` (single fragment) or ``{traj_id}_{k}``.
    """
    if interval and len(points) >= 2 and all(p.t is not None for p in points):
        points = resample_uniform(points, interval)
    fragments = clip_to_area(points, grid.bbox, min_length=min_length)
    out = []
    for k, frag in enumerate(fragments):
        fid = traj_id if len(fragments) == 1 else f"{traj_id}_{k}"
        out.append(Trajectory(fid, Role.RAW, tuple(discretize(p, grid) for p in frag)))
    return out
