#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/detection.py
@Time    :   2026/10/19
@Desc    :   Leaker detection: distance-based scores per trajectory, majority vote per dataset
"""

from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np

from mobility.geo import Dataset, Grid, Trajectory
from utils.errors import DegenerateInput, LengthMismatch, UnknownTrajectory
from utils.logs import logger
from workflow.codes import accuse_from_bits, read_bits
from workflow.distribute import CodeContext, CopyRecord


@dataclass
class DetectionReport:
    traj_id: str
    scores: np.ndarray
    accused: int
    tie_flag: bool


@dataclass
class AggregateReport:
    per_trajectory: List[DetectionReport]
    final_accused: int
    vote_counts: Dict[int, int] = field(default_factory=dict)
    tie_flag: bool = False


def detect_trajectory(leaked: Trajectory, copies: Sequence[Trajectory], grid: Grid) -> DetectionReport:
    """Every analyzer at the minimum distance from the leaked cell gains 1/|X| per position"""
    if not copies:
        raise DegenerateInput("detection needs at least one analyzer copy")
    m = len(leaked)
    if any(len(c) != m for c in copies):
        raise LengthMismatch(f"copies of {leaked.id!r} do not all have length {m}")
    n = grid.n
    lx, ly = np.divmod(leaked.indices(grid), n)
    cx, cy = np.divmod(np.stack([c.indices(grid) for c in copies]), n)
    dist2 = (cx - lx[None, :]) ** 2 + (cy - ly[None, :]) ** 2
    hits = dist2 == dist2.min(axis=0, keepdims=True)
    scores = hits.sum(axis=1) / m
    winners = np.flatnonzero(scores == scores.max())
    return DetectionReport(leaked.id, scores, int(winners[0]), winners.size > 1)


def majority(accusations: Sequence[int]) -> Tuple[int, Dict[int, int], bool]:
    """Modal accused id (ties to the lowest id) with vote counts and a tie flag"""
    ids, counts = np.unique(np.asarray(accusations, dtype=np.int64), return_counts=True)
    winners = ids[counts == counts.max()]
    return int(winners[0]), {int(i): int(c) for i, c in zip(ids, counts)}, winners.size > 1


def detect_dataset(leaked: Dataset, records: Sequence[CopyRecord]) -> AggregateReport:
    if not records:
        raise DegenerateInput("detection needs at least one copy record")
    if len(leaked) == 0:
        raise DegenerateInput("leaked dataset is empty")
    order = sorted(records, key=lambda r: r.analyzer_id)
    lookups = [r.by_id() for r in order]
    reports = []
    for traj in leaked:
        if any(traj.id not in lookup for lookup in lookups):
            raise UnknownTrajectory(f"leaked trajectory {traj.id!r} is not in every distributed copy")
        report = detect_trajectory(traj, [lookup[traj.id] for lookup in lookups], leaked.grid)
        # positions in the record list back to analyzer ids
        report.accused = order[report.accused].analyzer_id
        reports.append(report)
    final, votes, tie = majority([r.accused for r in reports])
    if tie:
        logger.warning(f"vote tie among analyzers {sorted(votes)}; accusing {final}")
    return AggregateReport(reports, final, votes, tie)


def detect_codes(
    leaked: Dataset,
    originals: Dataset,
    context: CodeContext,
) -> AggregateReport:
    """Bit read-back against the shared mark maps, code accusation per trajectory, then a vote"""
    lookup = originals.by_id()
    reports = []
    for traj in leaked:
        if traj.id not in lookup or traj.id not in context.mark_maps:
            raise UnknownTrajectory(f"leaked trajectory {traj.id!r} has no original or mark map")
        bits = read_bits(traj, lookup[traj.id], context.mark_maps[traj.id], leaked.grid)
        score = accuse_from_bits(bits, context.codebook)
        reports.append(DetectionReport(traj.id, score.scores, score.accused, score.tie_flag))
    final, votes, tie = majority([r.accused for r in reports])
    return AggregateReport(reports, final, votes, tie)


def majority_vote_accuracy(q: float, k: int) -> float:
    """P(strictly more than half of k independent accusations are right) for per-trajectory accuracy q.

    Assumes wrong accusations scatter, so any strict majority of correct ones wins.
    """
    if k < 1 or not 0 <= q <= 1:
        raise DegenerateInput(f"need k >= 1 and 0 <= q <= 1, got {k}, {q}")
    return float(sum(comb(k, i) * q ** i * (1 - q) ** (k - i) for i in range(k // 2 + 1, k + 1)))
