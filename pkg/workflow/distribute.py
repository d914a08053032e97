#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   workflow/distribute.py
@Time    :   2026/10/19
@Desc    :   Per-analyzer copy generation with hierarchical seeds
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from mobility.corr import MarkovModel
from mobility.geo import Dataset, Trajectory
from utils.errors import DegenerateInput, UnknownTrajectory
from utils.logs import logger
from utils.seeding import Stream, child_rng, seed_int
from workflow.base import FingerprintConfig, Scheme
from workflow.codes import BinaryCodebook, CodeEmbedding, bs_generate, make_mark_map, tardos_generate
from workflow.dsfs import DirectionSensitiveFingerprint
from workflow.pfs import ProbabilisticFingerprint


@dataclass
class CopyRecord:
    analyzer_id: int
    seed: int
    scheme: Scheme
    copies: Dataset

    def by_id(self) -> Dict[str, Trajectory]:
        return self.copies.by_id()


@dataclass
class CodeContext:
    """Shared secrets of a code-based distribution: the codebook and one mark map per trajectory"""
    codebook: BinaryCodebook
    mark_maps: Dict[str, np.ndarray] = field(default_factory=dict)


def build_codebook(
    scheme: Scheme,
    n_analyzers: int,
    cfg: FingerprintConfig,
    trajectory_length: int,
    rng: np.random.Generator,
) -> BinaryCodebook:
    if scheme == Scheme.BONEH_SHAW:
        block = cfg.bs_block or max(1, trajectory_length // (n_analyzers - 1))
        return bs_generate(n_analyzers, block)
    return tardos_generate(n_analyzers, cfg.c, cfg.omega, rng, length=cfg.code_length or trajectory_length)


def build_code_context(
    dataset: Dataset,
    scheme: Scheme,
    n_analyzers: int,
    cfg: FingerprintConfig,
    master_seed: int,
    base_path: Tuple[int, ...] = (),
    trajectory_index: Optional[Dict[str, int]] = None,
) -> CodeContext:
    """Codebook and mark maps; a trajectory's mark map depends only on its index (dataset position by default)"""
    index = trajectory_index or {t.id: k for k, t in enumerate(dataset)}
    length = max(len(t) for t in dataset)
    codebook = build_codebook(scheme, n_analyzers, cfg, length, child_rng(master_seed, *base_path, Stream.CODEBOOK))
    marks = {
        traj.id: make_mark_map(traj, dataset.grid, child_rng(master_seed, *base_path, Stream.MARKS, index[traj.id]))
        for traj in dataset
    }
    return CodeContext(codebook, marks)


def distribute(
    dataset: Dataset,
    n_analyzers: int,
    scheme: Scheme,
    cfg: FingerprintConfig,
    master_seed: int,
    model: MarkovModel,
    base_path: Tuple[int, ...] = (),
    trajectory_ids: Optional[Sequence[str]] = None,
    analyzers: Optional[Sequence[int]] = None,
    code_context: Optional[CodeContext] = None,
    trajectory_index: Optional[Dict[str, int]] = None,
) -> List[CopyRecord]:
    """One fingerprinted copy per analyzer.

    Trajectory k of analyzer a draws from child_rng(master_seed, *base_path,
    FINGERPRINT, a, k) where k is the trajectory's index (its dataset
    position unless ``trajectory_index`` says otherwise), so restricting
    ``trajectory_ids`` or ``analyzers`` yields exactly the cells a full
    distribution would contain.
    """
    if n_analyzers < 1:
        raise DegenerateInput(f"need at least one analyzer, got {n_analyzers}")
    if scheme.is_code and n_analyzers < 2:
        raise DegenerateInput("code-based schemes need at least two analyzers")
    positions = {t.id: k for k, t in enumerate(dataset)}
    index = trajectory_index or positions
    wanted = list(trajectory_ids) if trajectory_ids is not None else dataset.ids()
    missing = [tid for tid in wanted if tid not in positions or tid not in index]
    if missing:
        raise UnknownTrajectory(f"trajectories not in the dataset: {missing[:5]}")
    selected = [dataset.trajectories[positions[tid]] for tid in wanted]

    if scheme == Scheme.DSFS:
        workflow = DirectionSensitiveFingerprint(model, cfg)
    elif scheme == Scheme.PFS:
        workflow = ProbabilisticFingerprint(model, cfg)
    else:
        code_context = code_context or build_code_context(dataset, scheme, n_analyzers, cfg, master_seed, base_path, index)
        workflow = CodeEmbedding(model, cfg, code_context.codebook)

    records = []
    for a in analyzers if analyzers is not None else range(n_analyzers):
        copies = []
        for traj in selected:
            if scheme.is_code:
                copies.append(workflow.embed(traj, a, code_context.mark_maps[traj.id]))
            else:
                rng = child_rng(master_seed, *base_path, Stream.FINGERPRINT, a, index[traj.id])
                copies.append(workflow(traj, rng))
        records.append(CopyRecord(a, seed_int(master_seed, *base_path, Stream.FINGERPRINT, a), scheme, dataset.with_trajectories(copies)))
    logger.debug(f"Distributed {len(records)} {scheme.value} copies of {len(selected)} trajectories")
    return records
