#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/robustness.py
@Time    :   2026/10/19
@Desc    :   Detection accuracy under attack, swept over any config field
"""

from typing import Any, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from benchmarks.benchmark import BaseBenchmark, TrialTask, build_world, trial_dataset
from benchmarks.detection import AggregateReport, detect_codes, detect_dataset
from mobility.geo import Dataset, Trajectory
from privacy.pim import pim_release
from privacy.postprocess import post_process
from utils.config import ExperimentConfig
from utils.logs import logger
from utils.seeding import Stream, child_rng
from workflow.attacks import Attack, apply_attack
from workflow.base import Scheme
from workflow.distribute import build_code_context, distribute


class RunResult(BaseModel):
    sweep_value: Any = None
    detection_accuracy: float = Field(ge=0, le=1)
    trials: int = Field(ge=1)
    scheme: Scheme
    attack: Attack


def choose_parties(cfg: ExperimentConfig, trial: int) -> Tuple[List[int], List[int]]:
    """(attacking analyzers, indices of the leaked trajectories), both uniform without replacement"""
    rng = child_rng(cfg.master_seed, trial, Stream.LEAK)
    attackers = sorted(int(a) for a in rng.choice(cfg.n_analyzers, size=cfg.colluders, replace=False))
    leaked = sorted(int(k) for k in rng.choice(cfg.trajectory_count, size=cfg.leak_count, replace=False))
    return attackers, leaked


def protect_sources(cfg: ExperimentConfig, raw: List[Trajectory], indices: List[int], trial: int, model) -> List[Trajectory]:
    """Raw trajectories unchanged for non-DP runs; PIM (and post-processing for DSFS) otherwise"""
    if cfg.epsilon is None:
        return raw
    params = cfg.pim_params()
    out = []
    for traj, k in zip(raw, indices):
        noisy = pim_release(traj, model, params, child_rng(cfg.master_seed, trial, Stream.DP, k))
        if cfg.post_process and cfg.scheme == Scheme.DSFS:
            noisy = post_process(noisy, model, cfg.tau)
        out.append(noisy)
    return out


def run_trial(cfg: ExperimentConfig, trial: int) -> Tuple[bool, AggregateReport, List[int]]:
    """Distribute, attack and detect once; success means a member of the attacking set was accused"""
    world = build_world(cfg)
    attackers, leaked_idx = choose_parties(cfg, trial)
    if cfg.n_analyzers == 1:
        return True, AggregateReport([], 0, {0: cfg.leak_count}), attackers

    full = trial_dataset(cfg, world, trial)
    raw = [full.trajectories[k] for k in leaked_idx]
    sources = full.with_trajectories(protect_sources(cfg, raw, leaked_idx, trial, world.public))
    index = {t.id: k for t, k in zip(sources, leaked_idx)}
    base = (trial,)
    fp_cfg = cfg.fingerprint

    context = None
    if cfg.scheme.is_code:
        context = build_code_context(sources, cfg.scheme, cfg.n_analyzers, fp_cfg, cfg.master_seed, base, index)
    records = distribute(
        sources, cfg.n_analyzers, cfg.scheme, fp_cfg, cfg.master_seed, world.public,
        base_path=base, code_context=context, trajectory_index=index,
    )
    by_analyzer = {r.analyzer_id: r.by_id() for r in records}

    attack_cfg = cfg.attack_config
    leaked = []
    for traj in sources:
        copies = [by_analyzer[a][traj.id] for a in attackers]
        rng = child_rng(cfg.master_seed, trial, Stream.ATTACK, index[traj.id])
        leaked.append(apply_attack(cfg.attack, copies, world.public, attack_cfg, rng))
    leaked_ds = Dataset(sources.grid, leaked)

    report = detect_codes(leaked_ds, sources, context) if context is not None else detect_dataset(leaked_ds, records)
    return report.final_accused in attackers, report, attackers


class RobustnessBenchmark(BaseBenchmark):
    def __init__(self, cfg: ExperimentConfig, log_path: Optional[str] = None):
        super().__init__(f"robustness_{cfg.scheme.value}_{cfg.attack.value}", cfg, log_path)

    def get_result_columns(self) -> List[str]:
        return ["sweep_value", "trial", "success", "accused", "attackers", "tie_flag"]

    def evaluate_trial(self, task: TrialTask) -> List[Tuple[Any, ...]]:
        success, report, attackers = run_trial(task.cfg, task.trial)
        return [(task.sweep_value, task.trial, bool(success), report.final_accused,
                 " ".join(map(str, attackers)), report.tie_flag)]

    def summarize(self, df: pd.DataFrame) -> pd.DataFrame:
        results = []
        for value, point in self.cfg.sweep():
            rows = df[df["sweep_value"] == value] if value is not None else df
            accuracy = float(np.mean(rows["success"])) if len(rows) else 0.0
            results.append(RunResult(sweep_value=value, detection_accuracy=accuracy, trials=len(rows),
                                     scheme=point.scheme, attack=point.attack))
            logger.info(f"{self.name} {self.cfg.sweep_variable}={value}: accuracy {accuracy:.4f} over {len(rows)} trials")
        return pd.DataFrame([r.model_dump(mode="json") for r in results])


def run_robustness(cfg: ExperimentConfig, save: bool = False) -> List[RunResult]:
    summary = RobustnessBenchmark(cfg).run(save=save)
    return [RunResult.model_validate(row) for row in summary.to_dict(orient="records")]
