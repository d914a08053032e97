#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/benchmark.py
@Time    :   2026/10/19
@Desc    :   Trial runner shared by the experiments: synthetic world, concurrent trials, CSV output
"""

import asyncio
import os
from abc import ABC, abstractmethod
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from functools import partial
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from tqdm.asyncio import tqdm_asyncio

from benchmarks.utils import run_manifest, write_json_file
from mobility.corr import MarkovModel, build_model
from mobility.geo import Dataset
from mobility.synth import random_mobility_model, synth_generate
from utils.config import ExperimentConfig
from utils.logs import logger
from utils.seeding import Stream, child_rng


@dataclass
class World:
    """The hidden generating chain and the public model built from a held-out corpus of it"""
    generating: MarkovModel
    public: MarkovModel


_WORLDS: Dict[Tuple, World] = {}


def build_world(cfg: ExperimentConfig) -> World:
    key = (cfg.master_seed, cfg.n, cfg.x_min, cfg.y_min, cfg.x_max, cfg.y_max,
           cfg.model_support, cfg.model_corpus_size, cfg.trajectory_length)
    world = _WORLDS.get(key)
    if world is None:
        generating = random_mobility_model(cfg.grid, child_rng(cfg.master_seed, Stream.MODEL, 0), support=cfg.model_support)
        corpus = synth_generate(generating, cfg.model_corpus_size, cfg.trajectory_length,
                                child_rng(cfg.master_seed, Stream.MODEL, 1), prefix="public")
        world = World(generating, build_model(corpus))
        _WORLDS[key] = world
    return world


def trial_dataset(cfg: ExperimentConfig, world: World, trial: int) -> Dataset:
    """Fresh raw dataset per trial, independent of the sweep value"""
    return synth_generate(world.generating, cfg.trajectory_count, cfg.trajectory_length,
                          child_rng(cfg.master_seed, trial, Stream.DATASET))


@dataclass(frozen=True)
class TrialTask:
    sweep_value: Any
    trial: int
    cfg: ExperimentConfig


class BaseBenchmark(ABC):
    key_columns: List[str] = ["sweep_value", "trial"]

    def __init__(self, name: str, cfg: ExperimentConfig, log_path: Optional[str] = None):
        self.name = name
        self.cfg = cfg
        self.log_path = log_path or cfg.output_dir

    def tasks(self) -> List[TrialTask]:
        return [TrialTask(value, trial, point) for value, point in self.cfg.sweep() for trial in range(point.trials)]

    @abstractmethod
    def evaluate_trial(self, task: TrialTask) -> List[Tuple[Any, ...]]:
        """Rows produced by one trial"""

    @abstractmethod
    def get_result_columns(self) -> List[str]:
        pass

    @abstractmethod
    def summarize(self, df: pd.DataFrame) -> pd.DataFrame:
        pass

    def _executor(self) -> Optional[Executor]:
        if self.cfg.max_workers > 1:
            return ProcessPoolExecutor(max_workers=self.cfg.max_workers)
        return None

    async def evaluate_all_trials(self, tasks: List[TrialTask], max_concurrent_tasks: int) -> List[List[Tuple[Any, ...]]]:
        semaphore = asyncio.Semaphore(max_concurrent_tasks)
        loop = asyncio.get_running_loop()
        executor = self._executor()

        async def sem_evaluate(task: TrialTask):
            async with semaphore:
                if executor is None:
                    return self.evaluate_trial(task)
                return await loop.run_in_executor(executor, partial(self.evaluate_trial, task))

        try:
            return await tqdm_asyncio.gather(*[sem_evaluate(t) for t in tasks], desc=f"Running {self.name} trials", total=len(tasks))
        finally:
            if executor is not None:
                executor.shutdown()

    def save_results_to_csv(self, df: pd.DataFrame, suffix: str) -> str:
        os.makedirs(self.log_path, exist_ok=True)
        current_time = datetime.now().strftime("%Y%m%d_%H%M%S")
        output_file = os.path.join(self.log_path, f"{self.name}_{suffix}_{current_time}.csv")
        df.to_csv(output_file, index=False)
        logger.info(f"Results saved to {output_file}")
        return output_file

    async def run_evaluation(self, save: bool = True) -> pd.DataFrame:
        tasks = self.tasks()
        logger.info(f"{self.name}: {len(tasks)} trials, config {self.cfg.config_hash()[:12]}")
        nested = await self.evaluate_all_trials(tasks, max_concurrent_tasks=max(1, self.cfg.max_workers))
        rows = [row for trial_rows in nested for row in trial_rows]
        columns = self.get_result_columns()
        # completion order must not leak into the output
        raw = pd.DataFrame(rows, columns=columns).sort_values(self.key_columns, kind="stable").reset_index(drop=True)
        summary = self.summarize(raw)
        if save:
            self.save_results_to_csv(raw, "trials")
            summary_file = self.save_results_to_csv(summary, "summary")
            write_json_file(
                os.path.splitext(summary_file)[0] + ".json",
                run_manifest(self.cfg.config_hash(), self.cfg.master_seed, benchmark=self.name, config=self.cfg.model_dump(mode="json")),
            )
        return summary

    def run(self, save: bool = True) -> pd.DataFrame:
        return asyncio.run(self.run_evaluation(save))
