#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   workflow/base.py
@Time    :   2026/10/19
@Desc    :   Fingerprinting workflow base class and shared configuration
"""

import math
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from mobility.corr import MarkovModel
from mobility.geo import Role, Trajectory, require_role


class Scheme(str, Enum):
    DSFS = "dsfs"
    PFS = "pfs"
    BONEH_SHAW = "boneh_shaw"
    TARDOS = "tardos"

    @property
    def is_code(self) -> bool:
        return self in (Scheme.BONEH_SHAW, Scheme.TARDOS)


class FingerprintConfig(BaseModel):
    """Fingerprinting ratio p, correlation threshold tau and balancing factor theta.

    sigma is the PFS filter threshold (tau when unset). c, omega, bs_block and
    code_length only matter for the code-based schemes.
    """
    model_config = ConfigDict(frozen=True)

    p: float = Field(0.4, gt=0, lt=1)
    tau: float = Field(0.005, ge=0, le=1)
    theta: float = Field(0.5, ge=0, le=1)
    sigma: Optional[float] = Field(None, ge=0, le=1)
    c: int = Field(3, ge=2)
    omega: float = Field(0.01, gt=0, lt=1)
    bs_block: Optional[int] = Field(None, ge=1)
    code_length: Optional[int] = Field(None, ge=1)

    @property
    def pfs_sigma(self) -> float:
        return self.tau if self.sigma is None else self.sigma

    @property
    def check_interval(self) -> int:
        """Positions between two balancing checks"""
        return math.ceil(1.0 / self.p)


class FingerprintWorkflow:
    """A per-trajectory fingerprinting scheme.

    Subclasses read only their input trajectory and the public model; a
    workflow object holds no per-call state, so one instance serves every
    analyzer and trajectory.
    """

    accepted_roles: Sequence[Role] = (Role.RAW, Role.NOISY, Role.POST_PROCESSED)

    def __init__(self, name: str, model: MarkovModel, cfg: FingerprintConfig) -> None:
        self.name = name
        self.model = model
        self.cfg = cfg

    def check(self, traj: Trajectory) -> None:
        require_role(traj, self.accepted_roles, self.name)

    def __call__(self, traj: Trajectory, rng: np.random.Generator) -> Trajectory:
        """
        Implementation of the workflow
        """
        raise NotImplementedError("This method should be implemented by the subclass")
