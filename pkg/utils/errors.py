#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   utils/errors.py
@Time    :   2026/10/19
@Desc    :   Exception hierarchy shared by the library and the CLI
"""


class TrajectoryFingerprintError(Exception):
    """Base class for every error raised by this package"""
    exit_code = 1


class ConfigError(TrajectoryFingerprintError):
    """Invalid or unreadable configuration"""
    exit_code = 2


class DataError(TrajectoryFingerprintError):
    """Input data violates a precondition"""
    exit_code = 3


class OutOfBounds(DataError):
    pass


class DegenerateInput(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class DegenerateHull(DataError):
    pass


class AllZeroLikelihood(DataError):
    pass


class LengthMismatch(DataError):
    pass


class UnknownTrajectory(DataError):
    pass


class EmptyQuerySet(DataError):
    pass


class EmptyDataset(DataError):
    pass


class RoleError(DataError):
    """A trajectory with the wrong role was passed across a module boundary"""
    pass
