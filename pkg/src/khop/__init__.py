"""Exact joint moments and cumulants of k-hop counts in the 1D Poisson unit-disk graph.

The symbolic engine returns polynomials in ``tau1..taun`` (argument
positions, valid on the chamber ``tau1 <= ... <= taun``) and
``lambda1..lambda_{k-1}`` (cell intensities) with exact rational
coefficients. A Monte Carlo simulator and distance-to-normal statistics
check the engine against sampled counts.

Examples
--------
>>> import khop
>>> khop.variance_equal(3, 1, 1)
Fraction(7, 6)
"""
from __future__ import annotations

from .exactpoly import ChamberPoly, MultiPoly, specialize
from .hopcumulants import (
    cumulant,
    cumulant_at,
    cumulant_bound,
    cumulant_from_moments,
    excess_kurtosis,
    joint_cumulant,
    skewness,
)
from .hopmoments import LimitError, UnsortedTauWarning, moment, moment_at, moment_bound
from .kernels import BACKEND
from .partitions import SetPartition, bell, set_partitions, stirling2
from .simulator import SampleStats, SimConfig, run_simulation, simulate_counts
from .variance import variance_asymptotic, variance_equal, variance_general

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChamberPoly",
    "LimitError",
    "MultiPoly",
    "SampleStats",
    "SetPartition",
    "SimConfig",
    "UnsortedTauWarning",
    "bell",
    "cumulant",
    "cumulant_at",
    "cumulant_bound",
    "cumulant_from_moments",
    "excess_kurtosis",
    "joint_cumulant",
    "moment",
    "moment_at",
    "moment_bound",
    "run_simulation",
    "set_partitions",
    "simulate_counts",
    "skewness",
    "specialize",
    "stirling2",
    "variance_asymptotic",
    "variance_equal",
    "variance_general",
]
