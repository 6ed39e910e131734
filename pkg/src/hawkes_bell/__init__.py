"""Cumulants of exponential-kernel Hawkes processes via Bell-polynomial recursions.

Analytic results live in :mod:`hawkes_bell.hawkes_cumulants` (over the
exponential-polynomial algebra of :mod:`hawkes_bell.exp_poly`); the Monte Carlo
counterpart is :mod:`hawkes_bell.simulator`.
"""

__version__ = "0.1.0"

from .bell_poly import (
    SetPartition,
    bell_number,
    complete_bell,
    cumulants_from_moments,
    enumerate_partitions,
    moments_from_cumulants,
    partial_bell,
)
from .borel import BorelParams, borel_cumulants, borel_pmf, borel_sample
from .exp_poly import ExpPoly, KernelParams
from .hawkes_cumulants import (
    ConditionalCumulants,
    CumulantVector,
    closed_form_reference,
    conditional_cumulants,
    cumulants,
    intensity_count_moment,
    joint_conditional_cumulant,
    joint_cumulant,
    mean_intensity,
    partition_term_count,
)
from .simulator import SampleStats, SimConfig, k_statistics, run
from .errors import ParameterCoincidenceError, SimulationError

__all__ = [
    "BorelParams",
    "ConditionalCumulants",
    "CumulantVector",
    "ExpPoly",
    "KernelParams",
    "ParameterCoincidenceError",
    "SampleStats",
    "SetPartition",
    "SimConfig",
    "SimulationError",
    "bell_number",
    "borel_cumulants",
    "borel_pmf",
    "borel_sample",
    "closed_form_reference",
    "complete_bell",
    "conditional_cumulants",
    "cumulants",
    "cumulants_from_moments",
    "enumerate_partitions",
    "intensity_count_moment",
    "joint_conditional_cumulant",
    "joint_cumulant",
    "k_statistics",
    "mean_intensity",
    "moments_from_cumulants",
    "partial_bell",
    "partition_term_count",
    "run",
]
