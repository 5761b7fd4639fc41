"""QoE-constrained video streaming simulator and policy library.

Core pieces:

- :mod:`qoesim.metrics` -- second-order eCDF quality metric and constraint checks
- :mod:`qoesim.ratequality` -- log rate-quality model and parameter sources
- :mod:`qoesim.channel` -- TDMA rate region and peak-rate processes
- :mod:`qoesim.population` -- user arrival / departure processes
- :mod:`qoesim.slotsolver` -- per-slot weighted hinge-penalty allocator
- :mod:`qoesim.adaptation` -- virtual-queue rate adaptation policies
- :mod:`qoesim.admission` -- quality-estimating threshold admission control
- :mod:`qoesim.thresholdopt` -- sign-driven online threshold tuning
- :mod:`qoesim.engine` -- the slotted simulation loop
- :mod:`qoesim.cli` -- scenario configs, sweeps and CSV reports
"""

from qoesim.metrics import (
    CaseIConstraints,
    CaseIIConstraints,
    QualityTrace,
    ecdf2,
    pooled_stats,
    satisfies,
)
from qoesim.ratequality import RateQualityParams, SyntheticSource, TraceFileSource
from qoesim.slotsolver import Allocation, SlotProblem, solve_slot, solve_static
from qoesim.engine import RunResult, ScenarioConfig, run

__all__ = [
    "Allocation",
    "CaseIConstraints",
    "CaseIIConstraints",
    "QualityTrace",
    "RateQualityParams",
    "RunResult",
    "ScenarioConfig",
    "SlotProblem",
    "SyntheticSource",
    "TraceFileSource",
    "ecdf2",
    "pooled_stats",
    "run",
    "satisfies",
    "solve_slot",
    "solve_static",
]

__version__ = "0.1.0"
