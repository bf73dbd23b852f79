"""Spin-selective radical-pair reactions: master equations and quantum-jump unravelings."""

__version__ = "0.1.0"

from .master import EvolutionTrace, NumericalAbort, Theory, coherence_measure, integrate  # noqa: E402
from .spin import Basis, HamiltonianParams, Model, RatePair, initial_state  # noqa: E402
from .trajectories import EnsembleResult, Event, Scheme, run_ensemble  # noqa: E402

__all__ = [
    "Basis",
    "EnsembleResult",
    "Event",
    "EvolutionTrace",
    "HamiltonianParams",
    "Model",
    "NumericalAbort",
    "RatePair",
    "Scheme",
    "Theory",
    "coherence_measure",
    "initial_state",
    "integrate",
    "run_ensemble",
]
