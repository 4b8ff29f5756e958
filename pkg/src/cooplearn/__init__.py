"""Distributed estimation from noisy relative offsets and sparse absolute measurements."""

from . import analysis, bounds, checks, graph, harness, protocol
from .graph import GraphSnapshot, GraphSequence, build_graph, generate
from .harness import ExperimentConfig, monte_carlo, run
from .protocol import NoiseModel, ProtocolState, StepsizeSchedule, step

__version__ = "0.1.0"

__all__ = [
    "analysis", "bounds", "checks", "graph", "harness", "protocol",
    "GraphSnapshot", "GraphSequence", "build_graph", "generate",
    "ExperimentConfig", "monte_carlo", "run",
    "NoiseModel", "ProtocolState", "StepsizeSchedule", "step",
]
