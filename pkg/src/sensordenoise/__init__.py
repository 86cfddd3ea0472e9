"""Label denoising for sensor fields via best-response dynamics, plus
margin-based active learning of the underlying boundary."""

from .dynamics import (
    AdversarialSweep,
    Conservative,
    GivenSequence,
    Majority,
    RandomPermutationPerRound,
    Synchronous,
    Trajectory,
    run,
)
from .field import (
    LinearTarget,
    SensorField,
    SineTarget,
    corrupt_pockets,
    corrupt_random,
    make_field,
    random_linear_target,
    sample_unit_ball,
)
from .graph import NeighborGraph, build_graph, max_deviation_incentive, payoffs
from .metrics import angle_error, empirical_error, noise_rate

__version__ = "0.1.0"

__all__ = [
    "AdversarialSweep", "Conservative", "GivenSequence", "LinearTarget", "Majority",
    "NeighborGraph", "RandomPermutationPerRound", "SensorField", "SineTarget", "Synchronous",
    "Trajectory", "angle_error", "build_graph", "corrupt_pockets", "corrupt_random",
    "empirical_error", "make_field", "max_deviation_incentive", "noise_rate", "payoffs",
    "random_linear_target", "run", "sample_unit_ball",
]
