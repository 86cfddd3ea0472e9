from .dump import read_hypothesis_csv, write_hypothesis_csv
from .kernel import (
    GaussianKernel,
    KernelHypothesis,
    LinearKernel,
    kernel_active_learn,
    kernel_dual_solve,
    kernel_passive_baseline,
    kernel_primal_recover,
)
from .linear import (
    ActiveConfig,
    LinearHypothesis,
    SolverParams,
    active_learn,
    hinge_loss,
    initial_hypothesis,
    solve_constrained,
)
from .oracle import LabelOracle
from .passive import passive_baseline

__all__ = [
    "ActiveConfig", "GaussianKernel", "KernelHypothesis", "LabelOracle", "LinearHypothesis",
    "LinearKernel", "SolverParams", "active_learn", "hinge_loss", "initial_hypothesis",
    "kernel_active_learn", "kernel_dual_solve", "kernel_passive_baseline", "kernel_primal_recover",
    "passive_baseline", "read_hypothesis_csv", "solve_constrained", "write_hypothesis_csv",
]
