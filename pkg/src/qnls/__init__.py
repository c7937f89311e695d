"""Explicit q-calculus solver for the cubic nonlinear Schroedinger equation."""

from .analysis import (
    consistency_study,
    discrete_l2,
    error_Er,
    run_table,
    stability_probe,
    truncation_error,
)
from .model import (
    CustomField,
    SingleSoliton,
    SolitonParams,
    TwoSolitons,
    cubic_nonlinearity,
    initial_field,
    soliton_eval,
)
from .qgrid import QGrid, QParam, build_grid, locate, q_derivative, q_laplacian
from .scheme import (
    DivergenceError,
    EvolutionConfig,
    FieldState,
    StepMatrix,
    assemble_matrix,
    cfl_diagnostic,
    coeff,
    dominance_check,
    evolve,
    step,
)

__version__ = "0.1.0"
