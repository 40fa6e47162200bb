"""Spectral engine for two damped Timoshenko beams coupled by a Van der
Waals force: modal blocks, resolvent scans, exact time propagation, and a
finite-difference cross-check oracle."""

from .model import (
    BeamParams,
    EnergyBreakdown,
    ModalState,
    ParameterError,
    dissipation,
    energy,
    energy_norm,
    sigma,
    validate_params,
)
from .blocks import ModeBlock, assemble_block, build_stack, gram_block, timoshenko_block
from .errors import NumericsError
from .resolvent import (
    LemmaScan,
    ResolventScan,
    SweepReport,
    analyticity_scan,
    default_lambda_grid,
    extend_lambda_grid,
    lemma_scan,
    mode_eigenvalues,
    resolve,
    resolvent_norm,
    spectral_abscissa,
    sweep_alpha_beta,
)
from .evolution import (
    DecayFit,
    Trajectory,
    check_energy_identity,
    eigenmode_state,
    fit_decay_rate,
    propagate,
    random_unit_state,
)
from .fdcheck import FdOperator, SpectraComparison, build_fd, compare_spectra

__all__ = [
    "BeamParams", "EnergyBreakdown", "ModalState", "ParameterError",
    "NumericsError", "ModeBlock", "Trajectory", "DecayFit",
    "ResolventScan", "LemmaScan", "SweepReport", "FdOperator",
    "SpectraComparison",
    "validate_params", "sigma", "energy", "energy_norm", "dissipation",
    "assemble_block", "gram_block", "timoshenko_block", "build_stack",
    "resolve", "resolvent_norm", "spectral_abscissa", "analyticity_scan",
    "lemma_scan", "sweep_alpha_beta", "default_lambda_grid",
    "extend_lambda_grid", "mode_eigenvalues",
    "propagate", "check_energy_identity", "fit_decay_rate",
    "random_unit_state", "eigenmode_state",
    "build_fd", "compare_spectra",
]

__version__ = "0.1.0"
