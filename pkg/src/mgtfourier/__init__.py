"""Numerical stability and regularity checks for the MGT-Fourier system with
fractional coupling A**phi, represented mode by mode through the eigenvalues
of A."""

from .model import (
    ModelParams,
    ModeBlock,
    NumericalDefect,
    ParameterError,
    SpectrumError,
    SpectrumModel,
    assemble_block,
    build_spectrum,
    dissipation_rate,
    mode_norm,
    mode_state,
    validate_params,
)
from .blocknum import (
    ModalStack,
    SingularResolventError,
    block_eigenvalues,
    block_propagator,
    block_resolvent_norm,
    resolvent_solve,
    weighted_map_norm,
)
from .sweep import (
    FitError,
    FitResult,
    analyticity_index,
    fit_exponent,
    global_resolvent_norm,
    resonance_frequencies,
    run_sweep,
    track_peaks,
)
from .probe import Regime, probe, probe_asymptotic, probe_exact, probe_series, scaling_report
from .evolve import energy_balance_defect, evolve, fit_decay_rate, random_initial_state

__version__ = "0.1.0"
