"""Singlet extraction from two spin-s impurities by repeated scattering of
spin-carrying mediators and post-selection of their outgoing spin."""

from .spin_algebra import (
    Spin,
    SpinOperators,
    CoupledBasis,
    make_spin_ops,
    embed,
    pair_total_sz,
    pair_total_spin_squared,
    coupled_basis,
    singlet_state,
    chi_rate,
)
from .scattering import (
    Dispersion,
    Coupling,
    ModelConfig,
    ScatteringOperators,
    InvariantViolation,
    ScatteringSolveError,
    electron_model,
    photon_model,
    coupling_operator,
    solve_two_impurity,
    solve_single_impurity_closed_form,
    solve_via_transfer_matrices,
    full_s_matrix,
    verify_unitarity,
)
from .channel import (
    UP,
    DOWN,
    KrausSet,
    KrausMixture,
    ChannelOutcome,
    Trajectory,
    TrajectoryRecord,
    extract_kraus,
    solve_kraus,
    apply_unconditioned,
    apply_conditional,
    iterate_protocol,
    gaussian_k_kraus,
    flip_probability,
    validate_density,
    pure_density,
)
from .metrics import fidelity_to_pure, partial_transpose, log_negativity, purity

__version__ = "0.1.0"
