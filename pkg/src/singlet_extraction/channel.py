"""Conditional and unconditioned quantum maps built from the scattering
operators.

The reflection/transmission operators split into blocks labelled by the
mediator spin before and after scattering.  Each block is a Kraus operator
on the two-impurity space; detecting the outgoing mediator in a chosen
spin state realizes the conditional, post-selected map whose iteration
drives the impurities into the singlet.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .metrics import fidelity_to_pure, log_negativity
from .scattering import (
    Dispersion,
    InvariantViolation,
    ModelConfig,
    ScatteringOperators,
    solve_two_impurity,
)
from .spin_algebra import CoupledBasis

__all__ = [
    "UP",
    "DOWN",
    "KrausSet",
    "KrausMixture",
    "ChannelOutcome",
    "Trajectory",
    "TrajectoryRecord",
    "extract_kraus",
    "solve_kraus",
    "apply_unconditioned",
    "apply_conditional",
    "iterate_protocol",
    "gaussian_k_kraus",
    "flip_probability",
    "validate_density",
    "pure_density",
]

UP, DOWN = 0, 1
COMPLETENESS_TOL = 1e-10
SHIFT_TOL = 1e-12
PROBABILITY_FLOOR = 1e-14


def validate_density(rho: np.ndarray, d: int | None = None) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if d is not None and rho.shape[0] != d:
        raise ValueError(f"expected dimension {d}, got {rho.shape[0]}")
    if np.abs(rho - rho.conj().T).max() > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        raise ValueError(f"density matrix trace is {np.trace(rho).real!r}, not 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def pure_density(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a normalized state vector."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"state vector norm is {norm!r}, not 1")
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators of one scattering event, indexed [mu_out, nu_in].

    ``reflected[mu, nu]`` (``transmitted[mu, nu]``) acts on the impurities
    when the mediator enters in spin nu and is detected reflected
    (transmitted) in spin mu.
    """

    reflected: np.ndarray
    transmitted: np.ndarray
    config: ModelConfig

    @property
    def dim(self) -> int:
        return self.reflected.shape[-1]

    def pair(self, nu: int, mu: int) -> tuple:
        """(R, T) for incoming spin nu and detected outgoing spin mu."""
        return self.reflected[mu, nu], self.transmitted[mu, nu]


@dataclass(frozen=True)
class KrausMixture:
    """Convex mixture of Kraus sets, one per wavevector quadrature node."""

    sets: tuple
    weights: tuple
    config: ModelConfig

    @property
    def dim(self) -> int:
        return self.sets[0].dim


def _m12_values(d: int) -> np.ndarray:
    """Twice the S12z eigenvalue of each two-impurity product index."""
    n = math.isqrt(d)
    twice = n - 1
    m = twice - 2 * np.arange(n)
    return (m[:, None] + m[None, :]).ravel()


def extract_kraus(ops: ScatteringOperators) -> KrausSet:
    """Slice r and t into the four mediator-spin blocks each."""
    D = ops.r.shape[0]
    d = D // 2
    reflected = ops.r.reshape(2, d, 2, d).transpose(0, 2, 1, 3).copy()
    transmitted = ops.t.reshape(2, d, 2, d).transpose(0, 2, 1, 3).copy()

    eye = np.eye(d)
    for nu in (UP, DOWN):
        total = sum(
            reflected[mu, nu].conj().T @ reflected[mu, nu]
            + transmitted[mu, nu].conj().T @ transmitted[mu, nu]
            for mu in (UP, DOWN)
        )
        dev = np.abs(total - eye).max()
        if dev > COMPLETENESS_TOL:
            raise InvariantViolation(
                f"Kraus completeness violated by {dev:.3e} for nu={nu}"
            )

    tm12 = _m12_values(d)
    for mu in (UP, DOWN):
        for nu in (UP, DOWN):
            shift = (1 - 2 * nu) - (1 - 2 * mu)  # twice (nu - mu)
            allowed = tm12[:, None] == tm12[None, :] + shift
            for block in (reflected[mu, nu], transmitted[mu, nu]):
                leak = np.abs(block[~allowed]).max() if (~allowed).any() else 0.0
                if leak > SHIFT_TOL:
                    raise InvariantViolation(
                        f"m12 shift rule violated by {leak:.3e} "
                        f"for (mu={mu}, nu={nu})"
                    )
    return KrausSet(reflected, transmitted, ops.config)


def solve_kraus(config: ModelConfig) -> KrausSet:
    """Solve the scattering problem and extract its Kraus operators."""
    return extract_kraus(solve_two_impurity(config))


def _weighted_sets(kraus) -> list:
    if isinstance(kraus, KrausSet):
        return [(1.0, kraus)]
    if isinstance(kraus, KrausMixture):
        return list(zip(kraus.weights, kraus.sets))
    raise TypeError(f"expected KrausSet or KrausMixture, got {type(kraus)!r}")


def _conditional_numerator(kraus, nu: int, mu: int, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for weight, kset in _weighted_sets(kraus):
        r_op, t_op = kset.pair(nu, mu)
        out += weight * (r_op @ rho @ r_op.conj().T + t_op @ rho @ t_op.conj().T)
    return out


def apply_unconditioned(kraus, electron, rho12: np.ndarray) -> np.ndarray:
    """Trace-preserving map for a mediator in the mixture (p_up, p_down)."""
    p_up, p_down = (float(p) for p in electron)
    if p_up < 0 or p_down < 0 or abs(p_up + p_down - 1.0) > 1e-12:
        raise ValueError(
            f"electron mixture must be a probability pair, got ({p_up}, {p_down})"
        )
    d = _weighted_sets(kraus)[0][1].dim
    rho12 = validate_density(rho12, d)
    out = np.zeros_like(rho12)
    for p_nu, nu in ((p_up, UP), (p_down, DOWN)):
        if p_nu == 0.0:
            continue
        for mu in (UP, DOWN):
            out += p_nu * _conditional_numerator(kraus, nu, mu, rho12)
    return (out + out.conj().T) / 2


@dataclass(frozen=True)
class ChannelOutcome:
    """Post-selected state and the probability of obtaining it.

    ``state`` is None when the branch has probability below 1e-14 and the
    renormalized state is undefined.
    """

    state: np.ndarray | None
    probability: float


def apply_conditional(kraus, nu: int, mu: int, rho12: np.ndarray) -> ChannelOutcome:
    """Post-select the mediator entering in nu and detected in mu."""
    d = _weighted_sets(kraus)[0][1].dim
    rho12 = validate_density(rho12, d)
    num = _conditional_numerator(kraus, nu, mu, rho12)
    prob = float(np.trace(num).real)
    if prob < PROBABILITY_FLOOR:
        return ChannelOutcome(None, prob)
    state = (num + num.conj().T) / (2 * prob)
    return ChannelOutcome(state, prob)


@dataclass(frozen=True)
class TrajectoryRecord:
    n: int
    state: np.ndarray
    fidelity: float
    cumulative_probability: float
    log_negativity: float
    step_probability: float


@dataclass(frozen=True)
class Trajectory:
    """Per-iteration record of the post-selected protocol."""

    records: tuple
    truncated: bool = False

    @property
    def final(self) -> TrajectoryRecord:
        return self.records[-1]

    def fidelities(self) -> np.ndarray:
        return np.array([rec.fidelity for rec in self.records])

    def cumulative_probabilities(self) -> np.ndarray:
        return np.array([rec.cumulative_probability for rec in self.records])


def iterate_protocol(kraus, rho0: np.ndarray, n: int, target: np.ndarray,
                     nu: int = UP, mu: int = UP) -> Trajectory:
    """Apply the conditional map n times, recording the figures of merit.

    Record 0 is the initial state with cumulative probability 1.  Iteration
    stops early (``truncated=True``) if a step probability falls below the
    1e-14 floor.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    spin = _weighted_sets(kraus)[0][1].config.spin
    rho = validate_density(rho0, _weighted_sets(kraus)[0][1].dim)

    def record(i, state, cum, step):
        return TrajectoryRecord(
            n=i,
            state=state,
            fidelity=fidelity_to_pure(state, target),
            cumulative_probability=cum,
            log_negativity=log_negativity(state, spin),
            step_probability=step,
        )

    records = [record(0, rho, 1.0, 1.0)]
    cum = 1.0
    truncated = False
    for i in range(1, n + 1):
        outcome = apply_conditional(kraus, nu, mu, rho)
        if outcome.state is None:
            truncated = True
            break
        rho = outcome.state
        # probabilities may exceed 1 by rounding only; keep the cumulative
        # product monotone
        cum *= min(outcome.probability, 1.0)
        records.append(record(i, rho, cum, outcome.probability))
    return Trajectory(tuple(records), truncated)


def gaussian_k_kraus(config: ModelConfig, sigma_over_k: float,
                     nodes: int = 31) -> KrausMixture:
    """Kraus mixture for a Gaussian wavevector spread around the nominal k.

    The quadrature grid spans +-3 sigma uniformly with Gaussian weights
    normalized to unit sum.  Each node rescales the phase kx0 by k_j/k;
    for the quadratic model the dimensionless coupling g = J m*/k also
    rescales by k/k_j.  sigma_over_k = 0 degenerates to the sharp channel.
    """
    sigma = float(sigma_over_k)
    if sigma < 0 or sigma >= 0.2:
        raise ValueError(f"sigma_over_k must lie in [0, 0.2), got {sigma}")
    if sigma == 0:
        return KrausMixture((solve_kraus(config),), (1.0,), config)
    if nodes < 3 or nodes % 2 == 0:
        raise ValueError(f"nodes must be odd and >= 3, got {nodes}")

    rel = 1.0 + np.linspace(-3.0, 3.0, nodes) * sigma
    weights = np.exp(-((rel - 1.0) ** 2) / (2 * sigma ** 2))
    weights /= weights.sum()

    sets = []
    for k_ratio in rel:
        node = {"kx0_over_pi": config.kx0_over_pi * k_ratio}
        if config.dispersion is Dispersion.QUADRATIC:
            node["g"] = config.g / k_ratio
        sets.append(solve_kraus(replace(config, **node)))
    return KrausMixture(tuple(sets), tuple(float(w) for w in weights), config)


def flip_probability(kraus: KrausSet, cb: CoupledBasis, s12: int) -> float:
    """Probability that an up mediator exits down off |s,s,s12,m12=0>.

    Meaningful at resonance (kx0/pi integer), where the total two-impurity
    spin is conserved; off resonance a warning is emitted.
    """
    q = kraus.config.kx0_over_pi
    if abs(q - round(q)) > 1e-9:
        warnings.warn(
            f"flip probability evaluated off resonance (kx0/pi = {q})",
            stacklevel=2,
        )
    psi = cb.column(s12, 0)
    r_op, t_op = kraus.pair(UP, DOWN)
    return float(np.linalg.norm(r_op @ psi) ** 2 + np.linalg.norm(t_op @ psi) ** 2)
