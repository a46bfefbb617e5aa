"""Entanglement and state-quality metrics for two-impurity density matrices."""

from __future__ import annotations

import numpy as np

from .spin_algebra import Spin

__all__ = ["fidelity_to_pure", "partial_transpose", "log_negativity", "purity"]


def fidelity_to_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """Overlap <psi|rho|psi> with a pure target state."""
    rho = np.asarray(rho)
    psi = np.asarray(psi)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(
            f"dimension mismatch: state of dim {psi.size}, matrix {rho.shape}"
        )
    val = psi.conj() @ rho @ psi
    if abs(val.imag) > 1e-12:
        raise ValueError(f"fidelity has imaginary residue {val.imag:.3e}")
    return float(val.real)


def partial_transpose(rho: np.ndarray, spin) -> np.ndarray:
    """Transpose the second-impurity indices of a (2s+1)^2 density matrix."""
    s = Spin.parse(spin)
    n = s.dim
    rho = np.asarray(rho)
    if rho.shape != (n * n, n * n):
        raise ValueError(f"expected a {n * n} x {n * n} matrix, got {rho.shape}")
    return (
        rho.reshape(n, n, n, n).transpose(0, 3, 2, 1).reshape(n * n, n * n)
    )


def log_negativity(rho: np.ndarray, spin) -> float:
    """log2 of the trace norm of the partial transpose.

    Eigenvalues below 1e-12 in magnitude are treated as numerical zeros so
    that separable states report exactly 0.
    """
    eigs = np.linalg.eigvalsh(partial_transpose(rho, spin))
    eigs = np.where(np.abs(eigs) < 1e-12, 0.0, eigs)
    return float(np.log2(np.abs(eigs).sum()))


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2)."""
    rho = np.asarray(rho)
    return float(np.trace(rho @ rho).real)
