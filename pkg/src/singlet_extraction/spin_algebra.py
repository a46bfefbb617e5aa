"""Spin algebra for one spin-1/2 mediator and two spin-s impurities.

Conventions, fixed once for the whole package:

* basis states of every spin factor are ordered by decreasing magnetic
  quantum number (m = s, s-1, ..., -s),
* joint-space factors are ordered electron (x) impurity-1 (x) impurity-2
  (the "electron" slot holds the photon polarization in the waveguide
  model),
* the coupled two-impurity basis uses Condon-Shortley phases, built by
  lowering from the highest-weight state of each total-spin sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "Spin",
    "SpinOperators",
    "CoupledBasis",
    "make_spin_ops",
    "embed",
    "pair_total_sz",
    "pair_total_spin_squared",
    "coupled_basis",
    "singlet_state",
    "chi_rate",
]

SLOTS = ("electron", "imp1", "imp2")


@dataclass(frozen=True, order=True)
class Spin:
    """Half-integer spin quantum number, stored as 2s so values stay exact."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)):
            raise TypeError(f"twice must be an integer, got {self.twice!r}")
        if self.twice < 1:
            raise ValueError(f"spin must be at least 1/2, got {self.twice}/2")

    @classmethod
    def parse(cls, value) -> "Spin":
        """Accept Spin, '3/2', '2', or a numeric value on the half-integer grid."""
        if isinstance(value, Spin):
            return value
        try:
            frac = Fraction(value)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"cannot interpret {value!r} as a spin") from exc
        if frac.denominator not in (1, 2):
            raise ValueError(f"{value!r} is not an integer or half-integer spin")
        return cls(int(frac * 2))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def dim(self) -> int:
        """Dimension 2s+1 of the single-spin space."""
        return self.twice + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order (descending)."""
        return (self.twice - 2 * np.arange(self.dim)) / 2

    def __str__(self):
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"


@dataclass(frozen=True)
class SpinOperators:
    """Matrix representations of the spin-s operators, basis m descending."""

    spin: Spin
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    sp: np.ndarray
    sm: np.ndarray


def make_spin_ops(spin) -> SpinOperators:
    """Build the (2s+1)-dimensional spin matrices from the ladder algebra."""
    s = Spin.parse(spin)
    m = s.m_values()
    sz = np.diag(m).astype(complex)
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)); with m descending these entries
    # sit on the first superdiagonal.
    amp = np.sqrt(s.value * (s.value + 1) - m[1:] * (m[1:] + 1))
    sp = np.zeros((s.dim, s.dim), dtype=complex)
    sp[np.arange(s.dim - 1), np.arange(1, s.dim)] = amp
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return SpinOperators(s, sx, sy, sz, sp, sm)


def embed(op, slot: str, spin) -> np.ndarray:
    """Embed a one-factor operator into electron (x) imp1 (x) imp2.

    The remaining slots are filled with identities, so operators embedded
    into different slots always commute.
    """
    s = Spin.parse(spin)
    dims = {"electron": 2, "imp1": s.dim, "imp2": s.dim}
    if slot not in dims:
        raise ValueError(f"slot must be one of {SLOTS}, got {slot!r}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(
            f"operator shape {op.shape} does not match slot {slot!r} "
            f"of dimension {dims[slot]}"
        )
    mats = [op if name == slot else np.eye(dims[name]) for name in SLOTS]
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def _pair_total(op: np.ndarray) -> np.ndarray:
    """op(x)1 + 1(x)op on the two-impurity product space."""
    n = op.shape[0]
    eye = np.eye(n)
    return np.kron(op, eye) + np.kron(eye, op)


def pair_total_sz(spin) -> np.ndarray:
    """S1z + S2z on the (2s+1)^2 two-impurity space."""
    return _pair_total(make_spin_ops(spin).sz)


def pair_total_spin_squared(spin) -> np.ndarray:
    """(S1 + S2)^2 on the (2s+1)^2 two-impurity space."""
    ops = make_spin_ops(spin)
    total = [_pair_total(c) for c in (ops.sx, ops.sy, ops.sz)]
    return sum(c @ c for c in total)


@dataclass(frozen=True)
class CoupledBasis:
    """Unitary change of basis |m1,m2> -> |s12,m12> for two equal spins.

    Columns of ``matrix`` are the coupled states, ordered by decreasing
    total spin s12 and, inside each sector, by decreasing m12.  ``labels``
    holds the (s12, m12) pair of each column; both are integers for two
    equal spins.
    """

    spin: Spin
    matrix: np.ndarray
    labels: tuple

    def column(self, s12: int, m12: int) -> np.ndarray:
        """The coupled state |s12, m12> as a product-basis vector."""
        try:
            idx = self.labels.index((s12, m12))
        except ValueError:
            raise ValueError(
                f"no coupled state (s12={s12}, m12={m12}) for spin {self.spin}"
            ) from None
        return self.matrix[:, idx].copy()

    def sector_indices(self, s12: int) -> np.ndarray:
        """Column indices of the total-spin-s12 block."""
        idx = np.array([i for i, (t, _) in enumerate(self.labels) if t == s12])
        if idx.size == 0:
            raise ValueError(f"no sector s12={s12} for spin {self.spin}")
        return idx


def coupled_basis(spin) -> CoupledBasis:
    """Construct the coupled basis of two equal spins constructively.

    The highest sector starts from |s,s>; every lower sector's top state is
    the unique vector of the m12 = s12 product subspace orthogonal to all
    higher sectors, with its coefficient on |m1=s, m2=s12-s> chosen real
    positive (Condon-Shortley).  Lower m12 states follow by applying the
    total lowering operator.
    """
    s = Spin.parse(spin)
    n = s.dim
    d = n * n
    ops = make_spin_ops(s)
    lower = _pair_total(ops.sm)

    # m12 (in units of 1) of each product index, i = i1*n + i2
    m_single = s.m_values()
    m12_of = (m_single[:, None] + m_single[None, :]).ravel()

    columns = np.zeros((d, d), dtype=complex)
    labels = []
    col = 0
    tops_by_m12 = {}  # m12 -> list of already-built columns with that m12

    for s12 in range(s.twice, -1, -1):
        if s12 == s.twice:
            top = np.zeros(d, dtype=complex)
            top[0] = 1.0  # |m1=s, m2=s>
        else:
            sub = np.flatnonzero(np.abs(m12_of - s12) < 1e-9)
            prev = np.array([v[sub] for v in tops_by_m12.get(s12, [])])
            # the orthogonal complement inside the m12 = s12 subspace is
            # one-dimensional; its direction is the last right-singular vector
            _, _, vh = np.linalg.svd(prev)
            top = np.zeros(d, dtype=complex)
            top[sub] = vh[-1]
            # phase fix: coefficient on |m1=s, m2=s12-s> real positive
            anchor = top[s.twice - s12]
            top *= np.conj(anchor) / abs(anchor)
            top = top / np.linalg.norm(top)

        vec = top
        for m12 in range(s12, -s12 - 1, -1):
            columns[:, col] = vec
            labels.append((s12, m12))
            tops_by_m12.setdefault(m12, []).append(columns[:, col].copy())
            col += 1
            if m12 > -s12:
                norm = math.sqrt(s12 * (s12 + 1) - m12 * (m12 - 1))
                vec = lower @ vec / norm

    return CoupledBasis(s, columns, tuple(labels))


def singlet_state(spin) -> np.ndarray:
    """The total-spin-zero state sum_m (-1)^(s-m) |m,-m> / sqrt(2s+1)."""
    s = Spin.parse(spin)
    n = s.dim
    vec = np.zeros(n * n, dtype=complex)
    for i in range(n):
        # m = s - i pairs with -m at index 2s - i; (-1)^(s-m) = (-1)^i
        vec[i * n + (s.twice - i)] = (-1) ** i
    return vec / math.sqrt(n)


def chi_rate(spin, m) -> float:
    """Ladder rate factor sqrt(s(s+1) - m(m+1)) for the m -> m+1 transition.

    Valid for m on the half-integer grid of s with -s <= m <= s-1.
    """
    s = Spin.parse(spin)
    tm = round(2 * m)
    if abs(2 * m - tm) > 1e-9 or (tm - s.twice) % 2 != 0:
        raise ValueError(f"m={m} is not on the m-grid of spin {s}")
    if tm < -s.twice or tm > s.twice - 2:
        raise ValueError(f"m={m} outside [-s, s-1] for spin {s}")
    mm = tm / 2
    return math.sqrt(s.value * (s.value + 1) - mm * (mm + 1))
