"""Bases, singlet/triplet projectors and model Hamiltonians.

Basis ordering is fixed: index 0 = |S>, 1 = |T>, 2 = |S0>, 3 = |T0>.
The two-level basis keeps only the radical-pair states {S, T}; the
four-level basis adds the singlet and triplet product ("shelf") states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .linalg import check_same_dim, dagger

S, T, S0, T0 = 0, 1, 2, 3


class Basis(enum.Enum):
    TWO_LEVEL = "two_level"
    FOUR_LEVEL = "four_level"

    @property
    def dim(self) -> int:
        return 2 if self is Basis.TWO_LEVEL else 4


def _as_basis(basis: Basis | str) -> Basis:
    return basis if isinstance(basis, Basis) else Basis(basis)


def ket(index: int, basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    basis = _as_basis(basis)
    if not 0 <= index < basis.dim:
        raise ValueError(f"state index {index} outside {basis.value} basis")
    v = np.zeros(basis.dim, dtype=complex)
    v[index] = 1.0
    return v


def outer(i: int, j: int, basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    """The operator |i><j| in ``basis``."""
    return np.outer(ket(i, basis), ket(j, basis).conj())


def singlet_projector(basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    return outer(S, S, basis)


def triplet_projector(basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    return outer(T, T, basis)


def pair_identity(basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    """Identity restricted to the radical-pair {S, T} subspace."""
    return singlet_projector(basis) + triplet_projector(basis)


@dataclass(frozen=True)
class RatePair:
    kS: float
    kT: float

    def __post_init__(self):
        for name in ("kS", "kT"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class HamiltonianParams:
    """S-T energy splitting ``J`` and off-diagonal S<->T mixing ``delta``."""

    J: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("J", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def build_hamiltonian(params: HamiltonianParams, basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    """H = J |S><S| + delta (|S><T| + |T><S|), zero on the product states.

    With ``delta == 0`` the result commutes with both projectors.
    """
    basis = _as_basis(basis)
    H = params.J * outer(S, S, basis)
    H = H + params.delta * (outer(S, T, basis) + outer(T, S, basis))
    return H


def effective_hamiltonian(H: np.ndarray, lindblads) -> np.ndarray:
    """Non-Hermitian H_eff = H - (i/2) sum_i L_i^dag L_i."""
    lindblads = list(lindblads)
    check_same_dim(H, *lindblads)
    Heff = np.array(H, dtype=complex)
    for L in lindblads:
        Heff = Heff - 0.5j * (dagger(L) @ L)
    return Heff


def traditional_lindblads(rates: RatePair) -> list[np.ndarray]:
    """Product-channel jump operators sqrt(kS)|S0><S| and sqrt(kT)|T0><T|.

    These only exist in the four-level basis; their H_eff restricted to
    {S, T} is the traditional H - i kS/2 Q_S - i kT/2 Q_T.
    """
    return [
        math.sqrt(rates.kS) * outer(S0, S, Basis.FOUR_LEVEL),
        math.sqrt(rates.kT) * outer(T0, T, Basis.FOUR_LEVEL),
    ]


def jones_hore_lindblads(rates: RatePair) -> list[np.ndarray]:
    """The four jump operators of the measurement picture, rate-scaled.

    Order: sqrt(kS) J1, sqrt(kT) J2, sqrt(kS) J3, sqrt(kT) J4 with
    J1 = |S0><S|, J2 = |T0><T|, J3 = |T><T|, J4 = |S><S|.
    """
    sS, sT = math.sqrt(rates.kS), math.sqrt(rates.kT)
    b = Basis.FOUR_LEVEL
    return [sS * outer(S0, S, b), sT * outer(T0, T, b), sS * outer(T, T, b), sT * outer(S, S, b)]


@dataclass(frozen=True)
class Model:
    """A radical-pair model: basis, Hamiltonian parameters and reaction rates."""

    params: HamiltonianParams
    rates: RatePair
    basis: Basis = Basis.TWO_LEVEL

    @classmethod
    def from_values(cls, J=0.0, delta=0.0, kS=0.0, kT=0.0, basis=Basis.TWO_LEVEL) -> "Model":
        return cls(HamiltonianParams(J, delta), RatePair(kS, kT), _as_basis(basis))

    @property
    def dim(self) -> int:
        return self.basis.dim

    @cached_property
    def H(self) -> np.ndarray:
        return build_hamiltonian(self.params, self.basis)

    @cached_property
    def QS(self) -> np.ndarray:
        return singlet_projector(self.basis)

    @cached_property
    def QT(self) -> np.ndarray:
        return triplet_projector(self.basis)

    @property
    def kS(self) -> float:
        return self.rates.kS

    @property
    def kT(self) -> float:
        return self.rates.kT

    def with_basis(self, basis: Basis | str) -> "Model":
        return Model(self.params, self.rates, _as_basis(basis))

    def stiffness(self) -> float:
        """||H|| + kS + kT, the scale that bounds a stable step size."""
        return float(np.linalg.norm(self.H, 2)) + self.kS + self.kT


def initial_state(descriptor, basis: Basis | str = Basis.TWO_LEVEL) -> np.ndarray:
    """Normalized pure state from "S", "T", "coherent" or an amplitude pair."""
    basis = _as_basis(basis)
    if isinstance(descriptor, str):
        key = descriptor.strip().lower()
        if key == "s":
            return ket(S, basis)
        if key == "t":
            return ket(T, basis)
        if key == "coherent":
            return (ket(S, basis) + ket(T, basis)) / math.sqrt(2.0)
        raise ValueError(f"unknown initial state {descriptor!r}")
    a, b = (complex(x) for x in descriptor)
    psi = a * ket(S, basis) + b * ket(T, basis)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"amplitude pair must be normalized, |psi| = {norm!r}")
    return psi
