"""Master equations for spin-selective radical-pair reactions.

Four right-hand sides are provided:

- ``rhs_haberkorn``: anticommutator decay of the singlet and triplet
  populations (the traditional phenomenological equation).
- ``rhs_jones_hore``: the same plus S-T dephasing at rate (kS + kT)/2.
- ``rhs_kominis_nonreacting``: the dephasing alone, no reaction loss.
- ``rhs_kominis_revised``: dephasing plus a reaction loss interpolated
  between an incoherent and a coherent limit by the scalar S-T coherence.

``integrate`` drives any of them with fixed-step classical RK4.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import anticommutator, check_same_dim, commutator
from .spin import Model

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
EIGEN_TOL = 1e-9
DEGENERATE_TOL = 1e-14
STABILITY_BOUND = 1e-2


class NumericalAbort(RuntimeError):
    """Integration produced non-finite values; ``step`` is the failing step index."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class Theory(enum.Enum):
    HABERKORN = "haberkorn"
    JONES_HORE = "jones_hore"
    KOMINIS_NONREACTING = "kominis_nonreacting"
    KOMINIS_REVISED = "kominis_revised"


def as_density_matrix(rho, check_positive: bool = True) -> np.ndarray:
    """Validate a (possibly trace-deficient) density matrix and return it as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr.imag) > TRACE_TOL or not -TRACE_TOL <= tr.real <= 1 + TRACE_TOL:
        raise ValueError(f"density matrix trace {tr} outside [0, 1]")
    if check_positive and np.linalg.eigvalsh(rho).min() < -EIGEN_TOL:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def pure_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def _dephasing(rho, QS):
    return rho @ QS + QS @ rho - 2.0 * QS @ rho @ QS


def rhs_haberkorn(rho, H, rates, QS, QT) -> np.ndarray:
    check_same_dim(rho, H, QS, QT)
    return (
        -1j * commutator(H, rho)
        - 0.5 * rates.kS * anticommutator(QS, rho)
        - 0.5 * rates.kT * anticommutator(QT, rho)
    )


def rhs_jones_hore(rho, H, rates, QS, QT) -> np.ndarray:
    return rhs_haberkorn(rho, H, rates, QS, QT) - 0.5 * (rates.kS + rates.kT) * _dephasing(rho, QS)


def rhs_kominis_nonreacting(rho, H, rates, QS, QT=None) -> np.ndarray:
    """Measurement-induced dephasing without reaction; the result is traceless."""
    check_same_dim(rho, H, QS)
    return -1j * commutator(H, rho) - 0.5 * (rates.kS + rates.kT) * _dephasing(rho, QS)


def coherence_measure(rho, QS, QT) -> float:
    """Scalar S-T coherence Tr(rho_ST rho_TS) / (Tr rho_SS * Tr rho_TT).

    Returns 0 when either block population is at or below 1e-14: a state
    with nothing in one subspace carries no S-T coherence.
    """
    pS = np.trace(QS @ rho @ QS).real
    pT = np.trace(QT @ rho @ QT).real
    if pS <= DEGENERATE_TOL or pT <= DEGENERATE_TOL:
        return 0.0
    num = np.trace((QS @ rho @ QT) @ (QT @ rho @ QS)).real
    return float(num / (pS * pT))


def rhs_kominis_revised(rho, H, rates, QS, QT) -> np.ndarray:
    check_same_dim(rho, H, QS, QT)
    kS, kT = rates.kS, rates.kT
    out = rhs_kominis_nonreacting(rho, H, rates, QS)
    tr = np.trace(rho).real
    if tr <= DEGENERATE_TOL:
        return out
    c = coherence_measure(rho, QS, QT)
    if not 0.0 <= c <= 1.0:
        log.debug("coherence %.17g clamped to [0, 1]", c)
        c = min(max(c, 0.0), 1.0)
    incoh = kS * (QS @ rho @ QS) + kT * (QT @ rho @ QT)
    loss = kS * np.trace(QS @ rho).real + kT * np.trace(QT @ rho).real
    return out - (1.0 - c) * incoh - c * loss * rho / tr


RHS: dict[Theory, Callable] = {
    Theory.HABERKORN: rhs_haberkorn,
    Theory.JONES_HORE: rhs_jones_hore,
    Theory.KOMINIS_NONREACTING: rhs_kominis_nonreacting,
    Theory.KOMINIS_REVISED: rhs_kominis_revised,
}


@dataclass
class EvolutionTrace:
    """Density matrices and instantaneous reaction fluxes on a uniform grid."""

    times: np.ndarray
    states: np.ndarray
    singlet_flux: np.ndarray
    triplet_flux: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def __len__(self) -> int:
        return len(self.times)


def step_count(t_end: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_end >= dt:
        raise ValueError(f"t_end must be >= dt, got t_end={t_end}, dt={dt}")
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a whole number of steps dt={dt}")
    return n


def check_stability(model: Model, dt: float) -> None:
    scale = dt * model.stiffness()
    if scale > STABILITY_BOUND * (1 + 1e-12):
        raise ValueError(
            f"dt*(||H|| + kS + kT) = {scale:.4g} exceeds {STABILITY_BOUND}; reduce dt"
        )


def integrate_rhs(f, rho0, t_end: float, dt: float, fluxes) -> EvolutionTrace:
    """Classical RK4 for ``drho/dt = f(rho)`` with Hermitian re-symmetrization.

    ``fluxes(rho)`` returns the (singlet, triplet) reaction rates recorded
    at every grid point.
    """
    n = step_count(t_end, dt)
    rho = np.array(rho0, dtype=complex)
    d = rho.shape[0]
    states = np.empty((n + 1, d, d), dtype=complex)
    flux = np.empty((n + 1, 2))
    states[0] = rho
    flux[0] = fluxes(rho)
    half = 0.5 * dt
    for i in range(1, n + 1):
        k1 = f(rho)
        k2 = f(rho + half * k1)
        k3 = f(rho + half * k2)
        k4 = f(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if not np.isfinite(rho).all():
            raise NumericalAbort("non-finite density matrix", i)
        states[i] = rho
        flux[i] = fluxes(rho)
    times = dt * np.arange(n + 1)
    return EvolutionTrace(times, states, flux[:, 0].copy(), flux[:, 1].copy())


def linear_action(rhs, d: int):
    """Return ``rho -> rhs(rho)`` as one matrix product, for an RHS that is linear in rho.

    The matrix is assembled by evaluating ``rhs`` on the d*d matrix units,
    so it is the same map, just cheaper to apply inside the RK4 loop.
    """
    M = np.empty((d * d, d * d), dtype=complex)
    unit = np.zeros(d * d, dtype=complex)
    for k in range(d * d):
        unit[k] = 1.0
        M[:, k] = rhs(unit.reshape(d, d)).ravel()
        unit[k] = 0.0

    def f(rho):
        return (M @ rho.ravel()).reshape(d, d)

    return f


def reaction_fluxes(model: Model):
    QS, QT, kS, kT = model.QS, model.QT, model.kS, model.kT

    def fluxes(rho):
        return kS * np.trace(QS @ rho).real, kT * np.trace(QT @ rho).real

    return fluxes


def integrate(theory: Theory | str, model: Model, rho0, t_end: float, dt: float) -> EvolutionTrace:
    """Integrate one of the four master equations from ``rho0`` to ``t_end``.

    Raises ValueError when ``dt*(||H|| + kS + kT) > 1e-2`` or the grid is
    not uniform, and NumericalAbort on non-finite values.
    """
    theory = Theory(theory)
    rho0 = as_density_matrix(rho0)
    if rho0.shape[0] != model.dim:
        raise ValueError(f"rho0 has dim {rho0.shape[0]}, model basis has dim {model.dim}")
    step_count(t_end, dt)
    check_stability(model, dt)
    rhs = RHS[theory]
    H, QS, QT, rates = model.H, model.QS, model.QT, model.rates

    def f(rho):
        return rhs(rho, H, rates, QS, QT)

    if theory is not Theory.KOMINIS_REVISED:
        f = linear_action(f, model.dim)
    return integrate_rhs(f, rho0, t_end, dt, reaction_fluxes(model))
