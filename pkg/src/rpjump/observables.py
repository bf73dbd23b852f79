"""Yields, populations and S-T coherence diagnostics."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .master import DEGENERATE_TOL, EvolutionTrace
from .spin import S, T, singlet_projector, triplet_projector


class YieldMethod(enum.Enum):
    ODE_FLUX_INTEGRATION = "ode_flux_integration"
    TRAJECTORY_COUNTING = "trajectory_counting"


@dataclass(frozen=True)
class YieldReport:
    singlet_yield: float
    triplet_yield: float
    survival: float
    method: YieldMethod

    @property
    def total(self) -> float:
        return self.singlet_yield + self.triplet_yield + self.survival


def yields_from_trace(trace: EvolutionTrace) -> YieldReport:
    """Integrate the recorded fluxes (trapezoid rule); survival is the final pair population."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    if len(trace) == 1:
        ys = yt = 0.0
    else:
        ys = float(trapezoid(trace.singlet_flux, trace.times))
        yt = float(trapezoid(trace.triplet_flux, trace.times))
    final = trace.states[-1]
    survival = float(final[S, S].real + final[T, T].real)
    return YieldReport(ys, yt, survival, YieldMethod.ODE_FLUX_INTEGRATION)


def yields_from_ensemble(result) -> YieldReport:
    return YieldReport(
        result.singlet_yield,
        result.triplet_yield,
        result.survival_fraction,
        YieldMethod.TRAJECTORY_COUNTING,
    )


def populations(rho, QS=None, QT=None) -> tuple[float, float, float]:
    """(Tr Q_S rho, Tr Q_T rho, |<S|rho|T>|)."""
    rho = np.asarray(rho)
    QS, QT = _projectors(rho, QS, QT)
    pS = float(np.trace(QS @ rho).real)
    pT = float(np.trace(QT @ rho).real)
    return pS, pT, float(abs(rho[S, T]))


def _projectors(rho, QS, QT):
    d = rho.shape[0]
    basis = "two_level" if d == 2 else "four_level"
    return (singlet_projector(basis) if QS is None else QS, triplet_projector(basis) if QT is None else QT)


def _rotations(H, taus):
    """exp(-i H tau) for every tau, via the eigendecomposition of Hermitian H."""
    w, V = np.linalg.eigh(H)
    phases = np.exp(-1j * np.outer(taus, w))
    return np.einsum("ab,tb,cb->tac", V, phases, V.conj())


def time_averaged_coherence(rho, H, tau_max: float | None = None, n_samples: int = 256, QS=None, QT=None) -> float:
    """Coherence with rho_TS rotated by exp(-iH tau), averaged over tau in [0, tau_max].

    Returns the real part of the trapezoid average of
    Tr{rho_ST e^{-iH tau} rho_TS e^{iH tau}}, divided by Tr rho_SS Tr rho_TT
    (0 when either population is below 1e-14). Without ``tau_max`` the
    window is 10 / J with J = <S|H|S> - <T|H|T>.
    """
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    QS, QT = _projectors(rho, QS, QT)
    if tau_max is None:
        J = float((H[S, S] - H[T, T]).real)
        if J == 0:
            raise ValueError("tau_max is required when the S-T splitting J is zero")
        tau_max = 10.0 / abs(J)
    if not tau_max > 0:
        raise ValueError("tau_max must be positive")
    if n_samples < 8:
        raise ValueError("n_samples must be >= 8")
    pS = np.trace(QS @ rho @ QS).real
    pT = np.trace(QT @ rho @ QT).real
    if pS <= DEGENERATE_TOL or pT <= DEGENERATE_TOL:
        return 0.0
    taus = np.linspace(0.0, tau_max, n_samples)
    U = _rotations(H, taus)
    rho_st = QS @ rho @ QT
    rho_ts = QT @ rho @ QS
    rotated = U @ rho_ts @ U.conj().transpose(0, 2, 1)
    values = np.einsum("ab,tba->t", rho_st, rotated)
    avg = trapezoid(values, taus) / tau_max
    return float(avg.real / (pS * pT))


def factorization_discrepancy(rho, H, taus, QS=None, QT=None) -> float:
    """max over tau of |e^{-iH tau} rho_TS e^{iH tau} - Q_T e^{-iH tau} rho e^{iH tau} Q_S|.

    Zero whenever H commutes with both projectors; otherwise the rotated
    off-diagonal block is not the off-diagonal block of the rotated state.
    """
    rho = np.asarray(rho, dtype=complex)
    QS, QT = _projectors(rho, QS, QT)
    U = _rotations(np.asarray(H, dtype=complex), np.asarray(taus, dtype=float))
    Ud = U.conj().transpose(0, 2, 1)
    block_first = U @ (QT @ rho @ QS) @ Ud
    block_last = QT @ (U @ rho @ Ud) @ QS
    return float(np.abs(block_first - block_last).max())
