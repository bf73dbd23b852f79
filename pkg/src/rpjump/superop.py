"""Liouville-space generators, the jump (Dyson) expansion and the four-level model.

Vectorization is column stacking: ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import numpy as np

from .linalg import check_same_dim, dagger, expm
from .master import (
    EvolutionTrace,
    as_density_matrix,
    check_stability,
    integrate_rhs,
    linear_action,
    reaction_fluxes,
    step_count,
)
from .spin import Basis, Model, RatePair, jones_hore_lindblads, traditional_lindblads


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.shape[0])))
    if d * d != v.shape[0]:
        raise ValueError(f"length {v.shape[0]} is not a perfect square")
    return np.asarray(v).reshape(d, d, order="F")


def lindblad_rhs(rho, H, lindblads) -> np.ndarray:
    """Direct evaluation of -i[H, rho] + sum_i (L rho L^dag - {L^dag L, rho}/2)."""
    lindblads = list(lindblads)
    check_same_dim(rho, H, *lindblads)
    out = -1j * (H @ rho - rho @ H)
    for L in lindblads:
        LdL = dagger(L) @ L
        out = out + L @ rho @ dagger(L) - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def jump_superoperator(lindblads, dim: int | None = None) -> np.ndarray:
    """The jump part sum_i L_i . L_i^dag as a dim^2 x dim^2 matrix."""
    lindblads = list(lindblads)
    if dim is None:
        dim = check_same_dim(*lindblads)
    J = np.zeros((dim * dim, dim * dim), dtype=complex)
    for L in lindblads:
        J += np.kron(L.conj(), L)
    return J


def lindblad_superoperator(H, lindblads) -> np.ndarray:
    """Full Lindblad generator as a dim^2 x dim^2 matrix (column stacking)."""
    lindblads = list(lindblads)
    d = check_same_dim(H, *lindblads)
    eye = np.eye(d)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for A in lindblads:
        AdA = dagger(A) @ A
        L = L - 0.5 * (np.kron(eye, AdA) + np.kron(AdA.T, eye))
    return L + jump_superoperator(lindblads, d)


def _simpson_weights(n: int, h: float) -> np.ndarray:
    """Uniform-grid weights on n intervals: Simpson, with a 3/8 tail for odd n."""
    w = np.zeros(n + 1)
    if n == 0:
        return w
    if n == 1:
        w[:] = 0.5 * h
        return w
    m = n if n % 2 == 0 else n - 3
    if m > 0:
        w[: m + 1 : 2] += 2.0 * h / 3.0
        w[1:m:2] += 4.0 * h / 3.0
        w[0] -= h / 3.0
        w[m] -= h / 3.0
    if m != n:
        w[m : m + 4] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


def dyson_expand(L: np.ndarray, Jop: np.ndarray, t: float, k_max: int, quad_points: int = 64) -> np.ndarray:
    """Propagator e^{L t} as a sum over jump counts 0..k_max.

    The k-jump term obeys T_k(t) = int_0^t e^{(L-J)(t-s)} J T_{k-1}(s) ds
    with T_0(t) = e^{(L-J)t}; each nested integral is evaluated on the
    same uniform grid of ``quad_points`` intervals.
    """
    L = np.asarray(L, dtype=complex)
    Jop = np.asarray(Jop, dtype=complex)
    if L.shape != Jop.shape or L.shape[0] != L.shape[1]:
        raise ValueError("L and Jop must be square superoperators of equal shape")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    if t < 0 or t * np.linalg.norm(L, 2) > 2.0:
        raise ValueError("need 0 <= t and t*||L|| <= 2 for the truncated expansion")

    m = quad_points
    h = t / m
    A = L - Jop
    step = expm(A * h)
    E = np.empty((m + 1,) + L.shape, dtype=complex)
    E[0] = np.eye(L.shape[0])
    for j in range(1, m + 1):
        E[j] = E[j - 1] @ step

    T = E.copy()
    total = T[m].copy()
    for _ in range(k_max):
        G = np.einsum("ab,jbc->jac", Jop, T)
        nxt = np.zeros_like(T)
        for j in range(1, m + 1):
            w = _simpson_weights(j, h)
            # E[j - i] for i = 0..j
            nxt[j] = np.einsum("i,iab,ibc->ac", w, E[j::-1], G[: j + 1])
        T = nxt
        total += T[m]
    return total


def four_level_lindblads(rates: RatePair, scheme: str = "jones_hore") -> list[np.ndarray]:
    if scheme == "jones_hore":
        return jones_hore_lindblads(rates)
    if scheme == "traditional":
        return traditional_lindblads(rates)
    raise ValueError(f"unknown four-level scheme {scheme!r}")


def four_level_rhs(rho4, Hsys, rates: RatePair) -> np.ndarray:
    """Trace-preserving four-level Lindblad RHS with the four rate-scaled jump operators.

    Its {S, T} block reproduces the Jones-Hore equation for states with no
    coherence between the pair and the product states.
    """
    if np.shape(rho4) != (4, 4):
        raise ValueError(f"four-level state must be 4x4, got {np.shape(rho4)}")
    return lindblad_rhs(rho4, Hsys, jones_hore_lindblads(rates))


def integrate_four_level(model: Model, rho0, t_end: float, dt: float, scheme: str = "jones_hore") -> EvolutionTrace:
    """RK4 integration of the four-level Lindblad model (products included)."""
    model = model.with_basis(Basis.FOUR_LEVEL)
    rho0 = as_density_matrix(rho0)
    if rho0.shape != (4, 4):
        raise ValueError("four-level integration needs a 4x4 initial state")
    step_count(t_end, dt)
    check_stability(model, dt)
    H = model.H
    lindblads = four_level_lindblads(model.rates, scheme)

    f = linear_action(lambda rho: lindblad_rhs(rho, H, lindblads), 4)
    return integrate_rhs(f, rho0, t_end, dt, reaction_fluxes(model))
