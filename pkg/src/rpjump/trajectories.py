"""Quantum-jump unravelings of the radical-pair master equations.

Three single-step schemes are implemented, each drawing one uniform
number per step against a fixed, ordered list of branch probabilities:

- traditional: no jump, singlet product, triplet product. The no-jump
  branch propagates with H - i kS/2 Q_S - i kT/2 Q_T and renormalizes.
- Jones-Hore: no jump (weight 1 - kS dt - kT dt), singlet product,
  projection onto |T>, triplet product, projection onto |S>. The no-jump
  branch propagates with H - i (kS + kT)/2 on the pair subspace.
- Kominis (kT = 0 only): whole-state removal with p_r = kS <Q_S> dt,
  then projections with conditional weights kS <Q_S> dt / 2 and
  kS <Q_T> dt / 2, otherwise purely unitary evolution with no norm decay.

``run_ensemble`` runs many trajectories through a compiled loop. Each
trajectory draws from its own stream seeded by (seed, trajectory index),
so results do not depend on how trajectories are split across workers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .linalg import taylor_series
from .master import step_count
from .spin import S, S0, T, T0, Basis, Model, effective_hamiltonian, jones_hore_lindblads, traditional_lindblads

PROPAGATION_BOUND = 1e-2
CHUNK_SIZE = 256


class Event(enum.IntEnum):
    NO_JUMP = _kernel.NO_JUMP
    SINGLET_PRODUCT = _kernel.SINGLET_PRODUCT
    TRIPLET_PRODUCT = _kernel.TRIPLET_PRODUCT
    PROJECT_S = _kernel.PROJECT_S
    PROJECT_T = _kernel.PROJECT_T
    KOMINIS_REMOVE = _kernel.KOMINIS_REMOVE

    @property
    def terminal(self) -> bool:
        return self in (Event.SINGLET_PRODUCT, Event.TRIPLET_PRODUCT, Event.KOMINIS_REMOVE)


class Scheme(enum.Enum):
    TRADITIONAL = "traditional"
    JONES_HORE = "jones_hore"
    KOMINIS = "kominis"


_SCHEME_CODE = {
    Scheme.TRADITIONAL: _kernel.TRADITIONAL,
    Scheme.JONES_HORE: _kernel.JONES_HORE,
    Scheme.KOMINIS: _kernel.KOMINIS,
}


def no_jump_propagate(psi, Heff, dt: float):
    """Apply exp(-i Heff dt) via its 4th-order Taylor series.

    Returns the unnormalized state and the norm loss
    ``dp = ||psi||^2 - ||psi'||^2``.
    """
    psi = np.asarray(psi, dtype=complex)
    Heff = np.asarray(Heff, dtype=complex)
    if dt <= 0 or dt * np.linalg.norm(Heff, 2) > PROPAGATION_BOUND * (1 + 1e-12):
        raise ValueError(f"need 0 < dt and dt*||Heff|| <= {PROPAGATION_BOUND}")
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 <= 0:
        raise ValueError("cannot propagate a zero state")
    out = taylor_series(-1j * dt * Heff, 4) @ psi
    return out, norm2 - float(np.vdot(out, out).real)


def scheme_heff(scheme: Scheme | str, model: Model) -> np.ndarray:
    """No-jump generator of a scheme, restricted to the model's basis.

    Built from the four-level jump operators so that the restriction to
    {S, T} is exactly what the master-equation derivations use.
    """
    scheme = Scheme(scheme)
    H4 = model.with_basis(Basis.FOUR_LEVEL).H
    if scheme is Scheme.TRADITIONAL:
        Heff = effective_hamiltonian(H4, traditional_lindblads(model.rates))
    elif scheme is Scheme.JONES_HORE:
        Heff = effective_hamiltonian(H4, jones_hore_lindblads(model.rates))
    else:
        Heff = H4.astype(complex)
    d = model.dim
    return Heff[:d, :d].copy()


def _pair_populations(psi):
    return abs(psi[S]) ** 2, abs(psi[T]) ** 2


def branch_probabilities(scheme: Scheme | str, psi, model: Model, dt: float) -> list[tuple[Event, float]]:
    """Ordered (event, probability) pairs for one step from a normalized state."""
    scheme = Scheme(scheme)
    ps, pt = _pair_populations(psi)
    kS, kT = model.kS, model.kT
    if scheme is Scheme.TRADITIONAL:
        return [
            (Event.NO_JUMP, 1.0 - kS * ps * dt - kT * pt * dt),
            (Event.SINGLET_PRODUCT, kS * ps * dt),
            (Event.TRIPLET_PRODUCT, kT * pt * dt),
        ]
    if scheme is Scheme.JONES_HORE:
        return [
            (Event.NO_JUMP, 1.0 - kS * dt - kT * dt),
            (Event.SINGLET_PRODUCT, kS * ps * dt),
            (Event.PROJECT_T, kS * pt * dt),
            (Event.TRIPLET_PRODUCT, kT * pt * dt),
            (Event.PROJECT_S, kT * ps * dt),
        ]
    _require_kominis_rates(model)
    pr = kS * ps * dt
    qs = (1.0 - pr) * 0.5 * kS * ps * dt
    qt = (1.0 - pr) * 0.5 * kS * pt * dt
    return [
        (Event.KOMINIS_REMOVE, pr),
        (Event.PROJECT_S, qs),
        (Event.PROJECT_T, qt),
        (Event.NO_JUMP, 1.0 - pr - qs - qt),
    ]


def _require_kominis_rates(model: Model) -> None:
    if model.kT != 0:
        raise ValueError("Kominis scheme requires kT=0")


def _select(branches, u: float) -> Event:
    c = 0.0
    for event, p in branches:
        c += p
        if u < c:
            return event
    # only reachable through rounding of a total that is 1 algebraically
    return Event.NO_JUMP


def _product_state(event: Event, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    if dim == 4:
        out[T0 if event is Event.TRIPLET_PRODUCT else S0] = 1.0
    return out


def _project(psi, index: int) -> np.ndarray:
    out = np.zeros_like(psi)
    out[index] = psi[index] / abs(psi[index])
    return out


def _step(scheme: Scheme, psi, model: Model, dt: float, u: float):
    psi = np.asarray(psi, dtype=complex)
    event = _select(branch_probabilities(scheme, psi, model, dt), u)
    if event.terminal:
        # the pair left {S, T}: |S0>/|T0> in the four-level basis, nothing in two-level
        return _product_state(event, len(psi)), event
    if event is Event.PROJECT_S:
        return _project(psi, S), event
    if event is Event.PROJECT_T:
        return _project(psi, T), event
    out, _ = no_jump_propagate(psi, scheme_heff(scheme, model), dt)
    return out / np.linalg.norm(out), event


def step_traditional(psi, model: Model, dt: float, u: float):
    """One step of the traditional unraveling; returns (state, event)."""
    return _step(Scheme.TRADITIONAL, psi, model, dt, u)


def step_jones_hore(psi, model: Model, dt: float, u: float):
    """One step of the measurement (Jones-Hore) unraveling; returns (state, event)."""
    return _step(Scheme.JONES_HORE, psi, model, dt, u)


def step_kominis(psi, model: Model, dt: float, u: float):
    """One step of the Kominis single-molecule scheme (kT must be 0).

    The no-event branch is plain unitary evolution: there is deliberately
    no non-Hermitian norm decay here.
    """
    _require_kominis_rates(model)
    return _step(Scheme.KOMINIS, psi, model, dt, u)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index`` of an ensemble seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass
class EnsembleResult:
    """Aggregated outcome of ``n_traj`` trajectories.

    ``mean_rho[r]`` is the unnormalized ensemble mean of |psi><psi| at
    ``times[r]``; reacted trajectories contribute nothing to the pair
    block and, in the four-level basis, sit in |S0> or |T0>.
    ``pop_sq[r]`` holds the mean of <Q_S>^2 and <Q_T>^2 for error bars.
    """

    scheme: Scheme
    n_traj: int
    seed: int
    dt: float
    times: np.ndarray
    mean_rho: np.ndarray
    pop_sq: np.ndarray
    singlet_count: int
    triplet_count: int
    events: np.ndarray = field(repr=False)
    event_steps: np.ndarray = field(repr=False)
    pre_event_ps: np.ndarray = field(repr=False)
    project_s_count: int = 0
    project_t_count: int = 0

    @property
    def survival_count(self) -> int:
        return self.n_traj - self.singlet_count - self.triplet_count

    @property
    def singlet_yield(self) -> float:
        return self.singlet_count / self.n_traj

    @property
    def triplet_yield(self) -> float:
        return self.triplet_count / self.n_traj

    @property
    def survival_fraction(self) -> float:
        return self.survival_count / self.n_traj

    def populations(self) -> np.ndarray:
        """Mean (<Q_S>, <Q_T>) per record, shape (n_rec, 2)."""
        return np.stack([self.mean_rho[:, S, S].real, self.mean_rho[:, T, T].real], axis=1)

    def population_stderr(self) -> np.ndarray:
        """Empirical standard error of ``populations()``."""
        m1 = self.populations()
        var = np.clip(self.pop_sq - m1**2, 0.0, None) * self.n_traj / max(self.n_traj - 1, 1)
        return np.sqrt(var / self.n_traj)


def _run_chunk(code, psi0, U, kS, kT, dt, n_steps, record_every, seed, start, stop, n_rec):
    acc_rho = np.zeros((n_rec, 2, 2), dtype=complex)
    acc_pop2 = np.zeros((n_rec, 2))
    counts = np.zeros(2, dtype=np.int64)
    m = stop - start
    events = np.zeros(m, dtype=np.int8)
    steps = np.full(m, -1, dtype=np.int64)
    pre = np.zeros(m)
    a, b = complex(psi0[S]), complex(psi0[T])
    for j, i in enumerate(range(start, stop)):
        ev, st, ps = _kernel.run_trajectory(
            code, a, b, U, kS, kT, dt, n_steps, record_every, trajectory_rng(seed, i), acc_rho, acc_pop2, counts
        )
        events[j], steps[j], pre[j] = ev, st, ps
    return acc_rho, acc_pop2, counts, events, steps, pre


def run_ensemble(
    scheme: Scheme | str,
    model: Model,
    psi0,
    n_traj: int,
    t_end: float,
    dt: float,
    seed: int = 0,
    record_every: int = 1,
    workers: int = 1,
) -> EnsembleResult:
    """Simulate ``n_traj`` independent trajectories and average them.

    Mean states are recorded every ``record_every`` steps (and at t=0).
    The reduction runs over fixed chunks of trajectories in index order,
    so the result is bit-identical for any ``workers`` count.
    """
    scheme = Scheme(scheme)
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if scheme is Scheme.KOMINIS:
        _require_kominis_rates(model)
    n_steps = step_count(t_end, dt)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (model.dim,):
        raise ValueError(f"psi0 must have length {model.dim}")
    if abs(np.linalg.norm(psi0) - 1) > 1e-9 or np.linalg.norm(psi0[2:]) > 0:
        raise ValueError("psi0 must be a normalized radical-pair state")
    Heff = scheme_heff(scheme, model)
    if dt * np.linalg.norm(Heff, 2) > PROPAGATION_BOUND * (1 + 1e-12):
        raise ValueError(f"dt*||Heff|| exceeds {PROPAGATION_BOUND}; reduce dt")
    U = np.ascontiguousarray(taylor_series(-1j * dt * Heff[:2, :2], 4))
    n_rec = n_steps // record_every + 1
    code = _SCHEME_CODE[scheme]

    bounds = [(s, min(s + CHUNK_SIZE, n_traj)) for s in range(0, n_traj, CHUNK_SIZE)]
    args = (code, psi0, U, model.kS, model.kT, dt, n_steps, record_every, int(seed))

    def job(bound):
        return _run_chunk(*args, bound[0], bound[1], n_rec)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]

    acc_rho = np.zeros((n_rec, 2, 2), dtype=complex)
    acc_pop2 = np.zeros((n_rec, 2))
    proj = np.zeros(2, dtype=np.int64)
    for rho_part, pop_part, c, *_ in parts:
        acc_rho += rho_part
        acc_pop2 += pop_part
        proj += c
    events = np.concatenate([p[3] for p in parts])
    steps = np.concatenate([p[4] for p in parts])
    pre = np.concatenate([p[5] for p in parts])

    d = model.dim
    mean_rho = np.zeros((n_rec, d, d), dtype=complex)
    mean_rho[:, :2, :2] = acc_rho / n_traj
    rec_steps = np.arange(n_rec) * record_every
    singlet_mask = (events == Event.SINGLET_PRODUCT) | (events == Event.KOMINIS_REMOVE)
    triplet_mask = events == Event.TRIPLET_PRODUCT
    if d == 4:
        mean_rho[:, S0, S0] = np.searchsorted(np.sort(steps[singlet_mask]), rec_steps, side="right") / n_traj
        mean_rho[:, T0, T0] = np.searchsorted(np.sort(steps[triplet_mask]), rec_steps, side="right") / n_traj

    return EnsembleResult(
        scheme=scheme,
        n_traj=n_traj,
        seed=int(seed),
        dt=dt,
        times=rec_steps * dt,
        mean_rho=mean_rho,
        pop_sq=acc_pop2 / n_traj,
        singlet_count=int(singlet_mask.sum()),
        triplet_count=int(triplet_mask.sum()),
        events=events,
        event_steps=steps,
        pre_event_ps=pre,
        project_s_count=int(proj[0]),
        project_t_count=int(proj[1]),
    )


def kominis_yield_series(kS: float, dt: float, n_terms: int, require_converged: bool = True) -> float:
    """Partial sum of Kominis's single-molecule singlet-yield series.

    Each term is (p_r + p_nr q_S) (p_nr q_0)^n for a coherent initial
    state: p_r = kS dt / 2, p_nr = 1 - p_r, q_S = kS dt / 4,
    q_0 = 1 - kS dt / 2. Converges to 3/4 as dt -> 0.
    """
    x = kS * dt
    if not 0 < x <= 0.1:
        raise ValueError(f"need 0 < kS*dt <= 0.1, got {x}")
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if require_converged and n_terms * math.log1p(-x) >= math.log(1e-12):
        raise ValueError("n_terms too small: (1 - kS*dt)^n_terms must be < 1e-12")
    p_r = 0.5 * x
    p_nr = 1.0 - p_r
    q_s = 0.25 * x
    q_0 = 1.0 - 0.5 * x
    first = p_r + p_nr * q_s
    ratio = p_nr * q_0
    # first * (1 - ratio^n) / (1 - ratio), written to avoid cancellation
    log_ratio = math.log(ratio)
    return first * -math.expm1(n_terms * log_ratio) / -math.expm1(log_ratio)
