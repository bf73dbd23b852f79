"""Quick invariant checks, run by ``rpjump selftest``.

These are reduced-size versions of the test suite's property checks,
meant to confirm an installation in a few seconds.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .master import (
    coherence_measure,
    integrate,
    pure_density,
    rhs_haberkorn,
    rhs_jones_hore,
    rhs_kominis_nonreacting,
    rhs_kominis_revised,
)
from .spin import Model, initial_state, singlet_projector, triplet_projector
from .superop import dyson_expand, four_level_lindblads, integrate_four_level, jump_superoperator, lindblad_superoperator
from .trajectories import kominis_yield_series, no_jump_propagate, run_ensemble, scheme_heff


def random_density(rng, d=2, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, d=2):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def _projectors():
    QS, QT = singlet_projector(), triplet_projector()
    ok = np.array_equal(QS @ QS, QS) and np.array_equal(QT @ QT, QT)
    ok &= not (QS @ QT).any() and np.array_equal(QS + QT, np.eye(2))
    return ok, "projector algebra exact"


def _limit_a(rng):
    m = Model.from_values(J=0.7, delta=0.3, kS=1.3, kT=0.4)
    worst = 0.0
    for _ in range(20):
        rho = random_density(rng)
        rho = m.QS @ rho @ m.QS + m.QT @ rho @ m.QT
        diff = rhs_kominis_revised(rho, m.H, m.rates, m.QS, m.QT) - rhs_haberkorn(rho, m.H, m.rates, m.QS, m.QT)
        worst = max(worst, np.abs(diff).max())
    return worst <= 1e-12, f"incoherent limit max diff {worst:.2e}"


def _limit_b(rng):
    m = Model.from_values(J=0.7, delta=0.3, kS=0.8, kT=0.8)
    worst = 0.0
    for _ in range(20):
        rho = pure_density(random_pure(rng))
        diff = rhs_kominis_revised(rho, m.H, m.rates, m.QS, m.QT) - rhs_jones_hore(rho, m.H, m.rates, m.QS, m.QT)
        worst = max(worst, np.abs(diff).max())
    return worst <= 1e-12, f"coherent equal-rate limit max diff {worst:.2e}"


def _traceless_dephasing(rng):
    m = Model.from_values(J=0.2, delta=0.5, kS=1.0, kT=0.5)
    worst = max(abs(np.trace(rhs_kominis_nonreacting(random_density(rng), m.H, m.rates, m.QS))) for _ in range(20))
    return worst <= 1e-12, f"non-reacting trace drift {worst:.2e}"


def _decay():
    m = Model.from_values(kS=1.0)
    tr = integrate("haberkorn", m, pure_density(initial_state("S")), 5.0, 1e-3)
    err = np.abs(np.trace(tr.states, axis1=1, axis2=2).real - np.exp(-tr.times)).max()
    return err <= 1e-8, f"singlet decay error {err:.2e}"


def _series():
    y = kominis_yield_series(1.0, 1e-4, 10**6)
    return abs(y - 0.75) <= 1e-3, f"Kominis series yield {y:.6f}"


def _dyson():
    m = Model.from_values(delta=0.3, kS=1.0, kT=0.5, basis="four_level")
    ls = four_level_lindblads(m.rates, "jones_hore")
    L, J = lindblad_superoperator(m.H, ls), jump_superoperator(ls)
    err = np.abs(dyson_expand(L, J, 0.5, 6, 64) - scipy.linalg.expm(0.5 * L)).max()
    return err <= 1e-6, f"jump expansion error {err:.2e}"


def _four_level():
    m = Model.from_values(delta=0.3, kS=1.0, kT=0.5)
    psi = initial_state("coherent")
    jh = integrate("jones_hore", m, pure_density(psi), 2.0, 1e-3)
    rho4 = np.zeros((4, 4), dtype=complex)
    rho4[:2, :2] = pure_density(psi)
    four = integrate_four_level(m, rho4, 2.0, 1e-3)
    err = np.abs(four.states[:, :2, :2] - jh.states).max()
    drift = np.abs(np.trace(four.states, axis1=1, axis2=2) - 1).max()
    return err <= 1e-8 and drift <= 1e-10, f"four-level projection error {err:.2e}, trace drift {drift:.2e}"


def _norm_loss(rng):
    m = Model.from_values(J=0.5, delta=0.3, kS=1.0, kT=0.5)
    Heff = scheme_heff("traditional", m)
    G = m.kS * m.QS + m.kT * m.QT
    orders = []
    for _ in range(10):
        psi = random_pure(rng)
        errs = []
        for dt in (1e-3, 5e-4):
            _, dp = no_jump_propagate(psi, Heff, dt)
            errs.append(abs(dp - dt * np.vdot(psi, G @ psi).real))
        orders.append(np.log2(errs[0] / errs[1]))
    return min(orders) >= 1.9, f"norm-loss error order {min(orders):.3f}"


def _determinism():
    m = Model.from_values(delta=0.3, kS=1.0, kT=0.5)
    a = run_ensemble("jones_hore", m, initial_state("S"), 300, 1.0, 1e-3, seed=11, record_every=10)
    b = run_ensemble("jones_hore", m, initial_state("S"), 300, 1.0, 1e-3, seed=11, record_every=10, workers=3)
    same = np.array_equal(a.mean_rho, b.mean_rho) and np.array_equal(a.events, b.events)
    return same, "ensemble bit-identical across worker counts"


def _coherence():
    c = coherence_measure(pure_density(initial_state("coherent")), singlet_projector(), triplet_projector())
    return abs(c - 1.0) <= 1e-15, f"coherent-state measure {c!r}"


def checks(seed: int = 2011):
    rng = np.random.default_rng(seed)
    return [
        ("projectors", _projectors),
        ("coherence", _coherence),
        ("limit-incoherent", lambda: _limit_a(rng)),
        ("limit-coherent", lambda: _limit_b(rng)),
        ("traceless-dephasing", lambda: _traceless_dephasing(rng)),
        ("singlet-decay", _decay),
        ("kominis-series", _series),
        ("jump-expansion", _dyson),
        ("four-level-projection", _four_level),
        ("norm-loss-order", lambda: _norm_loss(rng)),
        ("determinism", _determinism),
    ]


def run(out=print) -> bool:
    all_ok = True
    for name, check in checks():
        ok, detail = check()
        all_ok &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name:24s} {detail}")
    return all_ok

