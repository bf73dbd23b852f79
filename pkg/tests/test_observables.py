import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from conftest import random_density, random_pure
from rpjump.master import coherence_measure, integrate, pure_density
from rpjump.observables import (
    YieldMethod,
    factorization_discrepancy,
    populations,
    time_averaged_coherence,
    yields_from_ensemble,
    yields_from_trace,
)
from rpjump.spin import Model, initial_state
from rpjump.trajectories import run_ensemble

COHERENT = pure_density(initial_state("coherent"))


def test_singlet_yield_of_pure_decay():
    tr = integrate("haberkorn", Model.from_values(kS=1.0), pure_density([1, 0]), 20.0, 1e-3)
    rep = yields_from_trace(tr)
    assert rep.method is YieldMethod.ODE_FLUX_INTEGRATION
    assert rep.singlet_yield == pytest.approx(-math.expm1(-20.0), abs=1e-6)
    assert rep.triplet_yield == 0.0
    assert rep.total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("theory", ["haberkorn", "jones_hore"])
def test_dark_triplet_keeps_half(theory):
    tr = integrate(theory, Model.from_values(kS=1.0), COHERENT, 20.0, 1e-3)
    rep = yields_from_trace(tr)
    assert rep.singlet_yield == pytest.approx(0.5, abs=1e-4)
    assert rep.survival == pytest.approx(0.5, abs=1e-4)
    assert tr.states[-1, 1, 1].real == pytest.approx(0.5, abs=1e-4)
    assert rep.total == pytest.approx(1.0, abs=1e-6)


def _trace_loss(theory, m):
    r = yields_from_trace(integrate(theory, m, COHERENT, 10.0, 1e-3))
    return r.singlet_yield + r.triplet_yield


def test_haberkorn_and_jones_hore_lose_the_same_trace():
    m = Model.from_values(J=0.3, kS=1.0, kT=0.5)
    assert abs(_trace_loss("haberkorn", m) - _trace_loss("jones_hore", m)) <= 1e-6


def test_mixing_makes_trace_loss_depend_on_dephasing():
    # the instantaneous loss rates agree, but with [H, Q_S] != 0 dephasing feeds back into populations
    m = Model.from_values(J=0.3, delta=0.4, kS=1.0, kT=0.5)
    assert abs(_trace_loss("haberkorn", m) - _trace_loss("jones_hore", m)) > 1e-4


def _revised_oracle(t_end):
    """Adaptive high-order solve of the revised equation, written out from scratch."""

    def f(_, y):
        r = y.reshape(2, 2)
        pS, pT = r[0, 0].real, r[1, 1].real
        c = 0.0 if min(pS, pT) <= 1e-14 else min(abs(r[0, 1]) ** 2 / (pS * pT), 1.0)
        d = np.zeros((2, 2), dtype=complex)
        d[0, 1], d[1, 0] = -0.5 * r[0, 1], -0.5 * r[1, 0]
        d[0, 0] -= (1 - c) * r[0, 0]
        d -= c * pS * r / (pS + pT)
        return d.ravel()

    sol = solve_ivp(f, (0, t_end), COHERENT.ravel(), method="DOP853", rtol=1e-11, atol=1e-13)
    return sol.y[:, -1].reshape(2, 2)


def test_revised_equation_against_independent_solver():
    tr = integrate("kominis_revised", Model.from_values(kS=1.0), COHERENT, 20.0, 1e-2)
    np.testing.assert_allclose(tr.states[-1], _revised_oracle(20.0), atol=1e-8)


def test_yields_from_ensemble_are_exact_fractions():
    res = run_ensemble("traditional", Model.from_values(delta=0.3, kS=1.0, kT=0.5), initial_state("S"), 333, 2.0, 1e-3, seed=2)
    rep = yields_from_ensemble(res)
    assert rep.method is YieldMethod.TRAJECTORY_COUNTING
    assert rep.total == 1.0
    assert rep.singlet_yield == res.singlet_count / 333


@pytest.mark.parametrize("scheme,theory", [("traditional", "haberkorn"), ("jones_hore", "jones_hore")])
def test_counted_yields_match_flux_yields(scheme, theory):
    n = 20000
    m = Model.from_values(J=0.2, delta=0.3, kS=1.0, kT=0.5)
    counted = yields_from_ensemble(run_ensemble(scheme, m, initial_state("S"), n, 6.0, 1e-3, seed=12, record_every=100))
    flux = yields_from_trace(integrate(theory, m, pure_density([1, 0]), 6.0, 1e-3))
    for a, b in ((counted.singlet_yield, flux.singlet_yield), (counted.triplet_yield, flux.triplet_yield)):
        assert abs(a - b) <= 3 * math.sqrt(b * (1 - b) / n)


def test_empty_and_single_point_traces():
    tr = integrate("haberkorn", Model.from_values(kS=1.0), pure_density([1, 0]), 1e-3, 1e-3)
    assert len(tr) == 2
    assert yields_from_trace(tr).singlet_yield == pytest.approx(1e-3, rel=1e-3)


def test_populations():
    assert populations(np.diag([1.0, 0.0])) == (1.0, 0.0, 0.0)
    np.testing.assert_allclose(populations(COHERENT), (0.5, 0.5, 0.5), atol=1e-15)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_populations_sum_to_trace(seed):
    rho = 0.7 * random_density(np.random.default_rng(seed))
    pS, pT, _ = populations(rho)
    assert pS + pT == pytest.approx(np.trace(rho).real, abs=1e-15)


def test_populations_four_level():
    rho = np.diag([0.2, 0.3, 0.4, 0.1]).astype(complex)
    assert populations(rho)[:2] == pytest.approx((0.2, 0.3))


# time-averaged coherence


def test_fast_rotation_averages_out():
    J, tau = 10.0, 10.0
    H = np.diag([J, 0.0])
    val = time_averaged_coherence(COHERENT, H, tau_max=tau)
    assert abs(val) <= 2 / (J * tau)
    assert abs(val) <= 0.05


def test_no_rotation_gives_instantaneous_measure(rng):
    QS, QT = np.diag([1.0, 0]), np.diag([0, 1.0])
    for _ in range(5):
        rho = random_density(rng)
        assert time_averaged_coherence(rho, np.zeros((2, 2)), tau_max=3.0) == pytest.approx(coherence_measure(rho, QS, QT), abs=1e-14)


@pytest.mark.parametrize("J,tau,n", [(1.0, 2.0, 256), (3.0, 5.0, 512), (0.7, 4.0, 64)])
def test_diagonal_hamiltonian_analytic_average(rng, J, tau, n):
    # rho_ST e^{-iJ tau} rho_TS picks up a pure phase; its mean is sin(J tau)/(J tau) for the real part
    rho = pure_density(random_pure(rng))
    H = np.diag([J, 0.0])
    c0 = coherence_measure(rho, np.diag([1.0, 0]), np.diag([0, 1.0]))
    exact = c0 * math.sin(J * tau) / (J * tau)
    assert time_averaged_coherence(rho, H, tau_max=tau, n_samples=n) == pytest.approx(exact, abs=(J * tau) ** 2 / n**2 + 1e-12)


def test_default_window_needs_splitting():
    # default window 10/J: the average is sin(10)/10
    val = time_averaged_coherence(COHERENT, np.diag([10.0, 0.0]))
    assert val == pytest.approx(math.sin(10.0) / 10.0, abs=1e-3)
    assert abs(val) <= 2 / 10
    with pytest.raises(ValueError):
        time_averaged_coherence(COHERENT, np.array([[0, 0.3], [0.3, 0]]))


def test_averaging_input_checks():
    H = np.diag([1.0, 0.0])
    with pytest.raises(ValueError):
        time_averaged_coherence(COHERENT, H, tau_max=0.0)
    with pytest.raises(ValueError):
        time_averaged_coherence(COHERENT, H, tau_max=1.0, n_samples=4)
    assert time_averaged_coherence(np.diag([1.0, 0.0]), H, tau_max=1.0) == 0.0


def test_factorization_holds_only_when_projectors_commute():
    taus = np.linspace(0, 10, 101)
    assert factorization_discrepancy(COHERENT, np.diag([10.0, 0.0]), taus) <= 1e-13
    mixing = np.array([[0.0, 0.3], [0.3, 0.0]])
    assert factorization_discrepancy(COHERENT, mixing, taus) > 1e-3


def test_factorization_discrepancy_against_scipy_expm():
    from scipy.linalg import expm

    H = np.array([[0.5, 0.3], [0.3, 0.0]])
    QS, QT = np.diag([1.0, 0]), np.diag([0, 1.0])
    taus = np.array([0.0, 0.4, 1.7, 3.2])
    ref = 0.0
    for tau in taus:
        U = expm(-1j * H * tau)
        ref = max(ref, np.abs(U @ QT @ COHERENT @ QS @ U.conj().T - QT @ U @ COHERENT @ U.conj().T @ QS).max())
    assert factorization_discrepancy(COHERENT, H, taus) == pytest.approx(ref, abs=1e-14)
