import numpy as np
import pytest
from hypothesis import given

from conftest import energies, rates
from rpjump.linalg import commutator, expm
from rpjump.spin import (
    S,
    S0,
    T,
    T0,
    Basis,
    HamiltonianParams,
    Model,
    RatePair,
    build_hamiltonian,
    effective_hamiltonian,
    initial_state,
    jones_hore_lindblads,
    singlet_projector,
    traditional_lindblads,
    triplet_projector,
)


@pytest.mark.parametrize("basis", list(Basis))
def test_projector_algebra_is_exact(basis):
    QS, QT = singlet_projector(basis), triplet_projector(basis)
    d = basis.dim
    assert QS.shape == (d, d)
    assert np.array_equal(QS @ QS, QS)
    assert np.array_equal(QT @ QT, QT)
    assert not (QS @ QT).any()
    pair = np.zeros((d, d))
    pair[S, S] = pair[T, T] = 1
    assert np.array_equal(QS + QT, pair)


def test_projector_entries():
    assert np.array_equal(singlet_projector("two_level"), np.diag([1, 0]))
    assert np.array_equal(triplet_projector("two_level"), np.diag([0, 1]))
    assert np.array_equal(singlet_projector("four_level"), np.diag([1, 0, 0, 0]))
    assert np.array_equal(triplet_projector("four_level"), np.diag([0, 1, 0, 0]))


def test_hamiltonian_examples():
    QS = singlet_projector()
    assert not build_hamiltonian(HamiltonianParams()).any()
    H = build_hamiltonian(HamiltonianParams(J=1))
    assert np.array_equal(H, np.diag([1, 0]))
    assert not commutator(H, QS).any()
    H = build_hamiltonian(HamiltonianParams(delta=0.5))
    assert np.array_equal(H, [[0, 0.5], [0.5, 0]])
    assert np.abs(commutator(H, QS)).max() > 0


@given(energies, energies)
def test_hamiltonian_hermitian_and_commutation(J, delta):
    for basis in Basis:
        H = build_hamiltonian(HamiltonianParams(J, delta), basis)
        assert np.array_equal(H, H.conj().T)
        if delta == 0:
            assert not commutator(H, singlet_projector(basis)).any()
            assert not commutator(H, triplet_projector(basis)).any()
        # product states carry no energy or coupling
        assert not H[2:, :].any() and not H[:, 2:].any()


def _closed_form_heff(H, kS, kT):
    return H - 0.5j * kS * singlet_projector("four_level") - 0.5j * kT * triplet_projector("four_level")


@pytest.mark.parametrize("kS,kT", [(1.0, 0.0), (4.0, 0.25), (0.0, 9.0), (2.25, 1.0)])
def test_traditional_heff_exact_for_square_rates(kS, kT):
    H = build_hamiltonian(HamiltonianParams(0.7, 0.3), "four_level")
    assert np.array_equal(effective_hamiltonian(H, traditional_lindblads(RatePair(kS, kT))), _closed_form_heff(H, kS, kT))


@given(energies, energies, rates, rates)
def test_traditional_heff_matches_closed_form_to_rounding(J, delta, kS, kT):
    # sqrt(k)**2 may differ from k by one ulp
    H = build_hamiltonian(HamiltonianParams(J, delta), "four_level")
    Heff = effective_hamiltonian(H, traditional_lindblads(RatePair(kS, kT)))
    np.testing.assert_allclose(Heff, _closed_form_heff(H, kS, kT), rtol=0, atol=4e-16 * max(kS, kT, 1e-300))
    assert np.array_equal(Heff.real, H.real)


@given(energies, energies, rates, rates)
def test_measurement_heff_is_uniform_on_pair_subspace(J, delta, kS, kT):
    H = build_hamiltonian(HamiltonianParams(J, delta), "four_level")
    Heff = effective_hamiltonian(H, jones_hore_lindblads(RatePair(kS, kT)))
    pair = np.diag([1, 1, 0, 0])
    np.testing.assert_allclose(Heff, H - 0.5j * (kS + kT) * pair, atol=1e-15)


def test_heff_without_lindblads_is_h():
    H = build_hamiltonian(HamiltonianParams(0.3, 0.7))
    assert np.array_equal(effective_hamiltonian(H, []), H)


def test_lindblad_operators():
    kS, kT = 2.0, 0.5
    J1, J2 = traditional_lindblads(RatePair(kS, kT))
    assert J1[S0, S] == np.sqrt(kS) and np.count_nonzero(J1) == 1
    assert J2[T0, T] == np.sqrt(kT) and np.count_nonzero(J2) == 1
    ops = jones_hore_lindblads(RatePair(kS, kT))
    assert len(ops) == 4
    assert ops[2][T, T] == np.sqrt(kS) and ops[3][S, S] == np.sqrt(kT)


@pytest.mark.parametrize("bad", [(-1, 0), (0, -0.1), (np.nan, 0), (0, np.inf)])
def test_rate_pair_rejects_bad_values(bad):
    with pytest.raises(ValueError):
        RatePair(*bad)


def test_hamiltonian_params_reject_non_finite():
    with pytest.raises(ValueError):
        HamiltonianParams(J=np.inf)


def test_initial_states():
    assert np.array_equal(initial_state("S"), [1, 0])
    assert np.array_equal(initial_state("T", "four_level"), [0, 1, 0, 0])
    np.testing.assert_allclose(initial_state("coherent"), [2**-0.5, 2**-0.5])
    psi = initial_state((0.6, 0.8j))
    np.testing.assert_allclose(psi, [0.6, 0.8j])
    with pytest.raises(ValueError):
        initial_state((1, 1))
    with pytest.raises(ValueError):
        initial_state("X")


def test_model_stiffness_uses_spectral_norm():
    m = Model.from_values(J=0, delta=0.3, kS=1, kT=0.5)
    assert m.stiffness() == pytest.approx(0.3 + 1.5, abs=1e-15)
    assert m.with_basis("four_level").H.shape == (4, 4)


def test_expm_against_scipy(rng):
    import scipy.linalg

    for scale in (1e-3, 1.0, 30.0):
        a = scale * (rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16)))
        ref = scipy.linalg.expm(a)
        np.testing.assert_allclose(expm(a), ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())
