import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupling_estimation.errors import DomainError, NormalizationError, TruncationError
from coupling_estimation.fock import TwoModeState, modes_to_basis_label, random_state
from coupling_estimation.schwinger import (
    apply_generator,
    blockwise_exponential,
    coupling_evolution,
    coupling_operator,
    frame_identity_residual,
    generator_block,
    rotate_to_z,
    rotation_operator,
    single_photon_transmission,
    transmittivity,
)
from oracles import block_exp, block_of, schwinger_dense


def fock(a, b, box=None):
    lab = modes_to_basis_label(a, b)
    n_max, d_max = box or (lab.n, abs(lab.d))
    return TwoModeState({lab: 1.0}, n_max, d_max)


def dense(state, total):
    return state.block_closure().to_blocks().get(total, np.zeros(total + 1))


@pytest.mark.parametrize("total", range(0, 9))
def test_generator_blocks_match_ladder_oracle(total):
    jx, jy, jz = schwinger_dense(total)
    for kind, op in zip(("Jx", "Jy", "Jz"), (jx, jy, jz)):
        ref = block_of(op, total, total)
        got = generator_block(kind, total)
        assert np.max(np.abs(got - ref)) <= 1e-14
        assert np.max(np.abs(got - got.conj().T)) <= 1e-12


def test_jz_examples():
    out = apply_generator("Jz", TwoModeState({(3, 2): 1.0}, 3, 2))
    assert out.amplitude(3, 2) == pytest.approx(1.0)
    assert apply_generator("Jz", TwoModeState({(2, 0): 1.0}, 2, 0)).norm() == 0


def test_jx_single_photon():
    out = apply_generator("Jx", fock(1, 0, (0, 1)))
    lab = modes_to_basis_label(0, 1)
    assert out.amplitude(*lab) == pytest.approx(0.5)
    assert out.norm() == pytest.approx(0.5)


def test_generator_truncation_error():
    # |1,1>> has N=3 and mixes into d=3, outside d_max=1
    with pytest.raises(TruncationError):
        apply_generator("Jx", TwoModeState({(1, 1): 1.0}, 1, 1))


def test_unknown_generator():
    with pytest.raises(ValueError):
        generator_block("Jw", 2)


def test_blockwise_exponential_examples():
    np.testing.assert_allclose(blockwise_exponential(np.zeros((3, 3)), 0.7), np.eye(3))
    lam = np.array([0.5, -1.0, 2.0])
    np.testing.assert_allclose(
        blockwise_exponential(np.diag(lam), 0.3), np.diag(np.exp(-1j * lam * 0.3)), atol=1e-15
    )
    u = blockwise_exponential(generator_block("Jx", 1), math.pi / 2)
    ref = block_exp(np.array([[0, 0.5], [0.5, 0]]), math.pi / 2)
    np.testing.assert_allclose(u, ref, atol=1e-15)
    np.testing.assert_allclose(np.abs(u), np.full((2, 2), 1 / math.sqrt(2)), atol=1e-15)


def test_blockwise_exponential_rejects_non_hermitian():
    with pytest.raises(DomainError):
        blockwise_exponential(np.array([[0, 1], [0, 0]]), 1.0)


@pytest.mark.parametrize("total", range(0, 9))
@pytest.mark.parametrize("angle", [0.3, -1.1, math.pi])
def test_unitaries_match_expm(total, angle):
    jx, jy, _ = schwinger_dense(total)
    ref = block_exp(block_of(jx, total, total), angle)
    op = coupling_operator(angle)
    assert np.max(np.abs(op.block(total) - ref)) <= 1e-12
    assert op.unitarity_residual(total) <= 1e-10
    rot = rotation_operator().block(total)
    ref_rot = block_exp(block_of(jy, total, total), -math.pi / 2)
    assert np.max(np.abs(rot - ref_rot)) <= 1e-12


def test_evolution_identity_at_zero(rng):
    s = random_state(rng, 2, 2)
    out = coupling_evolution(s, 0.0)
    for lab, v in s.amplitudes.items():
        assert abs(out.amplitudes[lab] - v) <= 1e-14


def test_evolution_swap_at_pi():
    out = coupling_evolution(fock(1, 0), math.pi)
    lab = modes_to_basis_label(0, 1)
    assert out.amplitude(*lab) == pytest.approx(-1j, abs=1e-14)
    assert abs(out.amplitude(*modes_to_basis_label(1, 0))) <= 1e-14


@pytest.mark.parametrize("psi", [0.0, 0.4, 1.3, math.pi / 2, 2.9])
def test_transmission_conventions(psi):
    out = coupling_evolution(fock(1, 0), psi)
    stay = abs(out.amplitude(*modes_to_basis_label(1, 0))) ** 2
    assert stay == pytest.approx(single_photon_transmission(psi), abs=1e-14)
    assert stay == pytest.approx(math.cos(psi / 2) ** 2, abs=1e-14)
    assert transmittivity(psi) == pytest.approx(math.cos(psi) ** 2)


def test_rotation_vacuum_and_inverse(rng):
    vac = TwoModeState({(0, 0): 1.0}, 0, 0)
    assert rotate_to_z(vac).amplitude(0, 0) == pytest.approx(1.0)
    s = random_state(rng, 2, 3)
    back = rotate_to_z(rotate_to_z(s), inverse=True)
    for lab in set(s.amplitudes) | set(back.amplitudes):
        assert abs(s.amplitudes.get(lab, 0) - back.amplitudes.get(lab, 0)) <= 1e-10


@pytest.mark.parametrize("total", range(0, 9))
def test_frame_identities(total):
    fx, fz = frame_identity_residual(total)
    assert fx <= 1e-10 and fz <= 1e-10


def test_evolution_requires_normalized():
    with pytest.raises(NormalizationError):
        coupling_evolution(TwoModeState({(0, 1): 2.0}, 0, 1), 0.2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_group_law_and_number_conservation(seed, p1, p2):
    s = random_state(np.random.default_rng(seed), 2, 2)
    two = coupling_evolution(coupling_evolution(s, p2), p1)
    one = coupling_evolution(s, p1 + p2)
    for lab in set(one.amplitudes) | set(two.amplitudes):
        assert abs(one.amplitudes.get(lab, 0) - two.amplitudes.get(lab, 0)) <= 1e-9
    a, b = s.block_closure().to_blocks(), one.to_blocks()
    for total, vec in a.items():
        assert abs(np.linalg.norm(vec) - np.linalg.norm(b.get(total, 0))) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["Jx", "Jy", "Jz"]))
def test_generator_hermiticity(seed, kind):
    g = np.random.default_rng(seed)
    u = random_state(g, 2, 2).block_closure()
    v = random_state(g, 2, 2).block_closure()
    lhs = u.inner(apply_generator(kind, v))
    rhs = np.conj(v.inner(apply_generator(kind, u)))
    assert abs(lhs - rhs) <= 1e-12
