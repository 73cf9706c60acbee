import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditforge.errors import DimensionMismatch, TruncationWarning
from quditforge.gateset_ecd import (
    ECDGateCost,
    ECDParams,
    ECDStateCost,
    build_circuit_ecd,
    ecd,
    ecd_gate_infidelity,
    ecd_state_infidelity,
    gate_time_estimate_ecd,
    ground_state_input,
    joint_target,
    qubit_purity,
    qubit_rotation,
)
from quditforge.gateset_snapd import TimingConfig
from quditforge.lgt_targets import fock_state, gate_target, hadamard_state
from quditforge.operator_core import SIGMA_X, SIGMA_Y, FockSpace, is_unitary, matrix_exponential
from quditforge.optimizer import OptimizationConfig, central_difference, multi_start, sampler_for

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def random_params(d, B, seed, scale=0.6):
    rng = np.random.default_rng(seed)
    a = rng.normal(0, scale, B) + 1j * rng.normal(0, scale, B)
    return ECDParams(d, B, a, rng.uniform(-np.pi, np.pi, B + 1), rng.uniform(-np.pi, np.pi, B + 1))


def test_parameter_counts_and_round_trip():
    assert ECDParams.n_params(4, complex_alpha=False) == 14
    assert ECDParams.n_params(4) == 18
    p = random_params(3, 4, 0)
    for cplx in (True,):
        q = ECDParams.unflatten(p.flatten(cplx), 3, 4, cplx)
        np.testing.assert_array_equal(q.alphas, p.alphas)
    real = ECDParams(3, 2, [0.5, -0.1], [0, 1, 2], [3, 4, 5])
    x = real.flatten(complex_alpha=False)
    assert x.size == 8
    np.testing.assert_array_equal(ECDParams.unflatten(x, 3, 2, False).flatten(False), x)
    with pytest.raises(ValueError):
        p.flatten(complex_alpha=False)
    r = ECDParams.from_dict(p.to_dict())
    np.testing.assert_array_equal(r.flatten(), p.flatten())


# -- rotations -------------------------------------------------------------------


@settings(max_examples=40)
@given(angles, angles)
def test_rotation_matches_exponential(theta, phi):
    gen = np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y
    np.testing.assert_allclose(qubit_rotation(theta, phi), matrix_exponential(gen, -0.5j * theta), atol=1e-13)
    np.testing.assert_allclose(qubit_rotation(theta, phi) @ qubit_rotation(-theta, phi), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(qubit_rotation(0.0, phi), np.eye(2))


def test_pi_rotation():
    np.testing.assert_allclose(qubit_rotation(np.pi, 0), -1j * SIGMA_X, atol=1e-15)


# -- ECD gate --------------------------------------------------------------------


def test_ecd_zero_is_sigma_x():
    sp = FockSpace(3)
    np.testing.assert_allclose(ecd(0, sp), np.kron(SIGMA_X, np.eye(sp.N)))


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_ecd_squares_to_identity_and_is_off_diagonal(re, im):
    sp = FockSpace(4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        E = ecd(complex(re, im), sp)
    N = sp.N
    assert is_unitary(E)
    np.testing.assert_allclose(E @ E, np.eye(2 * N), atol=1e-12)
    assert np.all(E[:N, :N] == 0) and np.all(E[N:, N:] == 0)


def test_ecd_amplitude_limit():
    with pytest.raises(ValueError):
        ecd(17.0, FockSpace(3))


def test_circuit_examples():
    sp = FockSpace(3)
    N = sp.N
    p = ECDParams(3, 1, [0], [0, 0], [0, 0])
    np.testing.assert_allclose(build_circuit_ecd(p, sp), np.kron(SIGMA_X, np.eye(N)))
    # alpha = 0 reduces to a qubit rotation sequence.
    q = ECDParams(3, 2, [0, 0], [0.3, 1.1, -0.4], [0.2, 2.0, -1.0])
    R = qubit_rotation(0.3, 0.2) @ SIGMA_X @ qubit_rotation(1.1, 2.0) @ SIGMA_X @ qubit_rotation(-0.4, -1.0)
    np.testing.assert_allclose(build_circuit_ecd(q, sp), np.kron(R, np.eye(N)), atol=1e-14)
    assert is_unitary(build_circuit_ecd(random_params(3, 4, 1), sp))
    with pytest.raises(DimensionMismatch):
        build_circuit_ecd(q, FockSpace(4))


def test_identity_target_with_echo_cancelling_rotations():
    # R(0) sigma_x R(pi): sigma_x (-i sigma_x) = -i 1, identity up to phase.
    sp = FockSpace(4)
    p = ECDParams(4, 1, [0], [0, np.pi], [0, 0])
    assert ecd_gate_infidelity(p, np.eye(4), sp) == pytest.approx(0, abs=1e-15)


def test_timing():
    p36 = random_params(6, 36, 0)
    assert gate_time_estimate_ecd(p36, TimingConfig(t_ecd=0.1)) == pytest.approx(36 * 0.11 + 0.01)
    assert 3.6 < gate_time_estimate_ecd(p36, TimingConfig(t_ecd=0.1)) < 4.0
    assert gate_time_estimate_ecd(p36, TimingConfig(t_ecd=0.5)) == pytest.approx(18.37)


def test_joint_helpers():
    sp = FockSpace(3, 1)
    U = gate_target("X(0,2)", 3)
    np.testing.assert_allclose(joint_target(U, sp), np.kron(np.eye(2), U))
    psi = ground_state_input(sp, fock_state(2, sp))
    assert psi[2, 0] == 1 and psi.shape == (8, 1)
    with pytest.raises(DimensionMismatch):
        joint_target(np.eye(2), sp)


def test_state_infidelity_example():
    sp = FockSpace(3)
    p = ECDParams(3, 1, [0], [0, np.pi], [0, 0])
    assert ecd_state_infidelity(p, fock_state(0, sp), sp) == pytest.approx(0, abs=1e-15)
    assert ecd_state_infidelity(p, fock_state(1, sp), sp) == pytest.approx(1)


# -- cost objects ------------------------------------------------------------------


@pytest.mark.parametrize("cplx", [True, False])
@pytest.mark.parametrize("kind", ["gate", "state"])
def test_cost_matches_reference_and_fd(cplx, kind):
    d, B = 3, 3
    sp = FockSpace(d, 3)
    if kind == "gate":
        U = gate_target("X(0,1)", d)
        cost = ECDGateCost(U, sp, B, complex_alpha=cplx)
        ref = lambda q: ecd_gate_infidelity(q, U, sp)  # noqa: E731
    else:
        psi = hadamard_state(d, sp)
        cost = ECDStateCost(psi, sp, B, complex_alpha=cplx)
        ref = lambda q: ecd_state_infidelity(q, psi, sp)  # noqa: E731
    p = random_params(d, B, 5)
    if not cplx:
        p = ECDParams(d, B, p.alphas.real, p.thetas, p.phis)
    x = p.flatten(cplx)
    f, g = cost.value_and_grad(x)
    assert f == pytest.approx(ref(cost.params(x)), abs=1e-12)
    np.testing.assert_allclose(g, central_difference(cost, x, 1e-6), atol=1e-8)


def test_leakage_matches_projection():
    from quditforge.operator_core import project_computational

    sp = FockSpace(3, 2)
    cost = ECDGateCost(np.eye(3), sp, 2)
    x = random_params(3, 2, 8).flatten()
    _, leak = project_computational(cost.circuit(x), sp, joint=True)
    assert cost.leakage(x) == pytest.approx(leak, abs=1e-13)


def test_optimized_gate_disentangles_qubit():
    sp = FockSpace(3, 0)
    cost = ECDGateCost(gate_target("X(1,2)", 3), sp, 8)
    res = multi_start(cost, sampler_for("ecd", 3, 8), 10, OptimizationConfig(), stop_below=1e-7)
    assert res.fun < 1e-6
    assert qubit_purity(cost.circuit(res.x), sp) > 1 - 1e-4


def test_purity_detects_entangler():
    sp = FockSpace(2, 0)
    # CNOT-like map entangles a superposed cavity with the qubit.
    V = np.zeros((4, 4))
    V[0, 0] = V[3, 1] = V[2, 2] = V[1, 3] = 1
    assert qubit_purity(V, sp) < 0.9


def test_nested_ansatz():
    sp = FockSpace(3)
    U = gate_target("X(0,1)", 3)
    small = random_params(3, 2, 2)
    # An extra block with alpha = 0 and a pi rotation pair is sigma_x R(pi, 0) = -i 1.
    big = ECDParams(3, 3, np.append(small.alphas, 0), np.append(small.thetas, np.pi), np.append(small.phis, 0))
    assert ecd_gate_infidelity(big, U, sp) == pytest.approx(ecd_gate_infidelity(small, U, sp), abs=1e-13)
