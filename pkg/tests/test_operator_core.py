import warnings

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from quditforge.errors import DimensionMismatch, NotNormalized, TruncationWarning
from quditforge.operator_core import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    FockSpace,
    JointSpace,
    annihilation,
    creation,
    diff_norm_infidelity,
    displacement,
    embed_computational,
    is_unitary,
    matrix_exponential,
    number,
    one_minus_norm_infidelity,
    project_computational,
    state_prep_infidelity,
    trace_infidelity,
)

finite = st.floats(-1.0, 1.0, allow_nan=False)


def random_unitary(n, seed):
    return scipy.stats.unitary_group.rvs(n, random_state=seed)


# -- spaces ----------------------------------------------------------------------


def test_fock_space_defaults_and_validation():
    assert FockSpace(4).N == 8
    assert FockSpace(6).N == 12
    assert FockSpace(4, 0).N == 4
    with pytest.raises(ValueError):
        FockSpace(1)
    with pytest.raises(ValueError):
        FockSpace(4, -1)


@given(st.integers(2, 6), st.integers(0, 4), st.data())
def test_joint_index_round_trip(d, g, data):
    js = JointSpace(FockSpace(d, g))
    k = data.draw(st.integers(0, js.dim - 1))
    q, n = js.split(k)
    assert js.join(q, n) == k
    A = np.diag([1.0, 2.0])
    B = np.diag(np.arange(js.fock.N, dtype=float) + 10)
    assert js.embed(A, B)[k, k] == (q + 1) * (n + 10)


# -- ladder operators --------------------------------------------------------------


def test_annihilation_small_cases():
    np.testing.assert_array_equal(annihilation(2), [[0, 1], [0, 0]])
    assert annihilation(3)[1, 2] == pytest.approx(np.sqrt(2))
    np.testing.assert_array_equal(creation(5), annihilation(5).conj().T)


@pytest.mark.parametrize("N", [2, 5, 9])
def test_number_operator_eigenvalues(N):
    a = annihilation(N)
    n_op = creation(N) @ a
    np.testing.assert_allclose(n_op, number(N), atol=1e-14)
    for n in range(N):
        ket = np.zeros(N)
        ket[n] = 1
        np.testing.assert_allclose(n_op @ ket, n * ket, atol=1e-14)


def test_returned_ladder_is_a_copy():
    a = annihilation(4)
    a[0, 1] = 99
    assert annihilation(4)[0, 1] == 1


# -- matrix exponential ------------------------------------------------------------


def test_expm_trivial_cases():
    np.testing.assert_allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))
    th = 0.7
    np.testing.assert_allclose(matrix_exponential(SIGMA_Z, 1j * th), np.diag([np.exp(-1j * th), np.exp(1j * th)]), atol=1e-15)
    with pytest.raises(DimensionMismatch):
        matrix_exponential(np.zeros((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 16), st.integers(0, 2**31 - 1))
def test_expm_inverse_for_anti_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = M - M.conj().T
    P = matrix_exponential(A) @ matrix_exponential(-A)
    assert np.max(np.abs(P - np.eye(n))) < 1e-12


def test_expm_agrees_with_eigh():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    H = M + M.conj().T
    w, V = np.linalg.eigh(H)
    np.testing.assert_allclose(matrix_exponential(H, -1j), (V * np.exp(-1j * w)) @ V.conj().T, atol=1e-12)


def test_nonfinite_raises():
    with pytest.raises(FloatingPointError):
        matrix_exponential(np.array([[np.nan]]))


# -- displacement ----------------------------------------------------------------


def test_displacement_zero_is_identity():
    np.testing.assert_array_equal(displacement(0, 6), np.eye(6))


def test_vacuum_overlap_of_unit_displacement():
    D = displacement(1.0, 12)
    assert abs(D[0, 0] - np.exp(-0.5)) < 1e-8
    assert D[0, 0].real == pytest.approx(0.60653, abs=1e-5)


def test_coherent_state_amplitudes():
    alpha = 0.4 - 0.3j
    D = displacement(alpha, 30)
    n = np.arange(30)
    from scipy.special import factorial

    expected = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(factorial(n))
    np.testing.assert_allclose(D[:, 0], expected, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(finite, finite)
def test_displacement_dagger_is_negative(re, im):
    alpha = 2 * complex(re, im)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        D = displacement(alpha, 16)
        Dm = displacement(-alpha, 16)
    assert np.max(np.abs(D.conj().T - Dm)) < 1e-13
    assert is_unitary(D)


@settings(max_examples=30, deadline=None)
@given(finite, finite, finite, finite, st.integers(2, 6))
def test_displacement_composition(ar, ai, br, bi, d):
    a, b = complex(ar, ai) / np.sqrt(2), complex(br, bi) / np.sqrt(2)
    N = d + 8 + 20
    lhs = displacement(a, N) @ displacement(b, N)
    rhs = np.exp(1j * (a * np.conj(b)).imag) * displacement(a + b, N)
    assert np.max(np.abs(lhs - rhs)[:d, :d]) < 1e-6


def test_truncation_warning_and_alpha_max():
    with pytest.warns(TruncationWarning):
        displacement(2.0, 4)
    with pytest.raises(ValueError):
        displacement(9.0, 100)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        displacement(0.1, 20)


# -- costs ---------------------------------------------------------------------


def test_trace_infidelity_examples():
    U = random_unitary(4, 1)
    assert trace_infidelity(U, U) == pytest.approx(0, abs=1e-14)
    assert trace_infidelity(np.eye(2), np.exp(0.3j) * np.eye(2)) == pytest.approx(0, abs=1e-15)
    assert trace_infidelity(np.eye(2), SIGMA_Z, dim_norm=2) == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        trace_infidelity(np.eye(2), np.eye(3))


def test_trace_infidelity_frame_argument():
    U, F = random_unitary(3, 2), random_unitary(3, 3)
    assert trace_infidelity(U, F.conj().T @ U, frame=F) == pytest.approx(0, abs=1e-14)


def test_trace_infidelity_phase_invariance_exact():
    rng = np.random.default_rng(0)
    U, V = random_unitary(5, 4), random_unitary(5, 5)
    base = trace_infidelity(U, V)
    for phi in rng.uniform(0, 2 * np.pi, 100):
        assert abs(trace_infidelity(U, np.exp(1j * phi) * V) - base) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_cost_ranges(n, seed):
    U, V = random_unitary(n, seed), random_unitary(n, seed + 1)
    assert 0 <= trace_infidelity(U, V) <= 1
    assert 0 <= one_minus_norm_infidelity(U, V) <= 2 + 1e-12


def test_one_minus_norm_examples():
    U = random_unitary(3, 7)
    assert one_minus_norm_infidelity(U, U) == pytest.approx(0, abs=1e-13)
    assert one_minus_norm_infidelity(np.eye(2), -np.eye(2)) == pytest.approx(2)
    assert one_minus_norm_infidelity(np.eye(2), 1j * np.eye(2)) == pytest.approx(np.sqrt(2))


def test_diff_norm_examples():
    U = random_unitary(3, 8)
    assert diff_norm_infidelity(U, U) == pytest.approx(0, abs=1e-13)
    s = np.linalg.svd(np.eye(2) - SIGMA_X, compute_uv=False)
    assert diff_norm_infidelity(np.eye(2), SIGMA_X) == pytest.approx(s.max())
    for seed in range(5):
        V = random_unitary(4, 100 + seed)
        assert diff_norm_infidelity(np.eye(4), V) == pytest.approx(one_minus_norm_infidelity(np.eye(4), V))


def test_state_prep_examples():
    e0, e1 = np.array([1, 0]), np.array([0, 1])
    assert state_prep_infidelity(e0, np.eye(2), e0) == 0
    assert state_prep_infidelity(e1, np.eye(2), e0) == 1
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert state_prep_infidelity(e0, H, e0) == pytest.approx(0.5)
    with pytest.raises(NotNormalized):
        state_prep_infidelity(2 * e0, np.eye(2), e0)
    with pytest.raises(DimensionMismatch):
        state_prep_infidelity(e0, np.eye(3), e0)


# -- projection ------------------------------------------------------------------


def test_projection_examples():
    sp = FockSpace(4, 4)
    block, leak = project_computational(np.eye(8), sp)
    np.testing.assert_array_equal(block, np.eye(4))
    assert leak == 0
    swap = np.eye(8)
    swap[[3, 4]] = swap[[4, 3]]
    assert project_computational(swap, sp)[1] == pytest.approx(1 / 4)
    # Only |3> couples out (amplitude ~ 2 alpha); the block-averaged weight is ~ |alpha|^2.
    D = displacement(0.1, 8)
    leak = project_computational(D, sp)[1]
    assert leak == pytest.approx(np.sum(np.abs(D[4:, :4]) ** 2) / 4, rel=1e-12)
    assert leak == pytest.approx(0.1**2, rel=0.05)
    with pytest.raises(DimensionMismatch):
        project_computational(np.eye(5), sp)


def test_joint_projection_and_embedding():
    sp = FockSpace(3, 2)
    U = random_unitary(6, 9)
    full = embed_computational(U, sp, joint=True)
    block, leak = project_computational(full, sp, joint=True)
    np.testing.assert_allclose(block, U)
    assert leak == pytest.approx(0, abs=1e-14)


def test_pauli_algebra():
    assert np.allclose(SIGMA_X @ SIGMA_Y - SIGMA_Y @ SIGMA_X, 2j * SIGMA_Z)
    assert np.allclose(SIGMA_PLUS, (SIGMA_X + 1j * SIGMA_Y) / 2)
    assert np.allclose(SIGMA_PLUS @ np.array([1, 0]), [0, 1])
    assert np.allclose(SIGMA_MINUS, SIGMA_PLUS.conj().T)
