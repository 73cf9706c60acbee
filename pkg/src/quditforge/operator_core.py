"""Truncated Fock-space linear algebra.

Operators are plain ``complex128`` numpy arrays.  State vectors are
``(n, 1)`` column arrays so that every object goes through the same
matrix algebra.

The joint qubit-cavity space orders the qubit as the slow (outer) index:
joint index ``k`` corresponds to qubit level ``k // N`` (0 = |g>, 1 = |e>)
and cavity level ``k % N``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotNormalized, TruncationWarning

ALPHA_MAX = 8.0
LEAKAGE_WARN = 1e-6
NORM_TOL = 1e-8


@dataclass(frozen=True)
class FockSpace:
    """Cavity truncated to ``d + n_guard`` levels, the lowest ``d`` computational."""

    d: int
    n_guard: int | None = None

    def __post_init__(self):
        if self.n_guard is None:
            object.__setattr__(self, "n_guard", max(4, self.d))
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")
        if self.n_guard < 0:
            raise ValueError(f"n_guard must be >= 0, got {self.n_guard}")

    @property
    def N(self) -> int:
        return self.d + self.n_guard


@dataclass(frozen=True)
class JointSpace:
    fock: FockSpace

    @property
    def dim(self) -> int:
        return 2 * self.fock.N

    def split(self, k: int) -> tuple[int, int]:
        return divmod(k, self.fock.N)

    def join(self, qubit: int, level: int) -> int:
        return qubit * self.fock.N + level

    def embed(self, qubit_op, cavity_op) -> np.ndarray:
        return np.kron(np.asarray(qubit_op, dtype=complex), np.asarray(cavity_op, dtype=complex))

    def computational_indices(self) -> np.ndarray:
        N, d = self.fock.N, self.fock.d
        return np.concatenate([np.arange(d), N + np.arange(d)])


def _size(space) -> int:
    return space.N if isinstance(space, FockSpace) else int(space)


def _finite(M: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("operator has non-finite entries")
    return M


@lru_cache(maxsize=64)
def _ladder(N: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(space) -> np.ndarray:
    """N x N lowering operator with sqrt(n) on the first superdiagonal."""
    return _ladder(_size(space)).copy()


def creation(space) -> np.ndarray:
    return _ladder(_size(space)).conj().T.copy()


def number(space) -> np.ndarray:
    return np.diag(np.arange(_size(space), dtype=float)).astype(complex)


def matrix_exponential(H, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * H) by scaling and squaring with a Pade approximant."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"matrix exponential needs a square matrix, got {H.shape}")
    return _finite(scipy.linalg.expm(scale * H))


def displacement(alpha: complex, space, alpha_max: float = ALPHA_MAX) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha^* a) on the truncated space."""
    alpha = complex(alpha)
    if abs(alpha) > alpha_max:
        raise ValueError(f"|alpha| = {abs(alpha):.3g} exceeds alpha_max = {alpha_max}")
    N = _size(space)
    leak = np.exp(-(N - abs(alpha) ** 2))
    if alpha != 0 and leak > LEAKAGE_WARN:
        warnings.warn(
            f"displacement |alpha|={abs(alpha):.3g} on {N} levels: predicted leakage {leak:.1e}",
            TruncationWarning,
            stacklevel=2,
        )
    a = _ladder(N)
    return matrix_exponential(alpha * a.conj().T - alpha.conjugate() * a)


def dagger(M) -> np.ndarray:
    return np.asarray(M).conj().T


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) < tol)


def _check_same(*mats):
    shapes = {np.shape(m) for m in mats if m is not None}
    if len(shapes) != 1:
        raise DimensionMismatch(f"operands have different shapes: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionMismatch(f"expected square matrices, got {shape}")
    return shape[0]


def _framed(V, frame):
    V = np.asarray(V, dtype=complex)
    return V if frame is None else np.asarray(frame, dtype=complex) @ V


def trace_infidelity(U_t, V, frame=None, dim_norm: int | None = None) -> float:
    """1 - (|Tr(U_t^dag frame V)| / dim_norm)^2, insensitive to global phase."""
    n = _check_same(U_t, V, frame)
    dim_norm = n if dim_norm is None else dim_norm
    overlap = np.vdot(np.asarray(U_t, dtype=complex), _framed(V, frame))
    return max(0.0, 1.0 - (abs(overlap) / dim_norm) ** 2)


def one_minus_norm_infidelity(U_t, V, frame=None) -> float:
    n = _check_same(U_t, V, frame)
    M = np.eye(n) - dagger(U_t) @ _framed(V, frame)
    return float(np.linalg.norm(M, 2))


def diff_norm_infidelity(U_t, V, frame=None) -> float:
    _check_same(U_t, V, frame)
    return float(np.linalg.norm(np.asarray(U_t, dtype=complex) - _framed(V, frame), 2))


def as_state(psi, tol: float = NORM_TOL) -> np.ndarray:
    """Column vector view of ``psi``; raises NotNormalized if |psi| != 1."""
    psi = np.asarray(psi, dtype=complex).reshape(-1, 1)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise NotNormalized(f"state norm {norm:.12g} deviates from 1")
    return psi


def state_prep_infidelity(target, V, initial) -> float:
    """1 - |<target|V|initial>|^2."""
    target, initial = as_state(target), as_state(initial)
    V = np.asarray(V, dtype=complex)
    if V.shape != (target.shape[0], initial.shape[0]):
        raise DimensionMismatch(
            f"V is {V.shape}, states have {target.shape[0]} and {initial.shape[0]} entries"
        )
    amp = (target.conj().T @ V @ initial)[0, 0]
    return max(0.0, 1.0 - abs(amp) ** 2)


def computational_indices(space: FockSpace, joint: bool) -> np.ndarray:
    return JointSpace(space).computational_indices() if joint else np.arange(space.d)


def project_computational(V, space: FockSpace, joint: bool = False) -> tuple[np.ndarray, float]:
    """Computational sub-block of ``V`` and the weight that left it.

    leakage = 1 - ||block||_F^2 / n_comp with n_comp = d (or 2d when joint).
    """
    V = np.asarray(V, dtype=complex)
    full = 2 * space.N if joint else space.N
    if V.shape != (full, full):
        raise DimensionMismatch(f"expected a {full}x{full} operator, got {V.shape}")
    idx = computational_indices(space, joint)
    block = V[np.ix_(idx, idx)]
    leakage = 1.0 - np.sum(np.abs(block) ** 2) / len(idx)
    return block, float(max(0.0, leakage))


def embed_computational(U, space: FockSpace, joint: bool = False) -> np.ndarray:
    """Place a d x d (or 2d x 2d) operator on the computational levels, zero elsewhere."""
    U = np.asarray(U, dtype=complex)
    idx = computational_indices(space, joint)
    if U.shape != (len(idx), len(idx)):
        raise DimensionMismatch(f"expected {len(idx)}x{len(idx)}, got {U.shape}")
    full = 2 * space.N if joint else space.N
    out = np.zeros((full, full), dtype=complex)
    out[np.ix_(idx, idx)] = U
    return out


# Qubit operators, basis order (|g>, |e>); sigma_z |e> = +|e>.  sigma_y is
# fixed by sigma_plus = (sigma_x + i sigma_y) / 2 so [sx, sy] = 2i sz holds
# in this ordering.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()
