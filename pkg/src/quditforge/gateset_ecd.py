"""Echoed conditional displacement (ECD) + qubit rotation ansatz.

Circuits act on the joint qubit-cavity space (qubit is the slow index):

    V = R(t_0, p_0) ECD(a_0) R(t_1, p_1) ECD(a_1) ... ECD(a_{B-1}) R(t_B, p_B)

with the k = 0 factor leftmost.  ECD amplitudes are complex by default
(4B + 2 real parameters); ``complex_alpha=False`` restricts them to the
real axis (3B + 2).

Flat layout: ``[re(a) (B), im(a) (B), thetas (B+1), phis (B+1)]``, with the
imaginary block omitted in real mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch
from .gateset_snapd import TimingConfig
from .operator_core import (
    ALPHA_MAX,
    FockSpace,
    JointSpace,
    annihilation,
    as_state,
    displacement,
    project_computational,
    trace_infidelity,
)


@dataclass(frozen=True)
class ECDParams:
    d: int
    B: int
    alphas: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self):
        if self.B < 1:
            raise ValueError(f"need at least one block, got B = {self.B}")
        alphas = np.asarray(self.alphas, dtype=complex).ravel()
        thetas = np.asarray(self.thetas, dtype=float).ravel()
        phis = np.asarray(self.phis, dtype=float).ravel()
        if alphas.size != self.B:
            raise ValueError(f"expected {self.B} ECD amplitudes, got {alphas.size}")
        if thetas.size != self.B + 1 or phis.size != self.B + 1:
            raise ValueError(f"expected {self.B + 1} rotation pairs")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    @staticmethod
    def n_params(B: int, complex_alpha: bool = True) -> int:
        return (4 if complex_alpha else 3) * B + 2

    def flatten(self, complex_alpha: bool = True) -> np.ndarray:
        parts = [self.alphas.real]
        if complex_alpha:
            parts.append(self.alphas.imag)
        elif np.any(self.alphas.imag != 0):
            raise ValueError("complex amplitudes cannot be flattened in real mode")
        return np.concatenate(parts + [self.thetas, self.phis])

    @classmethod
    def unflatten(cls, x, d: int, B: int, complex_alpha: bool = True) -> "ECDParams":
        x = np.asarray(x, dtype=float)
        if x.size != cls.n_params(B, complex_alpha):
            raise ValueError(f"expected {cls.n_params(B, complex_alpha)} values, got {x.size}")
        if complex_alpha:
            alphas = x[:B] + 1j * x[B : 2 * B]
            rest = x[2 * B :]
        else:
            alphas = x[:B].astype(complex)
            rest = x[B:]
        return cls(d, B, alphas, rest[: B + 1], rest[B + 1 :])

    def to_dict(self) -> dict:
        return {
            "ansatz": "ecd",
            "d": self.d,
            "B": self.B,
            "alphas_re": self.alphas.real.tolist(),
            "alphas_im": self.alphas.imag.tolist(),
            "thetas": self.thetas.tolist(),
            "phis": self.phis.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ECDParams":
        if data.get("ansatz", "ecd") != "ecd":
            raise ValueError(f"not an ecd parameter record: {data.get('ansatz')!r}")
        alphas = np.asarray(data["alphas_re"], dtype=float) + 1j * np.asarray(data["alphas_im"], dtype=float)
        return cls(int(data["d"]), int(data["B"]), alphas, data["thetas"], data["phis"])


def qubit_rotation(theta: float, phi: float) -> np.ndarray:
    """exp(-i theta/2 (cos(phi) sigma_x + sin(phi) sigma_y)), 2 x 2."""
    return _kernels._rotation(float(theta), float(phi)).copy()


def ecd(alpha: complex, space: FockSpace) -> np.ndarray:
    """D(alpha/2) on |g> -> |e> and D(-alpha/2) on |e> -> |g>."""
    alpha = complex(alpha)
    if abs(alpha) > 2 * ALPHA_MAX:
        raise ValueError(f"|alpha| = {abs(alpha):.3g} exceeds 2 * alpha_max")
    N = space.N
    out = np.zeros((2 * N, 2 * N), dtype=complex)
    out[N:, :N] = displacement(alpha / 2, space)
    out[:N, N:] = displacement(-alpha / 2, space)
    return out


def build_circuit_ecd(p: ECDParams, space: FockSpace) -> np.ndarray:
    if p.d != space.d:
        raise DimensionMismatch(f"parameters are for d = {p.d}, space has d = {space.d}")
    eye = np.eye(space.N)
    V = np.kron(qubit_rotation(p.thetas[0], p.phis[0]), eye)
    for k in range(p.B):
        V = V @ ecd(p.alphas[k], space) @ np.kron(qubit_rotation(p.thetas[k + 1], p.phis[k + 1]), eye)
    return V


def gate_time_estimate_ecd(p: ECDParams, timing: TimingConfig = TimingConfig()) -> float:
    return p.B * (timing.t_ecd + timing.t_rot) + timing.t_rot


def joint_target(target, space: FockSpace) -> np.ndarray:
    """target (x) 1_2 as a 2d x 2d block in qubit-slow ordering."""
    target = np.asarray(target, dtype=complex)
    if target.shape != (space.d, space.d):
        raise DimensionMismatch(f"target must be {space.d}x{space.d}, got {target.shape}")
    return np.kron(np.eye(2), target)


def ground_state_input(space: FockSpace, cavity_state=None) -> np.ndarray:
    """|cavity_state> (x) |g> as a joint column; vacuum by default."""
    psi = np.zeros((2 * space.N, 1), dtype=complex)
    if cavity_state is None:
        psi[0, 0] = 1.0
    else:
        c = as_state(cavity_state)
        if c.shape[0] != space.N:
            raise DimensionMismatch(f"state has {c.shape[0]} entries, space has {space.N}")
        psi[: space.N] = c
    return psi


def ecd_gate_infidelity(p: ECDParams, target, space: FockSpace, return_leakage: bool = False):
    """Trace infidelity against target (x) 1_2 on the projected 2d x 2d block."""
    U = joint_target(target, space)
    block, leakage = project_computational(build_circuit_ecd(p, space), space, joint=True)
    value = trace_infidelity(U, block, dim_norm=2 * space.d)
    return (value, leakage) if return_leakage else value


def ecd_state_infidelity(p: ECDParams, target_state, space: FockSpace) -> float:
    """1 - |(<target| (x) <g|) V |0, g>|^2."""
    target = ground_state_input(space, target_state)
    V = build_circuit_ecd(p, space)
    return max(0.0, 1.0 - abs((target.conj().T @ V[:, :1])[0, 0]) ** 2)


def qubit_purity(V, space: FockSpace, n_inputs: int = 8, seed: int = 0) -> float:
    """Smallest purity of the reduced qubit state over random cavity inputs (x) |g>.

    Inputs are Haar-like random vectors on the computational levels.
    """
    V = np.asarray(V, dtype=complex)
    N, d = space.N, space.d
    rng = np.random.default_rng(seed)
    worst = 1.0
    for _ in range(n_inputs):
        c = rng.normal(size=d) + 1j * rng.normal(size=d)
        c /= np.linalg.norm(c)
        out = V[:, :d] @ c
        g, e = out[:N], out[N:]
        rho = np.array([[np.vdot(g, g), np.vdot(e, g)], [np.vdot(g, e), np.vdot(e, e)]])
        rho /= np.trace(rho).real
        worst = min(worst, float(np.real(np.trace(rho @ rho))))
    return worst


class _ECDCost:
    def __init__(self, space: FockSpace, B: int, Y, X, norm: float, complex_alpha: bool):
        self.space = space
        self.B = B
        self.complex_alpha = complex_alpha
        self.Y = np.ascontiguousarray(Y, dtype=complex)
        self.X = np.ascontiguousarray(X, dtype=complex)
        self.norm = float(norm)
        self._a = np.ascontiguousarray(annihilation(space.N))

    @property
    def n_params(self) -> int:
        return ECDParams.n_params(self.B, self.complex_alpha)

    def params(self, x) -> ECDParams:
        return ECDParams.unflatten(x, self.space.d, self.B, self.complex_alpha)

    def _overlap(self, x):
        p = self.params(x)
        z, g_re, g_im, g_th, g_ph, out = _kernels.ecd_value_grad(
            self._a, p.alphas, p.thetas, p.phis, self.Y, self.X
        )
        parts = [g_re, g_im] if self.complex_alpha else [g_re]
        return z, np.concatenate(parts + [g_th, g_ph]), out

    def value_and_grad(self, x):
        z, dz, _ = self._overlap(x)
        value = 1.0 - abs(z) ** 2 / self.norm**2
        grad = -2.0 * np.real(np.conj(z) * dz) / self.norm**2
        return max(value, 0.0), grad

    def __call__(self, x) -> float:
        return self.value_and_grad(x)[0]

    def circuit(self, x) -> np.ndarray:
        return build_circuit_ecd(self.params(x), self.space)

    def _leak(self, out, n):
        idx = JointSpace(self.space).computational_indices()
        return float(max(0.0, 1.0 - np.sum(np.abs(out[idx]) ** 2) / n))


class ECDGateCost(_ECDCost):
    def __init__(self, target, space: FockSpace, B: int, complex_alpha: bool = True):
        U = joint_target(target, space)
        idx = JointSpace(space).computational_indices()
        Y = np.zeros((2 * space.N, 2 * space.d), dtype=complex)
        Y[idx, np.arange(2 * space.d)] = 1.0
        X = np.zeros_like(Y)
        X[idx] = U
        super().__init__(space, B, Y, X, 2 * space.d, complex_alpha)
        self.target = np.asarray(target, dtype=complex)

    def leakage(self, x) -> float:
        return self._leak(self._overlap(x)[2], 2 * self.space.d)


class ECDStateCost(_ECDCost):
    def __init__(self, target_state, space: FockSpace, B: int, complex_alpha: bool = True):
        X = ground_state_input(space, target_state)
        super().__init__(space, B, ground_state_input(space), X, 1.0, complex_alpha)

    def leakage(self, x) -> float:
        return self._leak(self._overlap(x)[2], 1)
