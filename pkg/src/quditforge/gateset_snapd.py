"""SNAP + displacement ansatz.

A B-block circuit is

    V = D(a_0) S(t_0) D(a_1) S(t_1) ... D(a_{B-1}) S(t_{B-1}) D(a_B)

with the k = 0 factor leftmost, i.e. applied last to a state.  SNAP phases
act on the d computational levels only; guard levels are left untouched.
Displacement amplitudes are real by default, giving (d + 1) B + 1 free
parameters; ``complex_alpha=True`` adds imaginary parts.

Flat parameter layout: ``[alphas (B+1), thetas (B*d, row-major)]``, or
``[alphas.real (B+1), alphas.imag (B+1), thetas]`` in complex mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, WrongAngleCount
from .operator_core import (
    FockSpace,
    annihilation,
    as_state,
    displacement,
    project_computational,
    trace_infidelity,
)


@dataclass(frozen=True)
class SnapDParams:
    d: int
    B: int
    alphas: np.ndarray
    thetas: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas)
        alphas = alphas.astype(complex if np.iscomplexobj(alphas) else float)
        thetas = np.asarray(self.thetas, dtype=float).reshape(self.B, self.d)
        if self.B < 1:
            raise ValueError(f"need at least one block, got B = {self.B}")
        if alphas.shape != (self.B + 1,):
            raise ValueError(f"expected {self.B + 1} displacement amplitudes, got {alphas.shape}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "thetas", thetas)

    @property
    def complex_alpha(self) -> bool:
        return np.iscomplexobj(self.alphas)

    @staticmethod
    def n_params(d: int, B: int, complex_alpha: bool = False) -> int:
        return (d + 1) * B + 1 + ((B + 1) if complex_alpha else 0)

    def flatten(self) -> np.ndarray:
        if self.complex_alpha:
            head = [self.alphas.real, self.alphas.imag]
        else:
            head = [self.alphas]
        return np.concatenate(head + [self.thetas.ravel()])

    @classmethod
    def unflatten(cls, x, d: int, B: int, complex_alpha: bool = False) -> "SnapDParams":
        x = np.asarray(x, dtype=float)
        if x.size != cls.n_params(d, B, complex_alpha):
            raise ValueError(f"expected {cls.n_params(d, B, complex_alpha)} values, got {x.size}")
        if complex_alpha:
            alphas = x[: B + 1] + 1j * x[B + 1 : 2 * B + 2]
            rest = x[2 * B + 2 :]
        else:
            alphas, rest = x[: B + 1], x[B + 1 :]
        return cls(d, B, alphas, rest.reshape(B, d))

    def to_dict(self) -> dict:
        out = {"ansatz": "snapd", "d": self.d, "B": self.B}
        if self.complex_alpha:
            out["alphas_re"] = self.alphas.real.tolist()
            out["alphas_im"] = self.alphas.imag.tolist()
        else:
            out["alphas"] = self.alphas.tolist()
        out["thetas"] = self.thetas.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SnapDParams":
        if data.get("ansatz", "snapd") != "snapd":
            raise ValueError(f"not a snapd parameter record: {data.get('ansatz')!r}")
        if "alphas_re" in data:
            alphas = np.asarray(data["alphas_re"]) + 1j * np.asarray(data["alphas_im"])
        else:
            alphas = np.asarray(data["alphas"], dtype=float)
        return cls(int(data["d"]), int(data["B"]), alphas, np.asarray(data["thetas"], dtype=float))


@dataclass(frozen=True)
class TimingConfig:
    """Per-gate durations in microseconds."""

    t_snap: float = 1.0
    t_disp: float = 0.01
    t_ecd: float = 0.1
    t_rot: float = 0.01


def snap(thetas, space: FockSpace) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=float).ravel()
    if thetas.size != space.d:
        raise WrongAngleCount(f"SNAP needs {space.d} phases, got {thetas.size}")
    phases = np.ones(space.N, dtype=complex)
    phases[: space.d] = np.exp(1j * thetas)
    return np.diag(phases)


def build_circuit(p: SnapDParams, space: FockSpace) -> np.ndarray:
    if p.d != space.d:
        raise DimensionMismatch(f"parameters are for d = {p.d}, space has d = {space.d}")
    V = displacement(p.alphas[0], space)
    for k in range(p.B):
        V = V @ snap(p.thetas[k], space) @ displacement(p.alphas[k + 1], space)
    return V


def gate_time_estimate_snapd(p: SnapDParams, timing: TimingConfig = TimingConfig()) -> float:
    return p.B * timing.t_snap + (p.B + 1) * timing.t_disp


@lru_cache(maxsize=32)
def _displacement_basis(N: int):
    """Eigenbasis of i (a^dag - a), so that D(x) = W exp(-i x mu) W^dag for real x."""
    a = annihilation(N)
    G1 = a.conj().T - a
    mu, W = np.linalg.eigh(1j * G1)
    return np.ascontiguousarray(W), mu, np.ascontiguousarray(G1)


def _complex_displacement_eig(alpha, a):
    ad = a.conj().T
    lam, W = np.linalg.eigh(1j * (alpha * ad - np.conj(alpha) * a))
    return lam, W


def _complex_value_grad(alphas, thetas, space, Y, X):
    """Numpy path for complex displacement amplitudes (config switch)."""
    N, d, B = space.N, space.d, thetas.shape[0]
    a = annihilation(N)
    ad = a.conj().T
    E1 = 1j * (ad - a)
    E2 = -(ad + a)
    factors = []
    for k in range(B, -1, -1):
        lam, W = _complex_displacement_eig(alphas[k], a)
        factors.append(("D", k, (lam, W)))
        if k > 0:
            factors.append(("S", k - 1, np.exp(1j * thetas[k - 1])))
    psis = [Y]
    cur = Y
    for kind, k, data in factors:
        if kind == "D":
            lam, W = data
            cur = _kernels.apply_eig(W, np.exp(-1j * lam), cur)
        else:
            cur = cur.copy()
            cur[:d] *= data[:, None]
        psis.append(cur)
    z = np.vdot(X, cur)
    g_re = np.zeros(B + 1, dtype=complex)
    g_im = np.zeros(B + 1, dtype=complex)
    g_th = np.zeros((B, d), dtype=complex)
    chi = X
    for i in range(len(factors) - 1, -1, -1):
        kind, k, data = factors[i]
        if kind == "D":
            lam, W = data
            Z = _kernels.frechet_Z(W, _kernels.divdiff_expi(lam, 1.0), psis[i], chi)
            g_re[k] = _kernels.trace_with(E1, Z)
            g_im[k] = _kernels.trace_with(E2, Z)
            chi = _kernels.apply_eig(W, np.exp(1j * lam), chi)
        else:
            after = psis[i + 1]
            g_th[k] = 1j * np.sum(np.conj(chi[:d]) * after[:d], axis=1)
            chi = chi.copy()
            chi[:d] *= np.conj(data)[:, None]
    return z, g_re, g_im, g_th, cur


class _SnapDCost:
    """Shared machinery: overlap z = Tr(X^dag V Y), cost = 1 - |z|^2 / norm^2."""

    def __init__(self, space: FockSpace, B: int, Y, X, norm: float, complex_alpha: bool):
        self.space = space
        self.B = B
        self.complex_alpha = complex_alpha
        self.Y = np.ascontiguousarray(Y, dtype=complex)
        self.X = np.ascontiguousarray(X, dtype=complex)
        self.norm = float(norm)

    @property
    def n_params(self) -> int:
        return SnapDParams.n_params(self.space.d, self.B, self.complex_alpha)

    def params(self, x) -> SnapDParams:
        return SnapDParams.unflatten(x, self.space.d, self.B, self.complex_alpha)

    def _overlap(self, x):
        p = self.params(x)
        if self.complex_alpha:
            z, g_re, g_im, g_th, out = _complex_value_grad(
                p.alphas, p.thetas, self.space, self.Y, self.X
            )
            dz = np.concatenate([g_re, g_im, g_th.ravel()])
        else:
            W, mu, G1 = _displacement_basis(self.space.N)
            z, g_a, g_th, out = _kernels.snapd_value_grad(
                W, mu, G1, np.ascontiguousarray(p.alphas), np.ascontiguousarray(p.thetas), self.Y, self.X
            )
            dz = np.concatenate([g_a, g_th.ravel()])
        return z, dz, out

    def value_and_grad(self, x):
        z, dz, _ = self._overlap(x)
        value = 1.0 - abs(z) ** 2 / self.norm**2
        grad = -2.0 * np.real(np.conj(z) * dz) / self.norm**2
        return max(value, 0.0), grad

    def __call__(self, x) -> float:
        return self.value_and_grad(x)[0]

    def circuit(self, x) -> np.ndarray:
        return build_circuit(self.params(x), self.space)


class SnapDGateCost(_SnapDCost):
    """Trace infidelity of the projected d x d block against ``target``."""

    def __init__(self, target, space: FockSpace, B: int, complex_alpha: bool = False):
        target = np.asarray(target, dtype=complex)
        d = space.d
        if target.shape != (d, d):
            raise DimensionMismatch(f"target must be {d}x{d}, got {target.shape}")
        Y = np.zeros((space.N, d), dtype=complex)
        Y[:d] = np.eye(d)
        X = np.zeros((space.N, d), dtype=complex)
        X[:d] = target
        super().__init__(space, B, Y, X, d, complex_alpha)
        self.target = target

    def leakage(self, x) -> float:
        _, _, out = self._overlap(x)
        d = self.space.d
        return float(max(0.0, 1.0 - np.sum(np.abs(out[:d]) ** 2) / d))


class SnapDStateCost(_SnapDCost):
    """1 - |<target| V |initial>|^2, initial defaulting to vacuum."""

    def __init__(self, target_state, space: FockSpace, B: int, initial=None, complex_alpha: bool = False):
        target = as_state(target_state)
        if target.shape[0] != space.N:
            raise DimensionMismatch(f"state has {target.shape[0]} entries, space has {space.N}")
        if initial is None:
            initial = np.zeros((space.N, 1), dtype=complex)
            initial[0, 0] = 1.0
        super().__init__(space, B, as_state(initial), target, 1.0, complex_alpha)

    def leakage(self, x) -> float:
        _, _, out = self._overlap(x)
        return float(max(0.0, 1.0 - np.sum(np.abs(out[: self.space.d]) ** 2)))


def snapd_gate_infidelity(p: SnapDParams, target, space: FockSpace, return_leakage: bool = False):
    """Trace infidelity on the projected d x d block, normalized by d."""
    target = np.asarray(target, dtype=complex)
    if target.shape != (space.d, space.d):
        raise DimensionMismatch(f"target must be {space.d}x{space.d}, got {target.shape}")
    block, leakage = project_computational(build_circuit(p, space), space)
    value = trace_infidelity(target, block, dim_norm=space.d)
    return (value, leakage) if return_leakage else value


def snapd_state_infidelity(p: SnapDParams, target_state, space: FockSpace) -> float:
    target = as_state(target_state)
    if target.shape[0] != space.N:
        raise DimensionMismatch(f"state has {target.shape[0]} entries, space has {space.N}")
    V = build_circuit(p, space)
    return max(0.0, 1.0 - abs((target.conj().T @ V[:, :1])[0, 0]) ** 2)
