"""Chebyshev-parameterized pulses on the dispersive qubit-cavity system.

Units: time in microseconds, angular frequency in rad/us.  Configuration
takes ordinary frequencies (GHz, MHz) and converts with 2 pi.  Pulse
coefficients are complex envelope amplitudes in MHz.

Frame convention
----------------
The lab Hamiltonian is

    H = w_c n + w_q sz / 2 + chi n sz + eps(t) a^dag + Omega(t) s+ + h.c.

with sz |g> = -|g>, sz |e> = +|e>, and eps, Omega in rad/us.  Moving to the
frame of H0 = w_c n + w_q sz / 2 and writing eps = env_c e^{-i w_c t},
Omega = env_q e^{-i w_q t} removes every carrier:

    H_I = chi n sz + env_c a^dag + env_q s+ + h.c.

Only H_I is integrated.  The lab propagator is U0(T) V with
U0(T) = exp(-i H0 T); carriers reappear in ``lab_frame_export``.

Sign table for the dispersive term (diagonal of chi n sz):

    |g, n>  ->  -chi n
    |e, n>  ->  +chi n

Integrators
-----------
``magnus4`` (default) is a fourth-order commutator-free Magnus scheme: two
exponentials per sub-step built from Gauss-node samples of the drive.
``midpoint`` samples the drive once per sub-step and is only second order;
optimized pulses can exploit its error, so use it for comparisons only.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import OutOfDomain, SubstepCapWarning, UnderSampled
from .gateset_ecd import ground_state_input, joint_target
from .operator_core import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    FockSpace,
    JointSpace,
    annihilation,
    number,
    project_computational,
    trace_infidelity,
)

TWO_PI = 2.0 * np.pi
INTEGRATORS = ("midpoint", "magnus4")
_DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class HardwareConfig:
    omega_c_ghz: float = 5.0
    omega_q_ghz: float = 3.0
    chi_mhz: float = 0.3
    dt_state_prep_ns: float = 1.0
    dt_gate_ns: float = 10.0
    slope_limit_mhz_per_ns: float = 1.0
    t1_budget_us: float = 10_000.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def w_c(self) -> float:
        return TWO_PI * 1e3 * self.omega_c_ghz

    @property
    def w_q(self) -> float:
        return TWO_PI * 1e3 * self.omega_q_ghz

    @property
    def chi(self) -> float:
        return TWO_PI * self.chi_mhz


@dataclass(frozen=True)
class EvolutionConfig:
    space: FockSpace
    substeps: int = 4
    frame: str = "interaction"
    dt_us: float | None = None  # control sample spacing; None picks the hardware default
    auto_substeps: bool = False
    auto_tol: float = 1e-8
    max_substeps: int = 256
    integrator: str = "magnus4"  # or "midpoint"

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {self.substeps}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.frame not in ("interaction", "lab"):
            raise ValueError(f"frame must be 'interaction' or 'lab', got {self.frame!r}")


@dataclass(frozen=True)
class ChebyshevPulse:
    order: int
    T: float
    c: np.ndarray = field(default=None)
    q: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        if not self.T > 0:
            raise ValueError(f"duration must be positive, got {self.T}")
        for name in ("c", "q"):
            value = getattr(self, name)
            arr = np.zeros(self.order + 1, dtype=complex) if value is None else np.asarray(value, dtype=complex).ravel()
            if arr.size != self.order + 1:
                raise ValueError(f"{name} needs {self.order + 1} coefficients, got {arr.size}")
            object.__setattr__(self, name, arr)

    @staticmethod
    def n_params(order: int) -> int:
        return 4 * (order + 1)

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.c.real, self.c.imag, self.q.real, self.q.imag])

    @classmethod
    def unflatten(cls, x, order: int, T: float) -> "ChebyshevPulse":
        x = np.asarray(x, dtype=float)
        if x.size != cls.n_params(order):
            raise ValueError(f"expected {cls.n_params(order)} values, got {x.size}")
        cr, ci, qr, qi = x.reshape(4, order + 1)
        return cls(order, T, cr + 1j * ci, qr + 1j * qi)

    def to_dict(self) -> dict:
        return {
            "ansatz": "pulse",
            "order": self.order,
            "T_us": self.T,
            "c_re": self.c.real.tolist(),
            "c_im": self.c.imag.tolist(),
            "q_re": self.q.real.tolist(),
            "q_im": self.q.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChebyshevPulse":
        if data.get("ansatz", "pulse") != "pulse":
            raise ValueError(f"not a pulse parameter record: {data.get('ansatz')!r}")
        c = np.asarray(data["c_re"], dtype=float) + 1j * np.asarray(data["c_im"], dtype=float)
        q = np.asarray(data["q_re"], dtype=float) + 1j * np.asarray(data["q_im"], dtype=float)
        return cls(int(data["order"]), float(data["T_us"]), c, q)


def embed_coefficients(x, old_order: int, new_order: int) -> np.ndarray:
    """Pad a flat pulse vector with zero coefficients for a higher order."""
    if new_order < old_order:
        raise ValueError("cannot shrink the basis")
    blocks = np.asarray(x, dtype=float).reshape(4, old_order + 1)
    out = np.zeros((4, new_order + 1))
    out[:, : old_order + 1] = blocks
    return out.ravel()


# -- Chebyshev basis ---------------------------------------------------------


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + _DOMAIN_TOL):
        raise OutOfDomain("Chebyshev argument outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def chebyshev_basis(order: int, x) -> np.ndarray:
    """Rows T_0(x) .. T_order(x) for each x, by the three-term recurrence."""
    x = _check_domain(np.atleast_1d(x))
    out = np.empty((x.size, order + 1))
    out[:, 0] = 1.0
    if order >= 1:
        out[:, 1] = x
    for k in range(1, order):
        out[:, k + 1] = 2.0 * x * out[:, k] - out[:, k - 1]
    return out


def chebyshev_eval(order: int, x):
    """T_order(x)."""
    vals = chebyshev_basis(order, x)[:, order]
    return vals if np.ndim(x) else float(vals[0])


def _to_unit(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < -_DOMAIN_TOL * T) or np.any(t > T * (1 + _DOMAIN_TOL)):
        raise OutOfDomain(f"time outside [0, {T}]")
    return 2.0 * t / T - 1.0


def envelope(pulse: ChebyshevPulse, channel: str, t):
    """Co-rotating envelope in MHz for channel 'c' (cavity) or 'q' (qubit)."""
    coef = {"c": pulse.c, "q": pulse.q}[channel]
    vals = chebyshev_basis(pulse.order, _to_unit(t, pulse.T)) @ coef
    return vals if np.ndim(t) else complex(vals[0])


# -- Hamiltonians ------------------------------------------------------------


def _operators(space: FockSpace):
    N = space.N
    a = annihilation(N)
    ad = a.conj().T
    I2, IN = np.eye(2), np.eye(N)
    ops = {
        "disp": np.kron(SIGMA_Z, number(N)),
        "Xc": np.kron(I2, ad + a),
        "Yc": np.kron(I2, 1j * (ad - a)),
        "Xq": np.kron(SIGMA_X, IN),
        "Yq": np.kron(1j * (SIGMA_PLUS - SIGMA_MINUS), IN),
        "a": np.kron(I2, a),
        "sp": np.kron(SIGMA_PLUS, IN),
        "free_n": np.kron(I2, number(N)),
        "free_z": np.kron(SIGMA_Z, IN),
    }
    return ops


def _generators(space: FockSpace) -> np.ndarray:
    ops = _operators(space)
    return np.stack([ops["Xc"], ops["Yc"], ops["Xq"], ops["Yq"]])


def interaction_hamiltonian(pulse: ChebyshevPulse, t: float, hw: HardwareConfig, space: FockSpace) -> np.ndarray:
    ops = _operators(space)
    ec = TWO_PI * envelope(pulse, "c", t)
    eq = TWO_PI * envelope(pulse, "q", t)
    return (
        hw.chi * ops["disp"]
        + ec.real * ops["Xc"] + ec.imag * ops["Yc"]
        + eq.real * ops["Xq"] + eq.imag * ops["Yq"]
    )


def lab_hamiltonian(pulse: ChebyshevPulse, t: float, hw: HardwareConfig, space: FockSpace) -> np.ndarray:
    ops = _operators(space)
    eps = TWO_PI * envelope(pulse, "c", t) * np.exp(-1j * hw.w_c * t)
    om = TWO_PI * envelope(pulse, "q", t) * np.exp(-1j * hw.w_q * t)
    drive = eps * ops["a"].conj().T + om * ops["sp"]
    return (
        hw.w_c * ops["free_n"] + 0.5 * hw.w_q * ops["free_z"] + hw.chi * ops["disp"]
        + drive + drive.conj().T
    )


def free_propagator(hw: HardwareConfig, space: FockSpace, T: float) -> np.ndarray:
    """U0(T) = exp(-i (w_c n + w_q sz / 2) T), diagonal."""
    N = space.N
    n = np.tile(np.arange(N), 2)
    z = np.repeat([-1.0, 1.0], N)
    return np.diag(np.exp(-1j * T * (hw.w_c * n + 0.5 * hw.w_q * z)))


# -- time grid and evolution -------------------------------------------------


def control_samples(T: float, dt: float) -> int:
    n = T / dt
    m = int(round(n))
    if m < 1 or abs(n - m) > 1e-9 * max(1.0, n):
        raise ValueError(f"sample spacing {dt} us does not divide duration {T} us")
    return m


def _resolve_dt(evo: EvolutionConfig, hw: HardwareConfig, state_prep: bool) -> float:
    if evo.dt_us is not None:
        return evo.dt_us
    return 1e-3 * (hw.dt_state_prep_ns if state_prep else hw.dt_gate_ns)


def midpoint_basis(order: int, T: float, dt: float, substeps: int) -> tuple[np.ndarray, float]:
    """Chebyshev rows at sub-step midpoints and the sub-step length."""
    m = control_samples(T, dt) * substeps
    h = T / m
    t = (np.arange(m) + 0.5) * h
    return chebyshev_basis(order, 2.0 * t / T - 1.0), h


_GL = np.sqrt(3.0) / 6.0
_CF1 = (3.0 - 2.0 * np.sqrt(3.0)) / 12.0
_CF2 = (3.0 + 2.0 * np.sqrt(3.0)) / 12.0


def magnus4_basis(order: int, T: float, dt: float, substeps: int) -> tuple[np.ndarray, float]:
    """Fourth-order commutator-free Magnus rows.

    Each sub-step of length h becomes two exponentials of length h/2,
    exp(-i h/2 [Hd + 2(a1 H_drive(t1) + a2 H_drive(t2))]) applied after
    exp(-i h/2 [Hd + 2(a2 H_drive(t1) + a1 H_drive(t2))]), with Gauss nodes
    t1,2 = (1/2 -+ sqrt(3)/6) h.  Rows are returned in time order.
    """
    m = control_samples(T, dt) * substeps
    h = T / m
    t0 = np.arange(m) * h
    B1 = chebyshev_basis(order, np.clip(2.0 * (t0 + (0.5 - _GL) * h) / T - 1.0, -1, 1))
    B2 = chebyshev_basis(order, np.clip(2.0 * (t0 + (0.5 + _GL) * h) / T - 1.0, -1, 1))
    out = np.empty((2 * m, order + 1))
    out[0::2] = 2.0 * (_CF2 * B1 + _CF1 * B2)
    out[1::2] = 2.0 * (_CF1 * B1 + _CF2 * B2)
    return out, h / 2.0


def step_basis(order: int, T: float, dt: float, substeps: int, integrator: str = "midpoint"):
    """(rows, exponential length) for the chosen integrator."""
    if integrator == "magnus4":
        return magnus4_basis(order, T, dt, substeps)
    return midpoint_basis(order, T, dt, substeps)


def _amplitudes(pulse_matrix: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return TWO_PI * basis @ pulse_matrix


def _pulse_matrix(pulse: ChebyshevPulse) -> np.ndarray:
    """(order+1) x 4 real matrix with columns Re c, Im c, Re q, Im q."""
    return np.stack([pulse.c.real, pulse.c.imag, pulse.q.real, pulse.q.imag], axis=1)


def _propagate(pulse: ChebyshevPulse, hw: HardwareConfig, space: FockSpace, dt: float, substeps: int, Y, integrator="midpoint"):
    basis, h = step_basis(pulse.order, pulse.T, dt, substeps, integrator)
    Hd = hw.chi * np.kron(SIGMA_Z, number(space.N))
    amps = _amplitudes(_pulse_matrix(pulse), basis)
    _, _, out = _kernels.trotter_value_grad(Hd, _generators(space), amps, h, Y, Y[:, :1], want_grad=False)
    return out


def _evolve_at(pulse, hw, evo, dt, substeps):
    dim = 2 * evo.space.N
    V = _propagate(pulse, hw, evo.space, dt, substeps, np.eye(dim, dtype=complex), evo.integrator)
    if evo.frame == "lab":
        V = free_propagator(hw, evo.space, pulse.T) @ V
    return V


def converged_substeps(pulse: ChebyshevPulse, hw: HardwareConfig, evo: EvolutionConfig, state_prep: bool = False) -> int:
    """Smallest substep count (doubling from evo.substeps) whose halving moves no entry by more than evo.auto_tol."""
    dt = _resolve_dt(evo, hw, state_prep)
    s = evo.substeps
    V = _evolve_at(pulse, hw, evo, dt, s)
    while 2 * s <= evo.max_substeps:
        V2 = _evolve_at(pulse, hw, evo, dt, 2 * s)
        diff = float(np.max(np.abs(V2 - V)))
        if diff < evo.auto_tol:
            return s
        s, V = 2 * s, V2
    if s > evo.substeps:
        warnings.warn(f"last halving moved the propagator by {diff:.1e} > auto_tol at max_substeps={s}", SubstepCapWarning, stacklevel=2)
    return s


def evolve(pulse: ChebyshevPulse, hw: HardwareConfig, evo: EvolutionConfig, state_prep: bool = False) -> np.ndarray:
    """Interaction-frame propagator from a product of short exponentials.

    Uses ``evo.integrator`` with ``evo.substeps`` sub-steps per control sample,
    or the converged count when ``evo.auto_substeps`` is set.

    With ``evo.frame == 'lab'`` the free propagator U0(T) is applied on the left.
    """
    dt = _resolve_dt(evo, hw, state_prep)
    s = converged_substeps(pulse, hw, evo, state_prep) if evo.auto_substeps else evo.substeps
    return _evolve_at(pulse, hw, evo, dt, s)


def evolve_lab(pulse: ChebyshevPulse, hw: HardwareConfig, space: FockSpace, n_steps: int) -> np.ndarray:
    """Midpoint product of the full lab Hamiltonian; for small toy frequencies only."""
    h = pulse.T / n_steps
    U = np.eye(2 * space.N, dtype=complex)
    for j in range(n_steps):
        lam, W = np.linalg.eigh(lab_hamiltonian(pulse, (j + 0.5) * h, hw, space))
        U = (W * np.exp(-1j * h * lam)) @ W.conj().T @ U
    return U


# -- hardware checks and export ----------------------------------------------


def max_slope(pulse: ChebyshevPulse, dt: float) -> float:
    """Largest |envelope change| / time over adjacent samples, in MHz per ns.

    ``dt`` is the sample spacing in microseconds.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = max(1, int(math.floor(pulse.T / dt + 1e-9)))
    t = np.linspace(0.0, n * dt, n + 1)
    t = np.minimum(t, pulse.T)
    worst = 0.0
    for ch in ("c", "q"):
        env = envelope(pulse, ch, t)
        rates = np.abs(np.diff(env)) / (np.diff(t) * 1e3)
        worst = max(worst, float(np.max(rates)) if rates.size else 0.0)
    return worst


def slope_penalty(pulse: ChebyshevPulse, dt: float, limit: float, weight: float) -> float:
    """weight * max(0, max_slope - limit)^2."""
    return weight * max(0.0, max_slope(pulse, dt) - limit) ** 2


def _slope_penalty_grad(pulse: ChebyshevPulse, dt: float, limit: float, weight: float):
    n = max(1, int(math.floor(pulse.T / dt + 1e-9)))
    t = np.minimum(np.linspace(0.0, n * dt, n + 1), pulse.T)
    D = np.diff(chebyshev_basis(pulse.order, 2.0 * t / pulse.T - 1.0), axis=0) / (np.diff(t) * 1e3)[:, None]
    best = (-1.0, None, None, None)
    for ch, coef in (("c", pulse.c), ("q", pulse.q)):
        r = D @ coef
        j = int(np.argmax(np.abs(r)))
        if abs(r[j]) > best[0]:
            best = (abs(r[j]), ch, j, r[j])
    slope, ch, j, rj = best
    grad = np.zeros(ChebyshevPulse.n_params(pulse.order))
    excess = slope - limit
    if excess <= 0 or slope == 0:
        return 0.0, grad
    k = pulse.order + 1
    off = 0 if ch == "c" else 2 * k
    unit = rj / slope
    dslope = D[j]
    grad[off : off + k] = 2 * weight * excess * dslope * unit.real
    grad[off + k : off + 2 * k] = 2 * weight * excess * dslope * unit.imag
    return weight * excess**2, grad


def lab_frame_export(pulse: ChebyshevPulse, hw: HardwareConfig, sample_rate_gsps: float) -> np.ndarray:
    """Rows (t_ns, Re eps, Im eps, Re Omega, Im Omega), amplitudes in MHz."""
    nyquist = 2.0 * max(hw.omega_c_ghz, hw.omega_q_ghz)
    if sample_rate_gsps < nyquist:
        raise UnderSampled(f"{sample_rate_gsps} GS/s is below the Nyquist rate {nyquist} GS/s")
    T_ns = pulse.T * 1e3
    n = int(math.floor(T_ns * sample_rate_gsps + 1e-9))
    t_ns = np.minimum(np.arange(n + 1) / sample_rate_gsps, T_ns)
    t_us = t_ns * 1e-3
    eps = envelope(pulse, "c", t_us) * np.exp(-1j * hw.w_c * t_us)
    om = envelope(pulse, "q", t_us) * np.exp(-1j * hw.w_q * t_us)
    return np.column_stack([t_ns, eps.real, eps.imag, om.real, om.imag])


WAVEFORM_HEADER = ("t_ns", "eps_re", "eps_im", "omega_re", "omega_im")


def write_waveform_csv(table: np.ndarray, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(WAVEFORM_HEADER)
    for row in table:
        w.writerow([f"{v:.12g}" for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# -- infidelities and costs --------------------------------------------------


def pulse_gate_infidelity(pulse: ChebyshevPulse, target, hw: HardwareConfig, evo: EvolutionConfig, return_leakage: bool = False):
    """Trace infidelity of the projected 2d x 2d block against target (x) 1_2."""
    U = joint_target(target, evo.space)
    block, leakage = project_computational(evolve(pulse, hw, evo), evo.space, joint=True)
    value = trace_infidelity(U, block, dim_norm=2 * evo.space.d)
    return (value, leakage) if return_leakage else value


def pulse_state_infidelity(pulse: ChebyshevPulse, target_state, hw: HardwareConfig, evo: EvolutionConfig) -> float:
    """1 - |(<target| (x) <g|) V |0, g>|^2, sampled at the state-prep resolution."""
    target = ground_state_input(evo.space, target_state)
    V = evolve(pulse, hw, evo, state_prep=True)
    return max(0.0, 1.0 - abs((target.conj().T @ V[:, :1])[0, 0]) ** 2)


class _PulseCost:
    def __init__(self, hw, evo, order, T, Y, X, norm, state_prep, slope_weight):
        self.hw, self.evo, self.order, self.T = hw, evo, order, T
        self.state_prep = state_prep
        self.dt = _resolve_dt(evo, hw, state_prep)
        self.basis, self.h = step_basis(order, T, self.dt, evo.substeps, evo.integrator)
        space = evo.space
        self.Hd = np.ascontiguousarray(hw.chi * np.kron(SIGMA_Z, number(space.N)))
        self.gens = np.ascontiguousarray(_generators(space))
        if evo.frame == "lab":
            X = free_propagator(hw, space, T).conj().T @ X
        self.Y = np.ascontiguousarray(Y, dtype=complex)
        self.X = np.ascontiguousarray(X, dtype=complex)
        self.norm = float(norm)
        self.slope_weight = float(slope_weight)

    @property
    def n_params(self) -> int:
        return ChebyshevPulse.n_params(self.order)

    def params(self, x) -> ChebyshevPulse:
        return ChebyshevPulse.unflatten(x, self.order, self.T)

    def _overlap(self, x, want_grad=True):
        P = np.asarray(x, dtype=float).reshape(4, self.order + 1).T
        amps = _amplitudes(P, self.basis)
        z, gamp, out = _kernels.trotter_value_grad(self.Hd, self.gens, amps, self.h, self.Y, self.X, want_grad)
        # d amps[n, g] / d P[k, g] = 2 pi basis[n, k]
        dz = (TWO_PI * self.basis.T @ gamp).T.ravel() if want_grad else None
        return z, dz, out

    def value_and_grad(self, x):
        z, dz, _ = self._overlap(x)
        value = max(0.0, 1.0 - abs(z) ** 2 / self.norm**2)
        grad = -2.0 * np.real(np.conj(z) * dz) / self.norm**2
        if self.slope_weight > 0:
            pv, pg = _slope_penalty_grad(self.params(x), self.dt, self.hw.slope_limit_mhz_per_ns, self.slope_weight)
            value += pv
            grad = grad + pg
        return value, grad

    def __call__(self, x) -> float:
        return self.value_and_grad(x)[0]

    def infidelity(self, x) -> float:
        z, _, _ = self._overlap(x, want_grad=False)
        return max(0.0, 1.0 - abs(z) ** 2 / self.norm**2)

    def circuit(self, x) -> np.ndarray:
        return evolve(self.params(x), self.hw, self.evo, state_prep=self.state_prep)

    def with_substeps(self, substeps: int) -> "_PulseCost":
        """Same cost integrated with a different substep count."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.evo = replace(self.evo, substeps=substeps)
        clone.basis, clone.h = step_basis(self.order, self.T, self.dt, substeps, self.evo.integrator)
        return clone

    def converged_infidelity(self, x) -> tuple[float, int]:
        """(infidelity, substeps) at the substep count whose halving moves V by < evo.auto_tol."""
        evo = replace(self.evo, auto_substeps=True)
        s = converged_substeps(self.params(x), self.hw, evo, self.state_prep)
        return self.with_substeps(s).infidelity(x), s

    def with_order(self, order: int) -> "_PulseCost":
        """Same cost on a larger Chebyshev basis."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.order = order
        clone.basis, clone.h = step_basis(order, self.T, self.dt, self.evo.substeps, self.evo.integrator)
        return clone


class PulseGateCost(_PulseCost):
    def __init__(self, target, hw: HardwareConfig, evo: EvolutionConfig, order: int, T: float, slope_weight: float = 0.0):
        space = evo.space
        U = joint_target(target, space)
        idx = JointSpace(space).computational_indices()
        Y = np.zeros((2 * space.N, 2 * space.d), dtype=complex)
        Y[idx, np.arange(2 * space.d)] = 1.0
        X = np.zeros_like(Y)
        X[idx] = U
        super().__init__(hw, evo, order, T, Y, X, 2 * space.d, False, slope_weight)
        self.target = np.asarray(target, dtype=complex)

    def leakage(self, x) -> float:
        out = self._overlap(x, want_grad=False)[2]
        idx = JointSpace(self.evo.space).computational_indices()
        return float(max(0.0, 1.0 - np.sum(np.abs(out[idx]) ** 2) / (2 * self.evo.space.d)))


class PulseStateCost(_PulseCost):
    def __init__(self, target_state, hw: HardwareConfig, evo: EvolutionConfig, order: int, T: float, slope_weight: float = 0.0):
        X = ground_state_input(evo.space, target_state)
        super().__init__(hw, evo, order, T, ground_state_input(evo.space), X, 1.0, True, slope_weight)

    def leakage(self, x) -> float:
        out = self._overlap(x, want_grad=False)[2]
        idx = JointSpace(self.evo.space).computational_indices()
        return float(max(0.0, 1.0 - np.sum(np.abs(out[idx]) ** 2)))

