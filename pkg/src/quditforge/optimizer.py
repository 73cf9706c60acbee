"""L-BFGS driver, multi-start, basis growth, curve fitting and statistics."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.optimize
import scipy.stats

from .errors import DegenerateData, InsufficientData, NonFiniteCost


@dataclass(frozen=True)
class OptimizationConfig:
    max_iterations: int = 2000
    gradient: str = "analytic"  # "analytic" or "fd"
    fd_step: float = 1e-7
    ftol: float = 1e-14
    gtol: float = 1e-10
    history: int = 10
    n_starts: int = 1
    seed: int = 0
    record_trajectory: bool = False

    def __post_init__(self):
        if self.gradient not in ("analytic", "fd"):
            raise ValueError(f"gradient must be 'analytic' or 'fd', got {self.gradient!r}")
        for name in ("max_iterations", "fd_step", "ftol", "gtol", "history", "n_starts"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class StartSummary:
    start: int
    seed: int
    fun: float
    nit: int
    status: str
    wall_time: float


@dataclass
class OptimizationResult:
    x: np.ndarray
    fun: float
    nit: int
    seed: int
    status: str = "converged"  # converged | max_iterations | non_finite
    starts: list[StartSummary] = field(default_factory=list)
    trajectory: list[float] | None = None
    best_start: int = 0

    def to_dict(self) -> dict:
        return {
            "x": np.asarray(self.x).tolist(),
            "fun": self.fun,
            "nit": self.nit,
            "seed": self.seed,
            "status": self.status,
            "best_start": self.best_start,
            "starts": [asdict(s) for s in self.starts],
            "trajectory": self.trajectory,
        }


def _value_and_grad_fn(cost, cfg: OptimizationConfig):
    """Return f(x) -> (value, grad) honouring cfg.gradient."""
    has_analytic = hasattr(cost, "value_and_grad")
    value = cost.__call__ if callable(cost) else None
    if cfg.gradient == "analytic" and has_analytic:
        return cost.value_and_grad
    if value is None:
        raise TypeError("cost must be callable")

    def fd(x):
        return value(x), central_difference(value, x, cfg.fd_step)

    return fd


def central_difference(f, x, rel_step: float = 1e-7) -> np.ndarray:
    """Central differences with step rel_step * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def lbfgs_minimize(cost, init, cfg: OptimizationConfig = OptimizationConfig(), seed: int | None = None) -> OptimizationResult:
    """Minimize ``cost`` from ``init`` with L-BFGS-B (Wolfe line search).

    ``cost`` is a callable, optionally exposing ``value_and_grad``.
    Raises NonFiniteCost when the cost is not finite at ``init``.
    """
    x0 = np.asarray(init, dtype=float).copy()
    fg = _value_and_grad_fn(cost, cfg)
    f0, g0 = fg(x0)
    if not np.isfinite(f0) or not np.all(np.isfinite(g0)):
        raise NonFiniteCost(f"cost is not finite at the initial point ({f0})")

    best = {"f": float(f0), "x": x0.copy(), "bad": False}
    trajectory = [float(f0)] if cfg.record_trajectory else None

    def wrapped(x):
        f, g = fg(x)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            best["bad"] = True
            raise NonFiniteCost("cost became non-finite during optimization")
        if f < best["f"]:
            best["f"], best["x"] = float(f), x.copy()
        return f, g

    def callback(xk):
        if trajectory is not None:
            trajectory.append(best["f"])

    options = dict(maxiter=cfg.max_iterations, maxcor=cfg.history, ftol=cfg.ftol, gtol=cfg.gtol, maxfun=20 * cfg.max_iterations)
    status = "converged"
    nit = 0
    try:
        res = scipy.optimize.minimize(wrapped, x0, jac=True, method="L-BFGS-B", callback=callback, options=options)
        nit = int(res.nit)
        x = res.x if res.fun <= best["f"] else best["x"]
        if nit >= cfg.max_iterations:
            status = "max_iterations"
    except NonFiniteCost:
        x = best["x"]
        status = "non_finite"
    # Report cost(best) re-evaluated so the stored value is reproducible.
    fun = float(fg(x)[0])
    return OptimizationResult(np.asarray(x), fun, nit, cfg.seed if seed is None else seed, status, trajectory=trajectory)


def multi_start(cost, sampler, n: int, cfg: OptimizationConfig = OptimizationConfig(), stop_below: float | None = None) -> OptimizationResult:
    """Best of ``n`` L-BFGS runs started from ``sampler(seed + i)``.

    Ties go to the lowest start index.  ``stop_below`` ends the loop as
    soon as a start reaches that cost (the remaining starts are skipped and
    not recorded).
    """
    if n < 1:
        raise ValueError("need at least one start")
    best: OptimizationResult | None = None
    summaries = []
    for i in range(n):
        seed = cfg.seed + i
        t0 = time.perf_counter()
        try:
            res = lbfgs_minimize(cost, sampler(seed), cfg, seed=seed)
        except NonFiniteCost:
            summaries.append(StartSummary(i, seed, float("nan"), 0, "non_finite", time.perf_counter() - t0))
            continue
        summaries.append(StartSummary(i, seed, res.fun, res.nit, res.status, time.perf_counter() - t0))
        if best is None or res.fun < best.fun:
            best = res
            best.best_start = i
        if stop_below is not None and res.fun < stop_below:
            break
    if best is None:
        raise NonFiniteCost("every start produced a non-finite cost")
    best.starts = summaries
    return best


@dataclass(frozen=True)
class GrowthSchedule:
    """Start at ``initial_order``; each batch (added, after) adds terms after ``after`` iterations."""

    initial_order: int
    batches: tuple[tuple[int, int], ...] = ()

    @property
    def final_order(self) -> int:
        return self.initial_order + sum(a for a, _ in self.batches)

    def orders(self) -> list[int]:
        out = [self.initial_order]
        for added, _ in self.batches:
            out.append(out[-1] + added)
        return out

    @classmethod
    def quoctit(cls) -> "GrowthSchedule":
        return cls(32, ((8, 500), (5, 500), (5, 500)))


def grow_basis_minimize(cost_family, schedule: GrowthSchedule, init, cfg: OptimizationConfig = OptimizationConfig(), embed=None) -> OptimizationResult:
    """Warm-started optimizations over a growing basis.

    ``cost_family(order)`` returns the cost at that order; ``embed(x, old, new)``
    maps parameters into the larger basis with new terms at zero.
    """
    if embed is None:
        from .pulse_control import embed_coefficients as embed
    orders = schedule.orders()
    x = np.asarray(init, dtype=float)
    total_nit = 0
    trajectory = [] if cfg.record_trajectory else None
    res = None
    for stage, order in enumerate(orders):
        if stage > 0:
            x = embed(x, orders[stage - 1], order)
        last = stage == len(orders) - 1
        iters = cfg.max_iterations if last else schedule.batches[stage][1]
        stage_cfg = OptimizationConfig(**{**asdict(cfg), "max_iterations": iters})
        res = lbfgs_minimize(cost_family(order), x, stage_cfg)
        x = res.x
        total_nit += res.nit
        if trajectory is not None:
            trajectory.extend(res.trajectory or [])
    res.nit = total_nit
    res.trajectory = trajectory
    return res


def fit_fidelity_curve(points) -> tuple[float, float, np.ndarray]:
    """Fit log(1 - F) = -c (B/d)^gamma by Levenberg-Marquardt.

    ``points`` holds (B, d, F) triples.  Returns (c, gamma, covariance).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    x = pts[:, 0] / pts[:, 1]
    F = pts[:, 2]
    if np.any(F <= 0) or np.any(F >= 1):
        raise ValueError("fidelities must lie strictly inside (0, 1)")
    if np.unique(x).size < 3:
        raise DegenerateData("need at least three distinct B/d values")
    y = np.log(1.0 - F)
    slope, intercept = np.polyfit(np.log(x), np.log(-y), 1)
    p0 = np.array([np.exp(intercept), slope])

    def resid(p):
        return y + p[0] * x ** p[1]

    res = scipy.optimize.least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    J = res.jac
    dof = max(1, x.size - 2)
    s2 = float(res.fun @ res.fun) / dof
    try:
        cov = s2 * np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError as exc:
        raise DegenerateData("singular Jacobian in curve fit") from exc
    return float(res.x[0]), float(res.x[1]), cov


def pearson_correlation_matrix(samples) -> np.ndarray:
    """Correlation between parameter columns; NaN rows/columns mark zero variance."""
    X = np.asarray(samples, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientData("need at least two samples")
    Xc = X - X.mean(axis=0)
    std = np.sqrt(np.sum(Xc**2, axis=0))
    ok = std > 0
    out = np.full((X.shape[1], X.shape[1]), np.nan)
    Z = Xc[:, ok] / std[ok]
    R = np.clip(Z.T @ Z, -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    out[np.ix_(ok, ok)] = R
    return out


def welch_t_test(a, b) -> tuple[float, float]:
    """Two-sided Welch t-test; returns (t, p)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise InsufficientData("each sample needs at least two values")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0 and vb == 0:
        diff = a.mean() - b.mean()
        if diff == 0:
            return 0.0, 1.0
        return float(np.copysign(np.inf, diff)), 0.0
    t, p = scipy.stats.ttest_ind(a, b, equal_var=False)
    return float(t), float(p)


def init_samplers(ansatz: str, d: int, size: int, seed: int, complex_alpha: bool | None = None) -> np.ndarray:
    """Random initial vector for 'snapd', 'ecd' or 'pulse'.

    ``size`` is the block count B, or the Chebyshev order for pulses.
    """
    rng = np.random.default_rng(seed)
    if ansatz == "snapd":
        n_alpha = (size + 1) * (2 if complex_alpha else 1)
        return np.concatenate([rng.normal(0.0, 0.5, n_alpha), rng.uniform(-np.pi, np.pi, size * d)])
    if ansatz == "ecd":
        cplx = True if complex_alpha is None else complex_alpha
        n_alpha = size * (2 if cplx else 1)
        return np.concatenate([rng.normal(0.0, 1.0, n_alpha), rng.uniform(-np.pi, np.pi, 2 * (size + 1))])
    if ansatz == "pulse":
        return rng.normal(0.0, 1.0, 4 * (size + 1))
    raise ValueError(f"unknown ansatz {ansatz!r}")


def sampler_for(ansatz: str, d: int, size: int, complex_alpha: bool | None = None):
    """Seed -> initial vector closure for multi_start."""
    return lambda seed: init_samplers(ansatz, d, size, seed, complex_alpha)
