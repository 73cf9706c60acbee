"""Experiment orchestration: scans, permutation study, statistics, noise, budgets.

Every experiment expands into independent cells (target, ansatz, size,
start).  Cell seeds come from ``SeedSequence([seed, cell_index])`` so the
result of a cell never depends on scheduling order.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _accel
from .errors import QuditForgeError
from .gateset_ecd import ECDGateCost, ECDStateCost
from .gateset_snapd import SnapDGateCost, SnapDStateCost
from .lgt_targets import (
    adjacent_transposition_distance,
    gate_target,
    kendall_from_identity,
    permutation_matrix,
    state_target,
)
from .operator_core import FockSpace, diff_norm_infidelity, one_minus_norm_infidelity, trace_infidelity
from .optimizer import (
    OptimizationConfig,
    fit_fidelity_curve,
    init_samplers,
    lbfgs_minimize,
    multi_start,
    pearson_correlation_matrix,
    sampler_for,
    welch_t_test,
)
from .pulse_control import EvolutionConfig, HardwareConfig, PulseGateCost, PulseStateCost
from .serialization import dump_json

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("d", "target", "ansatz", "B_or_order", "start", "seed", "infidelity", "leakage", "wall_time")
EXPERIMENTS = ("compare-cost", "stateprep-scan", "gate-scan", "perm-study", "param-stats", "noise-sweep", "budget-table")


# -- small arithmetic helpers ------------------------------------------------


def break_even_dimension(t_snapd: float, t_ecd: float) -> float:
    """sqrt(t_snapd / t_ecd): where a d^2-scaling ECD sequence matches fixed-B S+D."""
    if t_snapd <= 0 or t_ecd <= 0:
        raise ValueError("gate times must be positive")
    return math.sqrt(t_snapd / t_ecd)


def gate_budget(t1_budget: float, block_time: float, blocks: int) -> int:
    """Number of B-block gates that fit in ``t1_budget`` (same time unit)."""
    if t1_budget <= 0 or block_time <= 0 or blocks <= 0:
        raise ValueError("inputs must be positive")
    return int(math.floor(t1_budget / (block_time * blocks) * (1 + 1e-12)))


# -- noise --------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    betas: tuple[float, ...] = tuple(np.logspace(-6, -1, 6))
    samples: int = 50
    mode: str = "relative-gaussian"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if any(b < 0 for b in self.betas):
            raise ValueError("betas must be non-negative")
        if self.mode not in ("relative-gaussian", "pdf-literal"):
            raise ValueError(f"unknown noise mode {self.mode!r}")


def perturb_parameters(params, beta: float, mode: str = "relative-gaussian", seed=0) -> np.ndarray:
    """Perturb every nonzero entry with a scale proportional to its magnitude.

    relative-gaussian: a -> a + N(0, (beta |a|)^2).
    pdf-literal: a -> a + g(x), g the N(0, (beta |a|)^2) density and x drawn
    from that same distribution.  Zero entries are never touched.
    """
    x = np.asarray(params, dtype=float).copy()
    if beta < 0:
        raise ValueError("beta must be non-negative")
    rng = np.random.default_rng(seed)
    sigma = beta * np.abs(x)
    mask = x != 0
    if mode == "relative-gaussian":
        if beta == 0:
            return x
        x[mask] += rng.normal(0.0, sigma[mask])
        return x
    if mode == "pdf-literal":
        if beta == 0:
            raise ValueError("pdf-literal mode diverges at beta = 0")
        s = sigma[mask]
        draw = rng.normal(0.0, s)
        x[mask] += np.exp(-0.5 * (draw / s) ** 2) / (s * math.sqrt(2 * math.pi))
        return x
    raise ValueError(f"unknown noise mode {mode!r}")


def noise_sweep(params, infidelity, spec: NoiseSpec = NoiseSpec(), seed: int = 0) -> list[tuple[float, int, float]]:
    """Rows (beta, sample, infidelity) for perturbed copies of ``params``.

    ``infidelity`` maps a flat parameter vector to the infidelity against
    the fixed target.
    """
    rows = []
    for bi, beta in enumerate(spec.betas):
        for s in range(spec.samples):
            ss = np.random.SeedSequence([seed, bi, s])
            x = perturb_parameters(params, beta, spec.mode, ss)
            rows.append((float(beta), s, float(infidelity(x))))
    return rows


# -- cost construction ---------------------------------------------------------


def make_cost(ansatz: str, d: int, target: str, size: int, n_guard=None, kind: str = "gate", options: dict | None = None):
    """Cost object for a named target.

    ``kind`` is 'gate' or 'state'; ``size`` is B or the Chebyshev order.
    Recognised options: complex_alpha, T_us, dt_ns, substeps, chi_mhz.
    """
    options = dict(options or {})
    space = FockSpace(d, n_guard)
    if ansatz == "snapd":
        cplx = bool(options.get("complex_alpha", False))
        if kind == "gate":
            return SnapDGateCost(gate_target(target, d), space, size, complex_alpha=cplx)
        return SnapDStateCost(state_target(target, space), space, size, complex_alpha=cplx)
    if ansatz == "ecd":
        cplx = bool(options.get("complex_alpha", True))
        if kind == "gate":
            return ECDGateCost(gate_target(target, d), space, size, complex_alpha=cplx)
        return ECDStateCost(state_target(target, space), space, size, complex_alpha=cplx)
    if ansatz == "pulse":
        hw = HardwareConfig(chi_mhz=float(options.get("chi_mhz", 0.3)))
        dt = options.get("dt_ns")
        evo = EvolutionConfig(space, substeps=int(options.get("substeps", 4)), dt_us=None if dt is None else 1e-3 * float(dt))
        T = float(options.get("T_us", 0.5 if kind == "gate" else 0.1))
        if kind == "gate":
            return PulseGateCost(gate_target(target, d), hw, evo, size, T)
        return PulseStateCost(state_target(target, space), hw, evo, size, T)
    raise ValueError(f"unknown ansatz {ansatz!r}")


def infidelity_of(cost):
    """Plain infidelity (no penalties) as a function of the flat vector."""
    return getattr(cost, "infidelity", cost)


def _complex_flag(ansatz, options):
    if ansatz == "snapd":
        return bool(options.get("complex_alpha", False))
    if ansatz == "ecd":
        return bool(options.get("complex_alpha", True))
    return None


# -- experiment spec and cells -------------------------------------------------


@dataclass
class ExperimentSpec:
    name: str
    dims: list[int] = field(default_factory=lambda: [4])
    targets: list[str] = field(default_factory=lambda: ["X(2,3)"])
    ansatz: list[str] = field(default_factory=lambda: ["snapd"])
    sizes: list[int] = field(default_factory=lambda: [1, 2, 3])
    n_starts: int = 1
    seed: int = 0
    out_dir: str = "quditforge-out"
    n_guard: int | None = None
    max_iterations: int = 2000
    options: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.name != "budget-table" and (not self.dims or not self.sizes or not self.ansatz):
            raise ValueError("dims, sizes and ansatz must be non-empty")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(**data)

    def config_hash(self) -> str:
        """Hash of everything that affects results (the output location does not)."""
        data = asdict(self)
        data.pop("out_dir")
        blob = json.dumps(data, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def cell_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _run_cell(cell: dict) -> dict:
    """Optimize one (d, target, ansatz, size, start) cell; never raises."""
    t0 = time.perf_counter()
    row = {k: cell[k] for k in ("d", "target", "ansatz", "B_or_order", "start", "seed")}
    try:
        cost = make_cost(cell["ansatz"], cell["d"], cell["target"], cell["B_or_order"], cell["n_guard"], cell["kind"], cell["options"])
        x0 = init_samplers(cell["ansatz"], cell["d"], cell["B_or_order"], cell["seed"], _complex_flag(cell["ansatz"], cell["options"]))
        cfg = OptimizationConfig(max_iterations=cell["max_iterations"], seed=cell["seed"])
        res = lbfgs_minimize(_wrap_metric(cost, cell.get("metric", "trace")), x0, cfg)
        row["infidelity"] = float(infidelity_of(cost)(res.x))
        row["leakage"] = float(cost.leakage(res.x))
        row["params"] = res.x.tolist()
        row["status"] = res.status
        row["error"] = None
    except (QuditForgeError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        row.update(infidelity=float("nan"), leakage=float("nan"), params=None, status="failed", error=repr(exc))
    row["wall_time"] = time.perf_counter() - t0
    return row


def _wrap_metric(cost, metric: str):
    """Cost to minimise: the trace cost itself or a spectral-norm variant (FD gradient)."""
    if metric == "trace":
        return cost
    d = cost.space.d
    U = cost.target
    fn = {"one_minus_norm": one_minus_norm_infidelity, "diff_norm": diff_norm_infidelity}[metric]

    def value(x):
        block = cost._overlap(x)[2][:d]
        return fn(U, block)

    return value


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("QUDITFORGE_THREADS", "1"))
    return max(1, threads)


def _map(cells, threads):
    if threads <= 1 or len(cells) <= 1:
        return [_run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_cell, cells, chunksize=1))


def _cells(spec: ExperimentSpec, kind: str, targets, dims=None, metric="trace", start_index=0):
    cells = []
    idx = start_index
    for d, target, ansatz, size, start in itertools.product(dims or spec.dims, targets, spec.ansatz, spec.sizes, range(spec.n_starts)):
        cells.append(
            dict(
                d=d, target=target, ansatz=ansatz, B_or_order=size, start=start,
                seed=cell_seed(spec.seed, idx), n_guard=spec.n_guard, kind=kind,
                options=spec.options, max_iterations=spec.max_iterations, metric=metric,
            )
        )
        idx += 1
    return cells


def write_results_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([r[c] if not isinstance(r[c], float) else repr(r[c]) for c in RESULT_COLUMNS])


def _write_runs(rows, out: Path) -> None:
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(rows):
        dump_json(r, runs / f"run_{i:05d}.json")


def _all_permutations(d: int, limit: int | None, seed: int):
    perms = list(itertools.permutations(range(d)))
    if limit is None or len(perms) <= limit:
        return perms
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(perms), size=limit, replace=False)
    return [perms[i] for i in sorted(pick)]


def _perm_name(p) -> str:
    return "perm(" + ",".join(map(str, p)) + ")"


# -- experiment bodies ----------------------------------------------------------


def _exp_scan(spec, kind, out, threads):
    rows = _map(_cells(spec, kind, spec.targets), threads)
    return rows, {}


def _exp_compare_cost(spec, out, threads):
    rows = []
    for m, metric in enumerate(("trace", "one_minus_norm", "diff_norm")):
        cells = _cells(spec, "gate", spec.targets, metric=metric, start_index=m * 10**6)
        for r in _map(cells, threads):
            r["ansatz"] = f"{r['ansatz']}:{metric}"
            rows.append(r)
    return rows, {}


def _exp_perm_study(spec, out, threads):
    limit = int(spec.options.get("max_permutations", 100))
    full_upto = int(spec.options.get("all_permutations_upto", 4))
    targets_by_d = {
        d: [_perm_name(p) for p in _all_permutations(d, None if d <= full_upto else limit, spec.seed)]
        for d in spec.dims
    }
    rows = []
    offset = 0
    for d in spec.dims:
        cells = _cells(spec, "gate", targets_by_d[d], dims=[d], start_index=offset)
        offset += len(cells)
        rows.extend(_map(cells, threads))
    # best-of-starts fidelity per (d, permutation, B)
    best: dict = {}
    for r in rows:
        if r["status"] == "failed":
            continue
        key = (r["d"], r["target"], r["B_or_order"])
        best[key] = min(best.get(key, np.inf), r["infidelity"])
    floor = float(spec.options.get("infidelity_floor", 1e-16))
    summary = []
    for (d, name, B), inf in sorted(best.items()):
        p = tuple(int(v) for v in name[5:-1].split(","))
        summary.append(dict(d=d, target=name, B=B, kendall=kendall_from_identity(p), inversions=adjacent_transposition_distance(p), best_infidelity=inf))
    with open(out / "perm_summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary[0]) if summary else ["d"])
        w.writeheader()
        w.writerows(summary)
    extra = {}
    pts = [(s["B"], s["d"], 1.0 - max(s["best_infidelity"], floor)) for s in summary if s["best_infidelity"] < 1]
    try:
        c, gamma, cov = fit_fidelity_curve(pts)
        extra["fit"] = {"c": c, "gamma": gamma, "covariance": cov.tolist(), "n_points": len(pts)}
    except (QuditForgeError, ValueError) as exc:
        extra["fit"] = {"error": repr(exc)}
    dump_json(extra["fit"], out / "fit.json")
    return rows, extra


def _exp_param_stats(spec, out, threads):
    threshold = float(spec.options.get("threshold", 1e-5))
    shared = bool(spec.options.get("shared_init", False))
    rows = []
    for t_i, target in enumerate(spec.targets):
        cells = _cells(spec, "gate", [target], start_index=0 if shared else t_i * 10**6)
        rows.extend(_map(cells, threads))
    extra = {"threshold": threshold, "groups": {}}
    for target, ansatz, size in itertools.product(spec.targets, spec.ansatz, spec.sizes):
        sel = [r for r in rows if r["target"] == target and r["ansatz"] == ansatz and r["B_or_order"] == size and r["params"] is not None]
        if not sel:
            continue
        P = np.array([r["params"] for r in sel])
        I = np.array([r["infidelity"] for r in sel])
        tag = f"{ansatz}_{size}_{_slug(target)}"
        np.savetxt(out / f"params_{tag}.csv", np.column_stack([I, P]), delimiter=",", header="infidelity," + ",".join(f"p{i}" for i in range(P.shape[1])), comments="")
        group = {}
        for label, mask in (("good", I <= threshold), ("bad", I > threshold)):
            group[label] = int(mask.sum())
            if mask.sum() >= 2:
                R = pearson_correlation_matrix(P[mask])
                np.savetxt(out / f"corr_{label}_{tag}.csv", R, delimiter=",")
        good, bad = P[I <= threshold], P[I > threshold]
        if len(good) >= 2 and len(bad) >= 2:
            tests = [welch_t_test(good[:, j], bad[:, j]) for j in range(P.shape[1])]
            np.savetxt(out / f"ttest_{tag}.csv", np.array(tests), delimiter=",", header="t,p", comments="")
        extra["groups"][tag] = group
    return rows, extra


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in text).strip("_")


def _exp_noise_sweep(spec, out, threads):
    """Optimize one reference circuit per (d, target, ansatz, size), then sweep."""
    nspec = NoiseSpec(**{k: (tuple(v) if k == "betas" else v) for k, v in spec.noise.items()})
    rows = []
    noise_rows = []
    for i, (d, target, ansatz, size) in enumerate(itertools.product(spec.dims, spec.targets, spec.ansatz, spec.sizes)):
        cost = make_cost(ansatz, d, target, size, spec.n_guard, "gate", spec.options)
        cfg = OptimizationConfig(max_iterations=spec.max_iterations, seed=cell_seed(spec.seed, i))
        t0 = time.perf_counter()
        res = multi_start(cost, sampler_for(ansatz, d, size, _complex_flag(ansatz, spec.options)), spec.n_starts, cfg)
        inf = infidelity_of(cost)
        rows.append(dict(d=d, target=target, ansatz=ansatz, B_or_order=size, start=res.best_start, seed=res.seed,
                         infidelity=float(inf(res.x)), leakage=float(cost.leakage(res.x)), params=res.x.tolist(),
                         status=res.status, error=None, wall_time=time.perf_counter() - t0))
        for beta, s, val in noise_sweep(res.x, inf, nspec, seed=cell_seed(spec.seed, 10**6 + i)):
            noise_rows.append((d, target, ansatz, size, beta, s, val))
    with open(out / "noise.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("d", "target", "ansatz", "B_or_order", "beta", "sample", "infidelity"))
        w.writerows([r[:5] + (r[5], repr(r[6])) for r in noise_rows])
    return rows, {"noise_rows": len(noise_rows)}


def budget_table(t1_budget_us: float = 10_000.0, t_snap: float = 1.0, t_ecd: float = 0.2, blocks=(1, 2, 4, 8, 16, 32, 64)):
    """Rows (ansatz, blocks, block_time_us, max_gates)."""
    rows = []
    for ansatz, bt in (("snapd", t_snap), ("ecd", t_ecd)):
        for b in blocks:
            rows.append((ansatz, b, bt, gate_budget(t1_budget_us, bt, b)))
    return rows


def _exp_budget_table(spec, out, threads):
    o = spec.options
    rows = budget_table(float(o.get("t1_budget_us", 10_000.0)), float(o.get("t_snap_us", 1.0)), float(o.get("t_ecd_us", 0.2)), tuple(o.get("blocks", (1, 2, 4, 8, 16, 32, 64))))
    with open(out / "budget.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("ansatz", "blocks", "block_time_us", "max_gates"))
        w.writerows(rows)
    ranges = {
        "t_snap_us": [1.0, 50.0],
        "t_ecd_us": [0.1, 0.5],
    }
    be = {
        "low": break_even_dimension(ranges["t_snap_us"][0], ranges["t_ecd_us"][1]),
        "high": break_even_dimension(ranges["t_snap_us"][1], ranges["t_ecd_us"][0]),
    }
    dump_json({"break_even_dimension": be, "ranges": ranges}, out / "break_even.json")
    return [], {"break_even": be}


_BODIES = {
    "compare-cost": _exp_compare_cost,
    "stateprep-scan": lambda s, o, t: _exp_scan(s, "state", o, t),
    "gate-scan": lambda s, o, t: _exp_scan(s, "gate", o, t),
    "perm-study": _exp_perm_study,
    "param-stats": _exp_param_stats,
    "noise-sweep": _exp_noise_sweep,
    "budget-table": _exp_budget_table,
}


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> tuple[Path, dict]:
    """Run ``spec`` and write results.csv, runs/*.json and manifest.json.

    Returns (output directory, manifest).  Per-run failures are recorded in
    the manifest and never abort the batch.
    """
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows, extra = _BODIES[spec.name](spec, out, _threads(threads))
    if spec.name != "budget-table":
        write_results_csv(rows, out / "results.csv")
        _write_runs(rows, out)
    failures = [{"index": i, "error": r["error"]} for i, r in enumerate(rows) if r.get("status") == "failed"]
    manifest = {
        "experiment": spec.name,
        "spec": asdict(spec),
        "config_hash": spec.config_hash(),
        "n_runs": len(rows),
        "failures": failures,
        "backend": _accel.backend_name(),
        "wall_time": time.perf_counter() - t0,
        **{k: v for k, v in extra.items() if k != "noise_rows"},
    }
    dump_json(manifest, out / "manifest.json")
    log.info("%s: %d runs, %d failures -> %s", spec.name, len(rows), len(failures), out)
    return out, manifest
