"""Command line entry point: ``quditforge <command> [options]``.

Exit codes: 0 on success, 1 on usage errors, 2 when any run failed.
Config files are YAML mappings whose keys mirror the command options
(experiment configs mirror ``ExperimentSpec`` fields).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .errors import QuditForgeError
from .experiments import (
    EXPERIMENTS,
    ExperimentSpec,
    NoiseSpec,
    infidelity_of,
    make_cost,
    noise_sweep,
    run_experiment,
)
from .lgt_targets import gate_target
from .optimizer import (
    OptimizationConfig,
    fit_fidelity_curve,
    multi_start,
    pearson_correlation_matrix,
    sampler_for,
    welch_t_test,
)
from .pulse_control import HardwareConfig, lab_frame_export, write_waveform_csv
from .serialization import dump_json, load_json, matrix_to_dict, params_from_dict

log = logging.getLogger("quditforge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_config(path) -> dict:
    if path is None:
        return {}
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    return data


def _merge(args, config: dict, keys) -> dict:
    """Command-line values override config values; None means unset."""
    out = {k: config[k] for k in keys if k in config}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands -------------------------------------------------------------------


def cmd_target(args, config) -> int:
    opts = _merge(args, config, ("name", "d"))
    if "name" not in opts or "d" not in opts:
        raise UsageError("target needs --name and --d")
    U = gate_target(str(opts["name"]), int(opts["d"]))
    payload = matrix_to_dict(U)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        dump_json(payload, path)
    else:
        print(json.dumps(payload))
    return 0


def _optimize(args, config, ansatz_default):
    keys = ("ansatz", "d", "target", "size", "starts", "n_guard", "max_iterations", "kind", "T_us", "complex_alpha")
    opts = _merge(args, config, keys)
    ansatz = opts.get("ansatz", ansatz_default)
    for k in ("d", "target", "size"):
        if k not in opts:
            raise UsageError(f"missing required option --{k}")
    d, size = int(opts["d"]), int(opts["size"])
    extra = {k: opts[k] for k in ("T_us", "complex_alpha") if k in opts}
    cost = make_cost(ansatz, d, str(opts["target"]), size, opts.get("n_guard"), opts.get("kind", "gate"), extra)
    cfg = OptimizationConfig(max_iterations=int(opts.get("max_iterations", 2000)), seed=args.seed)
    cplx = extra.get("complex_alpha") if ansatz != "pulse" else None
    res = multi_start(cost, sampler_for(ansatz, d, size, cplx), int(opts.get("starts", 1)), cfg)
    params = cost.params(res.x)
    record = {
        "ansatz": ansatz,
        "d": d,
        "target": opts["target"],
        "size": size,
        "infidelity": float(infidelity_of(cost)(res.x)),
        "leakage": float(cost.leakage(res.x)),
        "params": params.to_dict(),
        "optimization": res.to_dict(),
    }
    return record, params


def cmd_decompose(args, config) -> int:
    record, _ = _optimize(args, config, "snapd")
    dump_json(record, _out_dir(args) / "decomposition.json")
    print(f"{record['ansatz']} d={record['d']} {record['target']} size={record['size']}: infidelity {record['infidelity']:.3e}")
    return 0 if record["optimization"]["status"] != "non_finite" else 2


def cmd_pulse(args, config) -> int:
    args.ansatz = "pulse"
    record, pulse = _optimize(args, config, "pulse")
    out = _out_dir(args)
    dump_json(record, out / "pulse.json")
    rate = float(config.get("sample_rate_gsps", args.sample_rate or 20.0))
    write_waveform_csv(lab_frame_export(pulse, HardwareConfig(), rate), out / "waveform.csv")
    print(f"pulse d={record['d']} {record['target']} order={record['size']}: infidelity {record['infidelity']:.3e}")
    return 0


def cmd_experiment(args, config) -> int:
    data = dict(config)
    if args.name:
        data["name"] = args.name
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out:
        data["out_dir"] = args.out
    if "name" not in data:
        raise UsageError(f"experiment name required; one of {', '.join(EXPERIMENTS)}")
    spec = ExperimentSpec.from_dict(data)
    out, manifest = run_experiment(spec, threads=args.threads)
    print(f"{spec.name}: {manifest['n_runs']} runs, {len(manifest['failures'])} failed -> {out}")
    return 2 if manifest["failures"] else 0


def cmd_noise(args, config) -> int:
    if not args.params:
        raise UsageError("noise needs --params <json>")
    record = load_json(args.params)
    p = params_from_dict(record.get("params", record))
    target = args.target or record.get("target") or config.get("target")
    if target is None:
        raise UsageError("noise needs a target (--target or in the params file)")
    ansatz = p.to_dict()["ansatz"]
    size = getattr(p, "B", None) or getattr(p, "order", None)
    n_guard = config.get("n_guard")
    extra = {"T_us": p.T} if ansatz == "pulse" else {}
    if ansatz == "snapd":
        extra["complex_alpha"] = p.complex_alpha
    cost = make_cost(ansatz, p.d if ansatz != "pulse" else int(record["d"]), target, size, n_guard, "gate", extra)
    x = p.flatten()
    nkeys = {k: config[k] for k in ("betas", "samples", "mode") if k in config}
    if "betas" in nkeys:
        nkeys["betas"] = tuple(float(b) for b in nkeys["betas"])
    rows = noise_sweep(x, infidelity_of(cost), NoiseSpec(**nkeys), seed=args.seed or 0)
    out = _out_dir(args) / "noise.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("beta", "sample", "infidelity"))
        w.writerows([(b, s, repr(v)) for b, s, v in rows])
    print(f"{len(rows)} rows -> {out}")
    return 0


def cmd_fit(args, config) -> int:
    if not args.csv:
        raise UsageError("fit needs --csv with columns B_or_order, d, infidelity")
    pts = []
    with open(args.csv) as fh:
        for row in csv.DictReader(fh):
            inf = float(row["infidelity"])
            if np.isfinite(inf) and inf < 1:
                pts.append((float(row.get("B_or_order", row.get("B"))), float(row["d"]), 1.0 - max(inf, 1e-16)))
    c, gamma, cov = fit_fidelity_curve(pts)
    payload = {"c": c, "gamma": gamma, "covariance": cov.tolist(), "n_points": len(pts)}
    if args.out:
        dump_json(payload, _out_dir(args) / "fit.json")
    print(json.dumps(payload))
    return 0


def cmd_stats(args, config) -> int:
    if args.ttest:
        a, b = (np.loadtxt(f, delimiter=",", ndmin=1) for f in args.ttest)
        t, p = welch_t_test(a, b)
        print(json.dumps({"t": t, "p": p}))
        return 0
    if not args.csv:
        raise UsageError("stats needs --csv (sample matrix) or --ttest A B")
    X = np.loadtxt(args.csv, delimiter=",", skiprows=1, ndmin=2)
    R = pearson_correlation_matrix(X)
    if args.out:
        np.savetxt(_out_dir(args) / "correlation.csv", R, delimiter=",")
    else:
        np.savetxt(sys.stdout, R, delimiter=",", fmt="%.6f")
    return 0


COMMANDS = {
    "target": cmd_target,
    "decompose": cmd_decompose,
    "pulse": cmd_pulse,
    "experiment": cmd_experiment,
    "noise": cmd_noise,
    "fit": cmd_fit,
    "stats": cmd_stats,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with option values")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output directory (file for `target`)")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default QUDITFORGE_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="quditforge", description="Cavity qudit gate synthesis toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    t = sub.add_parser("target", parents=[common], help="write a target unitary as JSON")
    t.add_argument("--name")
    t.add_argument("--d", type=int)

    for name, ansatz in (("decompose", True), ("pulse", False)):
        s = sub.add_parser(name, parents=[common], help=f"{name} a target")
        if ansatz:
            s.add_argument("--ansatz", choices=("snapd", "ecd"))
        else:
            s.add_argument("--sample-rate", type=float, dest="sample_rate", help="export rate in GS/s")
        s.add_argument("--d", type=int)
        s.add_argument("--target")
        s.add_argument("--size", type=int, help="blocks B, or Chebyshev order")
        s.add_argument("--starts", type=int)
        s.add_argument("--n-guard", type=int, dest="n_guard")
        s.add_argument("--max-iterations", type=int, dest="max_iterations")
        s.add_argument("--kind", choices=("gate", "state"))
        s.add_argument("--T-us", type=float, dest="T_us")

    e = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    e.add_argument("name", nargs="?", choices=EXPERIMENTS)

    n = sub.add_parser("noise", parents=[common], help="perturbation sweep of saved parameters")
    n.add_argument("--params")
    n.add_argument("--target")

    f = sub.add_parser("fit", parents=[common], help="fit log(1-F) = -c (B/d)^gamma")
    f.add_argument("--csv")

    st = sub.add_parser("stats", parents=[common], help="correlation matrix or Welch t-test")
    st.add_argument("--csv")
    st.add_argument("--ttest", nargs=2, metavar=("A", "B"))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args.config)
        if args.seed is None:
            args.seed = int(config.get("seed", 0))
        return COMMANDS[args.command](args, config)
    except (UsageError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"quditforge: error: {exc}", file=sys.stderr)
        return 1
    except (QuditForgeError, ValueError) as exc:
        print(f"quditforge: run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
