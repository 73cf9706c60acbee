"""Time cost-plus-gradient evaluations under the numba and numpy backends.

Each backend runs in its own interpreter because the switch is read at
import time.  Usage::

    python benchmarks/bench_kernels.py [--repeats 20] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CASES = [
    # (label, ansatz, d, size, options)
    ("snapd d=6 B=5", "snapd", 6, 5, {}),
    ("snapd d=8 B=8", "snapd", 8, 8, {}),
    ("ecd d=6 B=36", "ecd", 6, 36, {}),
    ("pulse d=4 order=18", "pulse", 4, 18, {}),
    ("pulse d=6 order=30", "pulse", 6, 30, {}),
]

_WORKER = r"""
import json, sys, time
import numpy as np
from quditforge import _accel
from quditforge.experiments import make_cost

cases, repeats = json.loads(sys.argv[1]), int(sys.argv[2])
out = {"backend": _accel.backend_name(), "timings": {}}
for label, ansatz, d, size, opts in cases:
    cost = make_cost(ansatz, d, "X(0,1)", size, options=opts)
    x = np.random.default_rng(0).normal(0, 0.3, cost.n_params)
    cost.value_and_grad(x)  # compile / warm caches
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        cost.value_and_grad(x)
        samples.append(time.perf_counter() - t0)
    out["timings"][label] = float(np.median(samples))
print(json.dumps(out))
"""


def run_backend(flag: str, repeats: int) -> dict:
    env = dict(os.environ, QUDITFORGE_NUMBA=flag)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps(CASES), str(repeats)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--json", help="write raw timings here")
    args = ap.parse_args(argv)

    fast = run_backend("1", args.repeats)
    slow = run_backend("0", args.repeats)
    print(f"{'case':<22}{fast['backend'] + ' ms':>12}{slow['backend'] + ' ms':>12}{'speedup':>10}")
    for label, *_ in CASES:
        a, b = fast["timings"][label] * 1e3, slow["timings"][label] * 1e3
        print(f"{label:<22}{a:>12.2f}{b:>12.2f}{b / a:>9.2f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"fast": fast, "slow": slow, "repeats": args.repeats}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
