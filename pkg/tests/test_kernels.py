import json
import os
import subprocess
import sys

import numpy as np
import pytest

from quditforge import _accel, _kernels

# Small workload evaluated in a child process under each backend.
_PROBE = r"""
import json, numpy as np
from quditforge import _accel
from quditforge.experiments import make_cost
out = {"backend": _accel.backend_name()}
for ansatz, d, size, opts in [("snapd", 4, 3, {}), ("snapd", 3, 2, {"complex_alpha": True}),
                              ("ecd", 3, 3, {}), ("pulse", 3, 4, {"T_us": 0.2})]:
    cost = make_cost(ansatz, d, "X(0,1)", size, options=opts)
    x = np.random.default_rng(3).normal(0, 0.4, cost.n_params)
    f, g = cost.value_and_grad(x)
    out[f"{ansatz}{d}"] = [float(f)] + [float(v) for v in g]
print(json.dumps(out))
"""


def _probe(flag):
    env = dict(os.environ, QUDITFORGE_NUMBA=flag)
    proc = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree_across_processes():
    fast, slow = _probe("1"), _probe("0")
    assert fast.pop("backend") == "numba"
    assert slow.pop("backend") == "numpy"
    assert fast.keys() == slow.keys()
    for key in fast:
        np.testing.assert_allclose(fast[key], slow[key], rtol=1e-9, atol=1e-12, err_msg=key)


def test_flag_parsing():
    for flag in ("0", "false", "OFF", " no "):
        code = "from quditforge import _accel; print(_accel.backend_name())"
        env = dict(os.environ, QUDITFORGE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
        assert out.strip() == "numpy"


def _random_trotter(seed, n=6, m=9, ng=4, r=3):
    rng = np.random.default_rng(seed)

    def herm():
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return M + M.conj().T

    Hd = herm()
    gens = np.array([herm() for _ in range(ng)])
    amps = rng.normal(size=(m, ng))
    Y = rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))
    X = rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))
    return Hd, gens, amps, Y, X


@pytest.mark.parametrize("seed", range(3))
def test_trotter_loop_and_batched_agree(seed):
    Hd, gens, amps, Y, X = _random_trotter(seed)
    z1, g1, c1 = _kernels.trotter_value_grad_numpy(Hd, gens, amps, 0.07, Y, X)
    z2, g2, c2 = _kernels._trotter_value_grad_loop.py_func(Hd, gens, amps, 0.07, Y, X, True)
    assert z1 == pytest.approx(z2, abs=1e-12)
    np.testing.assert_allclose(g1, g2, atol=1e-11)
    np.testing.assert_allclose(c1, c2, atol=1e-12)


def test_trotter_gradient_matches_fd():
    Hd, gens, amps, Y, X = _random_trotter(5)
    _, g, _ = _kernels.trotter_value_grad(Hd, gens, amps, 0.05, Y, X)
    h = 1e-6
    for s, k in [(0, 0), (4, 2), (8, 3)]:
        ap, am = amps.copy(), amps.copy()
        ap[s, k] += h
        am[s, k] -= h
        zp = _kernels.trotter_value_grad(Hd, gens, ap, 0.05, Y, X, False)[0]
        zm = _kernels.trotter_value_grad(Hd, gens, am, 0.05, Y, X, False)[0]
        assert g[s, k] == pytest.approx((zp - zm) / (2 * h), abs=1e-7)


def test_divided_differences_limits():
    lam = np.array([0.3, 0.3 + 1e-13, 1.7])
    D = _kernels.divdiff_expi(lam, 0.5)
    # Degenerate entries fall back to the derivative -i s e^{-i s lam}.
    assert D[0, 1] == pytest.approx(-0.5j * np.exp(-0.5j * 0.3), rel=1e-9)
    expected = (np.exp(-0.5j * 0.3) - np.exp(-0.5j * 1.7)) / (0.3 - 1.7)
    assert D[0, 2] == pytest.approx(expected, rel=1e-12)
