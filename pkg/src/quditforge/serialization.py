"""JSON encodings for matrices and ansatz parameters."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gateset_ecd import ECDParams
from .gateset_snapd import SnapDParams
from .pulse_control import ChebyshevPulse

_PARAM_TYPES = {"snapd": SnapDParams, "ecd": ECDParams, "pulse": ChebyshevPulse}


def matrix_to_dict(M) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got {M.shape}")
    return {"dim": M.shape[0], "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_dict(data: dict) -> np.ndarray:
    M = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if M.shape != (data["dim"], data["dim"]):
        raise ValueError(f"matrix shape {M.shape} does not match dim {data['dim']}")
    return M


def params_from_dict(data: dict):
    try:
        kind = _PARAM_TYPES[data["ansatz"]]
    except KeyError as exc:
        raise ValueError(f"unknown ansatz record: {data.get('ansatz')!r}") from exc
    return kind.from_dict(data)


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())
