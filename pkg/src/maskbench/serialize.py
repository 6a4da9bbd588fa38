"""JSON files for states and reports."""

from __future__ import annotations

import json

import numpy as np

from .errors import NonPhysicalStateError
from .qcore import BlochVector, DensityMatrix, PureState, bloch_to_density


def dumps(obj) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def state_from_json(data) -> DensityMatrix:
    """Density matrix from ``{dim, re, im}``, ``{x, y, z}`` or ``{amplitudes: {re, im}}``."""
    if not isinstance(data, dict):
        raise NonPhysicalStateError("state JSON must be an object")
    if {"x", "y", "z"} <= data.keys():
        try:
            v = BlochVector(float(data["x"]), float(data["y"]), float(data["z"]))
        except (TypeError, ValueError) as exc:
            raise NonPhysicalStateError(f"field x/y/z: {exc}") from None
        return bloch_to_density(v)
    if "amplitudes" in data:
        return pure_from_json(data).density()
    return DensityMatrix.from_json(data)


def pure_from_json(data) -> PureState:
    amps = data.get("amplitudes")
    if not isinstance(amps, dict) or "re" not in amps:
        raise NonPhysicalStateError("field 'amplitudes' must be {re, im}")
    re = np.asarray(amps["re"], dtype=float)
    im = np.asarray(amps.get("im", np.zeros_like(re)), dtype=float)
    return PureState(re + 1j * im)


def load_state(path) -> DensityMatrix:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NonPhysicalStateError(f"malformed JSON in {path}: {exc}") from None
    return state_from_json(data)


def save_state(rho: DensityMatrix, path):
    with open(path, "w") as fh:
        fh.write(dumps(rho.to_json()))
