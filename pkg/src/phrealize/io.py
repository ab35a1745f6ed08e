"""Reading system files and writing JSON reports.

Two input formats are accepted:

* a JSON file ``{"A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}``
  with row-major nested lists;
* a ``.bundle.json`` manifest mapping the same keys to Matrix Market files,
  resolved relative to the manifest.

Floats are written with Python's shortest round-trip representation, so
every emitted number parses back to the identical double.
"""

import json
import os

import numpy as np
import scipy.io

from .errors import InputError
from .system_model import LtiSystem

__all__ = ["load_system", "system_from_dict", "system_to_dict", "to_jsonable", "dumps",
           "write_json"]

_KEYS = ("A", "B", "C", "D")


def system_from_dict(data):
    """Build an :class:`LtiSystem` from a mapping of nested lists."""
    missing = [k for k in _KEYS if k not in data]
    if missing:
        raise InputError(f"missing matrices: {', '.join(missing)}")
    try:
        mats = [np.array(data[k], dtype=float) for k in _KEYS]
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix entry: {exc}") from exc
    mats = [M.reshape(1, 1) if M.ndim == 0 else M for M in mats]
    if any(M.ndim != 2 for M in mats):
        raise InputError("every matrix must be given as a list of rows")
    return LtiSystem.from_arrays(*mats)


def _load_bundle(path, data):
    base = os.path.dirname(os.path.abspath(path))
    out = {}
    for k in _KEYS:
        if k not in data:
            raise InputError(f"bundle lacks an entry for {k}")
        ref = data[k]
        if isinstance(ref, str):
            try:
                M = scipy.io.mmread(os.path.join(base, ref))
            except (OSError, ValueError) as exc:
                raise InputError(f"cannot read Matrix Market file {ref}: {exc}") from exc
            out[k] = M.toarray() if hasattr(M, "toarray") else np.asarray(M)
        else:
            out[k] = ref
    return system_from_dict(out)


def load_system(path):
    """Read a JSON system file or a Matrix Market bundle manifest.

    Raises
    ------
    InputError
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("top-level JSON value must be an object")
    if str(path).endswith(".bundle.json") or any(isinstance(data.get(k), str) for k in _KEYS):
        return _load_bundle(path, data)
    return system_from_dict(data)


def system_to_dict(sys):
    return {k: getattr(sys, k).tolist() for k in _KEYS}


def to_jsonable(obj):
    """Recursively convert numpy data; complex numbers become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(z.real), float(z.imag)] for z in obj.ravel()] if obj.ndim == 1 \
                else to_jsonable(obj.tolist())
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(obj):
    """Deterministic JSON text (sorted keys, round-trip floats)."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)


def write_json(obj, path=None, stream=None):
    text = dumps(obj) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)
    return text
