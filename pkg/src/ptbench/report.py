"""Deterministic JSON reports.

Floats are written with 17 significant digits so that re-reading gives the
identical double; complex numbers become ``[re, im]`` pairs, arrays become
nested lists and dict keys are sorted.  Non-finite floats are written as the
strings ``"nan"``, ``"inf"`` and ``"-inf"``.
"""
import dataclasses
import hashlib
import json
from enum import Enum

import numpy as np

from . import __version__


def _float(x):
    x = float(x)
    if np.isnan(x):
        return '"nan"'
    if np.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_plain(obj):
    """Reduce ``obj`` to dicts, lists, strings, ints, floats, bools and None."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_plain(x) for x in obj.tolist()] if obj.ndim else to_plain(obj.item())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(x) for x in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        out.append("[")
        for i, x in enumerate(obj):
            if i:
                out.append(", ")
            _emit(x, out)
        out.append("]")
    else:
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(k) + ": ")
            _emit(obj[k], out)
        out.append("}")


def dumps(obj):
    out = []
    _emit(to_plain(obj), out)
    return "".join(out)


def loads(text):
    return json.loads(text)


def digest(blobs, flags):
    """sha256 over the raw input files and the canonical flag set."""
    h = hashlib.sha256()
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    h.update(dumps(flags).encode())
    return h.hexdigest()


def make_report(command, flags, blobs, tol, result, passed):
    return {
        "command": command,
        "flags": flags,
        "input_digest": digest(blobs, flags),
        "tol": tol,
        "result": result,
        "passed": passed,
        "version": __version__,
    }
