"""JSON helpers: complex scalars travel as ``[re, im]`` pairs."""
import json
import os
import tempfile

import numpy as np

from .errors import RkhsError


def encode_array(arr):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return np.stack([arr.real, arr.imag], axis=-1).tolist()
    return arr.tolist()


def encode_scalar(z):
    if isinstance(z, complex) or np.iscomplexobj(z):
        return [float(np.real(z)), float(np.imag(z))]
    return float(z)


def decode_array(data, ndim):
    """Decode a nested list holding an ``ndim`` array, real or ``[re, im]``-paired."""
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise RkhsError("invalid-json", f"non-numeric array: {exc}") from None
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim != ndim:
        raise RkhsError("invalid-json", f"expected a {ndim}-d array, got shape {arr.shape}")
    return arr


def dumps(obj) -> str:
    # repr-based float formatting is the shortest round-trip form
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise RkhsError("io", f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise RkhsError("invalid-json", f"{path}: {exc}") from None


def write_atomic(path, text: str):
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
