"""Tensor persistence: ``TENSOR r c`` header then r*c little-endian float64."""
from __future__ import annotations

import numpy as np


class TensorFormatError(ValueError):
    pass


def write_tensor(fh, array):
    a = np.asarray(array, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    elif a.ndim != 2:
        raise ValueError(f"only tensors of rank <= 2 serialize, got shape {a.shape}")
    r, c = a.shape
    fh.write(f"TENSOR {r} {c}\n".encode("ascii"))
    fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def _readline(fh, what):
    line = fh.readline()
    if not line:
        return None
    try:
        return line.decode("ascii").rstrip("\n")
    except UnicodeDecodeError:
        raise TensorFormatError(f"{what}: header is not ASCII") from None


def read_tensor(fh, what="tensor"):
    header = _readline(fh, what)
    if header is None:
        raise TensorFormatError(f"{what}: missing TENSOR header")
    return _read_body(fh, header, what)


def _read_body(fh, header, what):
    parts = header.split()
    if len(parts) != 3 or parts[0] != "TENSOR":
        raise TensorFormatError(f"{what}: bad header {header!r}")
    try:
        r, c = int(parts[1]), int(parts[2])
    except ValueError:
        raise TensorFormatError(f"{what}: bad header {header!r}") from None
    if r < 1 or c < 1:
        raise TensorFormatError(f"{what}: non-positive shape {r}x{c}")
    nbytes = 8 * r * c
    raw = fh.read(nbytes)
    if len(raw) != nbytes:
        raise TensorFormatError(f"{what}: truncated data ({len(raw)} of {nbytes} bytes)")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(r, c)


def save_tensor(path, array):
    with open(path, "wb") as fh:
        write_tensor(fh, array)


def load_tensor(path):
    with open(path, "rb") as fh:
        t = read_tensor(fh, what=str(path))
        if fh.read(1):
            raise TensorFormatError(f"{path}: trailing bytes after tensor")
    return t


def save_checkpoint(path, named):
    """Write ``{name: array}`` as ``NAME <name>`` lines each followed by a tensor."""
    with open(path, "wb") as fh:
        for name, arr in named.items():
            fh.write(f"NAME {name}\n".encode("ascii"))
            write_tensor(fh, arr)


def load_checkpoint(path):
    out = {}
    with open(path, "rb") as fh:
        while True:
            line = _readline(fh, str(path))
            if line is None:
                break
            if not line.startswith("NAME "):
                raise TensorFormatError(f"{path}: expected NAME line, got {line!r}")
            name = line[5:]
            out[name] = read_tensor(fh, what=f"{path}:{name}")
    return out
