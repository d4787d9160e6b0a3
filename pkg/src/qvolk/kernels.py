"""Backend selection for the residue-array kernels.

The compiled extension is used when it imports and the array is a uint64
array (modulus <= 2**62). Setting ``QVOLK_PURE=1`` forces the fallback.
"""
import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("QVOLK_PURE"):
        raise ImportError("pure backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

WORD_LIMIT = 1 << 62


def use_backend(name):
    """Switch backend at runtime ("cython" or "python"); returns the previous one."""
    global BACKEND
    if name == "cython" and _compiled is None:
        raise RuntimeError("compiled kernels are not available")
    if name not in ("cython", "python"):
        raise ValueError(f"unknown backend {name!r}")
    old, BACKEND = BACKEND, name
    return old


def compiled_available():
    return _compiled is not None


def dtype_for(m):
    return np.uint64 if m <= WORD_LIMIT else object


def _impl(*arrays):
    if BACKEND == "cython" and all(a.dtype == np.uint64 for a in arrays):
        return _compiled
    return _kernels_py


def from_ints(values, m):
    """Reduce an int64 (or object) array into the residue dtype for modulus m."""
    if dtype_for(m) is object:
        return np.array([int(v) % m for v in np.asarray(values).tolist()], dtype=object)
    return np.asarray(np.mod(values, m), dtype=np.uint64)


def full(n, value, m):
    """A read-only constant array (zero-stride view, nothing is allocated per element)."""
    dtype = dtype_for(m)
    cell = np.empty(1, dtype=dtype)
    cell[0] = int(value) % m
    return np.broadcast_to(cell, (n,))


def reduce(a, m):
    """Reduce residues to a smaller modulus, converting dtype if needed."""
    if a.dtype == object:
        out = a % m
        if dtype_for(m) is not object:
            out = np.asarray(out, dtype=np.uint64)
        return out
    return a % np.uint64(m)


def addmod(a, b, m):
    if a.dtype == object or b.dtype == object:
        return (a + b) % m
    s = a + b
    return np.where(s >= np.uint64(m), s - np.uint64(m), s)


def submod(a, b, m):
    if a.dtype == object or b.dtype == object:
        return (a - b) % m
    return np.where(a >= b, a - b, a + (np.uint64(m) - b))


def negmod(a, m):
    if a.dtype == object:
        return (-a) % m
    return np.where(a == 0, a, np.uint64(m) - a)


def mulmod(a, b, m):
    return _impl(a, b).mulmod(a, b, m)


def scalmod(a, c, m):
    return _impl(a).scalmod(a, int(c) % m, m)


def geometric(base, n, m):
    if BACKEND == "cython" and m <= WORD_LIMIT:
        return _compiled.geometric(int(base) % m, n, m)
    return _kernels_py.geometric(base, n, m)


def summod(a, m):
    return _impl(a).summod(a, m)


def dotmod(a, b, m):
    return _impl(a, b).dotmod(a, b, m)


def geometric_series(base, n, m):
    """sum_{x<n} base^x mod m by binary splitting (O(log n) multiplications)."""
    base %= m
    total, power = 0, 1          # sum and base^len of the prefix built so far
    chunk_sum, chunk_pow = 1 % m, base  # sum and base^len for a block of length 2^i
    while n:
        if n & 1:
            total = (total + power * chunk_sum) % m
            power = power * chunk_pow % m
        chunk_sum = chunk_sum * (1 + chunk_pow) % m
        chunk_pow = chunk_pow * chunk_pow % m
        n >>= 1
    return total


def weighted_sum(a, base, m, start=1):
    if len(a) and a.strides[0] == 0:
        # constant row (see full): c * start * sum base^x
        return int(a[0]) * int(start) * geometric_series(int(base), len(a), m) % m
    return _impl(a).weighted_sum(a, int(base) % m, m, int(start) % m)


def cumsum_mod(a, m):
    return _impl(a).cumsum_mod(a, m)


def cross_sum(f, g, m, cyclic=False):
    return _impl(f, g).cross_sum(f, g, m, cyclic)
