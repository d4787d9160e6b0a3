"""Pure numpy / Python-int implementations of the residue-array kernels.

Arrays are uint64 when the modulus is at most 2**62 and object (Python int)
otherwise. For uint64 inputs with m < 2**31 products stay in machine words;
larger moduli go through object arithmetic.
"""
import numpy as np

_SMALL = 1 << 31
_MASK31 = np.uint64((1 << 31) - 1)


def _native(m):
    return m < _SMALL


def _back(arr, like, m):
    if like.dtype == object:
        return arr
    return np.asarray(arr, dtype=np.uint64)


def mulmod(a, b, m):
    if a.dtype != object and b.dtype != object and _native(m):
        return (a * b) % np.uint64(m)
    out = (a.astype(object) * b.astype(object)) % m
    return _back(out, a, m)


def scalmod(a, c, m):
    c = int(c) % m
    if a.dtype != object and _native(m):
        return (a * np.uint64(c)) % np.uint64(m)
    return _back((a.astype(object) * c) % m, a, m)


def geometric(base, n, m):
    base = int(base) % m
    dtype = object if m > (1 << 62) else np.uint64
    out = np.empty(n, dtype=dtype)
    if n == 0:
        return out
    out[0] = 1 % m
    filled, step = 1, base
    while filled < n:
        take = min(filled, n - filled)
        out[filled:filled + take] = scalmod(out[:take], step, m)
        filled += take
        step = step * step % m
    return out


def summod(a, m):
    if a.dtype == object:
        return int(sum(a.tolist())) % m
    lo = int(np.sum(a & _MASK31, dtype=np.uint64))
    hi = int(np.sum(a >> np.uint64(31), dtype=np.uint64))
    return (lo + (hi << 31)) % m


def dotmod(a, b, m):
    return summod(mulmod(a, b, m), m)


def weighted_sum(a, base, m, start=1):
    w = scalmod(geometric(base, len(a), m), start, m)
    return dotmod(a, w, m)


def cumsum_mod(a, m):
    if a.dtype == object:
        return np.cumsum(a) % m
    if _native(m) and len(a) < (1 << 32):
        return np.cumsum(a, dtype=np.uint64) % np.uint64(m)
    out = np.cumsum(a.astype(object)) % m
    return np.asarray(out, dtype=np.uint64)


def cross_sum(f, g, m, cyclic):
    P = len(f)
    dtype = f.dtype
    out = np.empty(P, dtype=dtype)
    if cyclic:
        gg = np.concatenate([g, g])
        for z in range(P):
            # indices (z - x) mod P for x = 0..P-1
            window = gg[z + 1:z + P + 1][::-1]
            out[z] = dotmod(f, window, m)
    else:
        for z in range(P):
            window = g[z:z + P][::-1]
            out[z] = dotmod(f, window, m)
    return out
