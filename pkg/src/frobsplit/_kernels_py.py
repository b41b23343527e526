"""Pure-Python (numpy-sliced) twins of the compiled kernels in _kernels.pyx."""
import numpy as np


def mul_trunc(a, b, p):
    """Product of two equal-shape coefficient boxes, truncated to the box, mod p."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("box shapes differ")
    if a.ndim == 0:
        return np.asarray((int(a) * int(b)) % p, dtype=np.int64)
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    shape = a.shape
    out = np.zeros(shape, dtype=np.int64)
    reduce_every = max(1, (1 << 62) // (p * p) - 1)
    for t, I in enumerate(zip(*np.nonzero(a))):
        dst = tuple(slice(i, None) for i in I)
        src = tuple(slice(0, d - i) for d, i in zip(shape, I))
        out[dst] += int(a[I]) * b[src]
        if (t + 1) % reduce_every == 0:
            out %= p
    out %= p
    return out


def top_pairing(a, p):
    """Sum over the box of a[I] * a[top - I] mod p (top coefficient of a*a)."""
    flat = np.asarray(a, dtype=np.int64).ravel()
    return int(((flat * flat[::-1]) % p).sum() % p)
