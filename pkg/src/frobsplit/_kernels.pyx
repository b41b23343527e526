# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense kernels for cap-truncated polynomial products over F_p.

A polynomial with per-variable cap c is stored as a C-ordered int64 box of
shape (c_1+1, ..., c_n+1).  Inside the box the flat index is additive on
exponent vectors, so a product term lands at flat(I) + flat(J) whenever
I + J stays in the box.  The kernel walks the nonzero entries of the sparser
factor and, for each, the sub-box of admissible partners.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()

cdef enum:
    MAXDIM = 64


cdef void _reduce(int64_t[::1] out, int64_t p) nogil:
    cdef Py_ssize_t i
    for i in range(out.shape[0]):
        out[i] = out[i] % p


cdef void _box_product(const int64_t[::1] outer, const int64_t[::1] idx,
                       const int64_t[::1] inner, int64_t[::1] out,
                       const int64_t[::1] dims, const int64_t[::1] strides,
                       int n, int64_t p, Py_ssize_t reduce_every) nogil:
    cdef int64_t I[MAXDIM]
    cdef int64_t J[MAXDIM]
    cdef int64_t lim[MAXDIM]
    cdef Py_ssize_t t, j, last, fi, base, rem
    cdef int d
    cdef int64_t v
    for t in range(idx.shape[0]):
        fi = idx[t]
        v = outer[fi]
        rem = fi
        for d in range(n):
            I[d] = rem // strides[d]
            rem = rem % strides[d]
            lim[d] = dims[d] - I[d]
            J[d] = 0
        last = lim[n - 1]
        base = 0
        while True:
            for j in range(last):
                out[fi + base + j] += v * inner[base + j]
            d = n - 2
            while d >= 0:
                J[d] += 1
                base += strides[d]
                if J[d] < lim[d]:
                    break
                base -= J[d] * strides[d]
                J[d] = 0
                d -= 1
            if d < 0:
                break
        if (t + 1) % reduce_every == 0:
            _reduce(out, p)


def mul_trunc(a, b, long long p):
    """Product of two equal-shape coefficient boxes, truncated to the box, mod p."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("box shapes differ")
    shape = a.shape
    cdef int n = a.ndim
    if n == 0:
        return np.asarray((int(a) * int(b)) % p, dtype=np.int64)
    if n > MAXDIM:
        raise ValueError("too many variables for the dense kernel")
    fa = a.ravel()
    fb = b.ravel()
    if np.count_nonzero(fa) > np.count_nonzero(fb):
        fa, fb = fb, fa
    out_arr = np.zeros(fa.shape[0], dtype=np.int64)
    cdef const int64_t[::1] outer = fa
    cdef const int64_t[::1] inner = fb
    cdef const int64_t[::1] idx = np.flatnonzero(fa).astype(np.int64)
    cdef int64_t[::1] out = out_arr
    cdef const int64_t[::1] dims = np.asarray(shape, dtype=np.int64)
    cdef const int64_t[::1] strides = np.asarray([s // 8 for s in a.strides], dtype=np.int64)
    cdef Py_ssize_t reduce_every = max(1, (1 << 62) // (p * p) - 1)
    with nogil:
        _box_product(outer, idx, inner, out, dims, strides, n, p, reduce_every)
    out_arr %= p
    return out_arr.reshape(shape)


def top_pairing(a, long long p):
    """Sum over the box of a[I] * a[top - I] mod p (top coefficient of a*a)."""
    fa = np.ascontiguousarray(a, dtype=np.int64).ravel()
    cdef const int64_t[::1] v = fa
    cdef Py_ssize_t i, m = v.shape[0]
    cdef int64_t acc = 0
    with nogil:
        for i in range(m):
            acc = (acc + (v[i] * v[m - 1 - i]) % p) % p
    return int(acc)
