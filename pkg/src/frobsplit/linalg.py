"""Dense linear algebra over F_p on int64 arrays, plus subspace helpers.

Matrices are numpy int64 arrays with entries in [0, p); p must stay below
2^31 so that products fit.  Subspaces are given by a matrix whose columns
span them.
"""
import numpy as np

from frobsplit.errors import ZeroInverse


def as_mat(rows, p):
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), -1) % p if len(rows) else np.zeros((0, 0), np.int64)


def rref(A, p):
    """Reduced row echelon form and pivot columns."""
    R = np.array(A, dtype=np.int64) % p
    if R.ndim != 2:
        raise ValueError("matrix expected")
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = R[r] * pow(int(R[r, c]), -1, p) % p
        col = R[:, c].copy()
        col[r] = 0
        mask = np.flatnonzero(col)
        if mask.size:
            R[mask] = (R[mask] - np.outer(col[mask], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A, p):
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace(A, p):
    """Basis of {x : A x = 0} as the columns of a matrix."""
    A = np.asarray(A, dtype=np.int64)
    cols = A.shape[1]
    R, pivots = rref(A, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-R[i, f]) % p
    return basis


def solve(A, b, p):
    """One solution of A x = b (free variables set to 0), or None."""
    A = np.asarray(A, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1) % p
    aug = np.hstack([A, b])
    R, pivots = rref(aug, p)
    n = A.shape[1]
    if pivots and pivots[-1] == n:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = R[i, n]
    return x


def det(A, p):
    M = np.array(A, dtype=np.int64) % p
    n = M.shape[0]
    d = 1
    for c in range(n):
        nz = np.flatnonzero(M[c:, c])
        if nz.size == 0:
            return 0
        k = c + nz[0]
        if k != c:
            M[[c, k]] = M[[k, c]]
            d = -d
        piv = int(M[c, c])
        d = d * piv % p
        inv = pow(piv, -1, p)
        below = M[c + 1:, c] * inv % p
        M[c + 1:] = (M[c + 1:] - np.outer(below, M[c])) % p
    return d % p


def inverse(A, p):
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    R, pivots = rref(np.hstack([A % p, np.eye(n, dtype=np.int64)]), p)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroInverse("matrix is singular")
    return R[:, n:]


def matmul(A, B, p):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    # split to keep int64 products safe for large inner dimension
    return (A @ B) % p if A.shape[-1] * (p - 1) ** 2 < (1 << 62) else _matmul_obj(A, B, p)


def _matmul_obj(A, B, p):
    return (A.astype(object) @ B.astype(object) % p).astype(np.int64)


# subspaces -------------------------------------------------------------------

def span(V, p):
    """Column basis (reduced) of the span of the columns of V."""
    V = np.asarray(V, dtype=np.int64)
    if V.size == 0:
        return np.zeros((V.shape[0] if V.ndim == 2 else 0, 0), dtype=np.int64)
    R, pivots = rref(V.T, p)
    return R[: len(pivots)].T.copy()


def dim(V, p):
    V = np.asarray(V, dtype=np.int64)
    return 0 if V.size == 0 else rank(V, p)


def hstack(*blocks):
    rows = next(b.shape[0] for b in blocks)
    parts = [np.asarray(b, dtype=np.int64).reshape(rows, -1) for b in blocks]
    return np.hstack(parts) if parts else np.zeros((rows, 0), np.int64)


def add(U, V, p):
    return span(hstack(U, V), p)


def contains(U, v, p):
    """Is the column vector (or every column of a matrix) v inside span(U)?"""
    v = np.asarray(v, dtype=np.int64).reshape(U.shape[0], -1)
    return dim(hstack(U, v), p) == dim(U, p)


def intersect(U, V, p):
    """Basis of span(U) ∩ span(V)."""
    U = span(U, p)
    V = span(V, p)
    n = U.shape[0]
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros((n, 0), dtype=np.int64)
    K = nullspace(hstack(U, (-V) % p), p)
    return span(matmul(U, K[: U.shape[1]], p), p)


def annihilator(U, p):
    """Rows spanning the linear forms vanishing on span(U), as a matrix (k x n)."""
    U = np.asarray(U, dtype=np.int64)
    n = U.shape[0]
    if U.size == 0:
        return np.eye(n, dtype=np.int64)
    return nullspace(U.T, p).T


def complete_basis(U, p):
    """Invertible matrix whose first columns are a basis of span(U)."""
    U = span(U, p)
    n = U.shape[0]
    cols = [U[:, j] for j in range(U.shape[1])]
    current = U
    for i in range(n):
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        if not contains(current, e, p):
            cols.append(e)
            current = hstack(current, e)
    return np.stack(cols, axis=1)


def same_space(U, V, p):
    return dim(U, p) == dim(V, p) == dim(hstack(U, V), p)
