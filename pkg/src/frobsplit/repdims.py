"""Dimension bookkeeping for GL_n representations (Weyl's formula)."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement


def _pad(lam, n):
    lam = tuple(int(v) for v in lam)
    if len(lam) > n:
        raise ValueError(f"partition {lam} has more than {n} parts")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"{lam} is not weakly decreasing")
    return lam + (0,) * (n - len(lam))


def weyl_dim(lam, n: int) -> int:
    """prod_{i<j} (lam_i - lam_j + j - i) / (j - i)."""
    lam = _pad(lam, n)
    num = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            num *= Fraction(lam[i] - lam[j] + j - i, j - i)
    assert num.denominator == 1
    return int(num)


def grass_sections_dim(r: int, m: int) -> int:
    """dim H^0(Grass_r(k^{2r}), O(m)) = weyl_dim((m^r, 0^r), 2r)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return weyl_dim((m,) * r + (0,) * r, 2 * r)


def box_partitions(r: int, m: int):
    """Weakly decreasing (mu_1, ..., mu_r) with m >= mu_1 and mu_r >= 0."""
    for combo in combinations_with_replacement(range(m, -1, -1), r):
        yield combo


def decomposition_terms(r: int, m: int):
    out = []
    for mu in box_partitions(r, m):
        nu = tuple(m - v for v in reversed(mu))
        out.append((mu, nu, weyl_dim(mu, r) * weyl_dim(nu, r)))
    return out


def decomposition_identity(r: int, m: int) -> bool:
    return grass_sections_dim(r, m) == sum(t for _, _, t in decomposition_terms(r, m))


def dominant_in_C(lam, p: int, r: int) -> bool:
    """lam_1 - lam_r <= p - r + 1."""
    lam = _pad(lam, r)
    return lam[0] - lam[-1] <= p - r + 1
