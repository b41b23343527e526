"""The (p-1)-power splitting criterion on chart polynomials.

sigma^(p-1) splits the chart iff the monomial (x1...xn)^(p-1) occurs in it
with nonzero coefficient.  The coefficient is computed from
P = sigma^((p-1)/2) truncated at cap p-1: the top monomial of P*P only pairs
P[m] with P[top-m], so one dot product replaces the last squaring.
"""
from __future__ import annotations

from dataclasses import dataclass

from frobsplit import kernels
from frobsplit.gfpoly import (
    Poly,
    PrimeField,
    as_cap,
    dense_ok,
    poly_mul,
    poly_pow_truncated,
    power_box,
    restrict,
    to_dense,
    truncate,
)

POLICY = "splits iff coefficient != 0; normalized iff coefficient == 1"


@dataclass(frozen=True)
class SplitCandidate:
    sigma: Poly
    nvars: int
    field: PrimeField

    def __post_init__(self):
        if self.sigma.nvars != self.nvars:
            raise ValueError("sigma.nvars differs from the chart dimension")

    @classmethod
    def of(cls, sigma: Poly):
        return cls(sigma, sigma.nvars, sigma.field)


@dataclass(frozen=True)
class SplitReport:
    coefficient: int
    splits: bool
    normalized: bool
    policy: str = POLICY

    def line(self):
        return (f"coefficient={self.coefficient} splits={str(self.splits).lower()} "
                f"normalized={str(self.normalized).lower()}")


def _sigma(c):
    return c.sigma if isinstance(c, SplitCandidate) else c


def split_coefficient(c, method: str = "half", backend=None) -> int:
    """Coefficient of prod x_i^(p-1) in sigma^(p-1).

    method 'half' uses the dot-product shortcut, 'direct' raises to p-1 and
    reads the coefficient off (kept as an independent path for tests).
    """
    sigma = _sigma(c)
    p, n = sigma.p, sigma.nvars
    e = p - 1
    if n == 0:
        return pow(sigma.constant_term(), e, p)
    # degree guard and missing-variable guard
    if sigma.degree() * e < n * e or any(sigma.degree_in(i) < 1 for i in range(n)):
        return 0
    top = (e,) * n
    caps = as_cap(e, n)
    if method == "direct" or e % 2:
        power = poly_pow_truncated(sigma, e, caps, backend=backend)
        return power.coeff(top)
    half = e // 2
    if backend is None:
        backend = "dense" if dense_ok(caps, p) else "sparse"
    if backend == "dense":
        box = power_box(to_dense(truncate(sigma, caps), caps), half, p, _plan(sigma, half, caps))
        return kernels.top_pairing(box, p)
    P = poly_pow_truncated(sigma, half, caps, backend="sparse")
    total = 0
    for m, v in P.terms.items():
        w = P.terms.get(tuple(e - a for a in m))
        if w:
            total += v * w
    return total % p


def _plan(sigma, e, caps):
    from frobsplit.gfpoly import _pow_plan, box_cells

    return _pow_plan(max(1, len(sigma.terms)), e, box_cells(caps))


def split_coefficient_of_product(factors, **kw) -> int:
    """Split coefficient of a product whose factors use pairwise disjoint variables.

    The top monomial of the product's (p-1)-power only arises as a product of
    each factor's top monomial on its own block, so the coefficient is the
    product of blockwise coefficients.  Variables used by no factor make it 0.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("empty product")
    n, p = factors[0].nvars, factors[0].p
    seen = set()
    total = 1
    for f in factors:
        used = sorted({i for m in f.terms for i, e in enumerate(m) if e})
        if seen & set(used):
            raise ValueError("factors share variables")
        seen |= set(used)
        local = Poly._raw(f.field, len(used), {tuple(m[i] for i in used): c for m, c in f.terms.items()})
        total = total * split_coefficient(local, **kw) % p
    if len(seen) != n:
        return 0
    return total


def splits_by_p_minus_1(c, **kw) -> SplitReport:
    coefficient = split_coefficient(c, **kw)
    return SplitReport(coefficient, coefficient != 0, coefficient == 1)


def divisor_propagation_check(sigma_lift: Poly, divisor_vars) -> bool:
    """Compare split(sigma * prod_{j in D} x_j) with split(sigma restricted to x_j = 0, j in D)."""
    D = sorted(set(divisor_vars))
    lifted = sigma_lift
    for j in D:
        lifted = poly_mul(lifted, Poly.var(sigma_lift.field, sigma_lift.nvars, j))
    left = split_coefficient(lifted)
    right = split_coefficient(restrict(sigma_lift, {j: 0 for j in D}))
    return left == right
