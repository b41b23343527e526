import numpy as np
import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from frobsplit.gfpoly import Poly, PrimeField

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PRIMES = [5, 7, 11]


@st.composite
def polys(draw, nvars=None, p=None, max_terms=5, max_exp=3):
    p = p or draw(st.sampled_from(PRIMES))
    n = nvars if nvars is not None else draw(st.integers(1, 3))
    mono = st.tuples(*[st.integers(0, max_exp)] * n)
    terms = draw(st.dictionaries(mono, st.integers(1, p - 1), max_size=max_terms))
    return Poly(PrimeField(p), n, terms)


def to_sympy(f: Poly):
    xs = sympy.symbols(f"x1:{f.nvars + 1}")
    expr = sum((c * sympy.prod([x ** e for x, e in zip(xs, m)]) for m, c in f.terms.items()), sympy.Integer(0))
    return sympy.Poly(expr, *xs, modulus=f.p) if xs else expr


def from_sympy(g, field, nvars):
    terms = {m: int(c) % field.p for m, c in g.terms()}
    return Poly(field, nvars, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
