"""Prime fields and sparse multivariate polynomials over them.

Polynomials are immutable maps from exponent tuples to nonzero residues in
[0, p).  Products and powers can be truncated by a per-variable exponent
cap; powers switch to a dense coefficient box (see kernels) when the box is
small enough.
"""
from __future__ import annotations

import re
from functools import total_ordering
from math import prod

import numpy as np

from frobsplit import kernels
from frobsplit.errors import ParseError, ShapeMismatch, ZeroInverse

# boxes up to this many cells use the dense backend
DENSE_LIMIT = 10**7


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeField:
    """The field F_p with canonical residues in [0, p)."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        p = int(p)
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p

    def __call__(self, a) -> int:
        return int(a) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroInverse(f"0 has no inverse mod {self.p}")
        return pow(a, -1, self.p)

    def pow(self, a, e):
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"


@total_ordering
class _Infinity:
    """Order of vanishing of the zero polynomial."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("frobsplit-infinity")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __repr__(self):
        return "inf"


INF = _Infinity()


def grlex_key(m):
    return (sum(m), m)


class Poly:
    """Sparse polynomial in x1..xn over a prime field."""

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field: PrimeField, nvars: int, terms=None):
        if isinstance(field, int):
            field = PrimeField(field)
        p = field.p
        clean = {}
        for m, c in (terms or {}).items():
            m = tuple(int(e) for e in m)
            if len(m) != nvars:
                raise ShapeMismatch(f"monomial {m} has length {len(m)}, expected {nvars}")
            if any(e < 0 for e in m):
                raise ValueError("negative exponent")
            c = (clean.get(m, 0) + int(c)) % p
            if c:
                clean[m] = c
            else:
                clean.pop(m, None)
        self.field = field
        self.nvars = nvars
        self.terms = clean

    @classmethod
    def _raw(cls, field, nvars, terms):
        obj = object.__new__(cls)
        obj.field = field
        obj.nvars = nvars
        obj.terms = terms
        return obj

    # constructors
    @classmethod
    def zero(cls, field, nvars):
        return cls._raw(_field(field), nvars, {})

    @classmethod
    def const(cls, field, nvars, c):
        field = _field(field)
        c %= field.p
        return cls._raw(field, nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, field, nvars):
        return cls.const(field, nvars, 1)

    @classmethod
    def var(cls, field, nvars, i):
        """The coordinate x_{i+1} (0-based index i)."""
        if not 0 <= i < nvars:
            raise ShapeMismatch(f"variable index {i} out of range for {nvars} variables")
        m = [0] * nvars
        m[i] = 1
        return cls._raw(_field(field), nvars, {tuple(m): 1})

    @property
    def p(self):
        return self.field.p

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, i):
        return max((m[i] for m in self.terms), default=-1)

    def coeff(self, m):
        return coeff(self, m)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, 0)

    def is_constant(self):
        return all(not any(m) for m in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading(self):
        m = max(self.terms, key=grlex_key)
        return m, self.terms[m]

    def evaluate(self, point):
        if len(point) != self.nvars:
            raise ShapeMismatch("point length differs from nvars")
        p = self.p
        total = 0
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v = v * pow(x, e, p) % p
            total += v
        return total % p

    def scale(self, c):
        c %= self.p
        if c == 0:
            return Poly.zero(self.field, self.nvars)
        return Poly._raw(self.field, self.nvars, {m: v * c % self.p for m, v in self.terms.items()})

    def _coerce(self, other):
        if isinstance(other, Poly):
            _check_same(self, other)
            return other
        if isinstance(other, int):
            return Poly.const(self.field, self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = (out.get(m, 0) + c) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(self.field, self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        p = self.p
        return Poly._raw(self.field, self.nvars, {m: p - c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return poly_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative exponent")
        result = Poly.one(self.field, self.nvars)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.field, self.nvars, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.p, self.nvars, frozenset(self.terms.items())))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly(p={self.p}, nvars={self.nvars}, '{format_poly(self)}')"


def _field(field):
    return field if isinstance(field, PrimeField) else PrimeField(field)


def _check_same(a: Poly, b: Poly):
    if a.nvars != b.nvars or a.field != b.field:
        raise ShapeMismatch(
            f"operands differ: nvars {a.nvars}/{b.nvars}, p {a.p}/{b.p}"
        )


def as_cap(cap, nvars):
    """Normalize an exponent cap (int or sequence) to a tuple of length nvars."""
    if isinstance(cap, int):
        caps = (cap,) * nvars
    else:
        caps = tuple(int(c) for c in cap)
    if len(caps) != nvars:
        raise ShapeMismatch(f"cap has length {len(caps)}, expected {nvars}")
    if any(c < 0 for c in caps):
        raise ValueError("caps must be nonnegative")
    return caps


def _within(m, caps):
    return all(e <= c for e, c in zip(m, caps))


def truncate(f: Poly, cap) -> Poly:
    caps = as_cap(cap, f.nvars)
    return Poly._raw(f.field, f.nvars, {m: c for m, c in f.terms.items() if _within(m, caps)})


def coeff(f: Poly, m) -> int:
    m = tuple(m)
    if len(m) != f.nvars:
        raise ShapeMismatch(f"monomial length {len(m)} differs from nvars {f.nvars}")
    return f.terms.get(m, 0)


def poly_mul(a: Poly, b: Poly, cap=None) -> Poly:
    """Product a*b; with a cap, monomials exceeding it in any variable are dropped."""
    _check_same(a, b)
    p = a.p
    caps = as_cap(cap, a.nvars) if cap is not None else None
    if len(a.terms) > len(b.terms):
        a, b = b, a
    out = {}
    get = out.get
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            if caps is not None and not _within(m, caps):
                continue
            out[m] = (get(m, 0) + ca * cb) % p
    return Poly._raw(a.field, a.nvars, {m: c for m, c in out.items() if c})


# dense boxes ---------------------------------------------------------------

def box_cells(caps):
    return prod(c + 1 for c in caps)


def dense_ok(caps, p):
    # int64 accumulation in the kernels needs p^2 well below 2^62
    return box_cells(caps) <= DENSE_LIMIT and p < (1 << 30)


def to_dense(f: Poly, caps) -> np.ndarray:
    box = np.zeros(tuple(c + 1 for c in caps), dtype=np.int64)
    for m, c in f.terms.items():
        if _within(m, caps):
            box[m] = c
    return box


def from_dense(box: np.ndarray, field: PrimeField) -> Poly:
    nvars = box.ndim
    if nvars == 0:
        return Poly.const(field, 0, int(box))
    idx = np.nonzero(box)
    vals = box[idx]
    terms = {tuple(int(i) for i in m): int(v) for m, v in zip(zip(*idx), vals)}
    return Poly._raw(field, nvars, terms)


def _pow_plan(nnz, e, cells):
    """'linear' (repeated multiplication by the base) or 'binary' (square-and-multiply),
    whichever has the smaller estimated sparse-operand work."""
    if e <= 2:
        return "binary"
    linear = (e - 1) * nnz
    binary = 0
    acc_est = None
    base_est = nnz
    k = e
    while k:
        if k & 1:
            if acc_est is None:
                acc_est = base_est
            else:
                binary += min(acc_est, base_est)
                acc_est = min(cells, acc_est * base_est)
        k >>= 1
        if k:
            binary += base_est
            base_est = min(cells, base_est * base_est)
    return "linear" if linear < binary else "binary"


def poly_pow_truncated(f: Poly, e: int, cap, method: str = "auto", backend=None) -> Poly:
    """f**e with the cap applied after every intermediate product.

    method: 'binary' is square-and-multiply, 'linear' multiplies by the base
    e-1 times (cheaper when f is sparse and the box fills up), 'auto' picks by
    a cost estimate.  backend: 'dense', 'sparse' or None for automatic.
    """
    if e < 0:
        raise ValueError("negative exponent")
    caps = as_cap(cap, f.nvars)
    f = truncate(f, caps)
    one = truncate(Poly.one(f.field, f.nvars), caps)
    if e == 0:
        return one
    if backend is None:
        backend = "dense" if dense_ok(caps, f.p) else "sparse"
    cells = box_cells(caps)
    if method == "auto":
        method = _pow_plan(max(1, len(f.terms)), e, cells)
    if backend == "dense":
        box = power_box(to_dense(f, caps), e, f.p, method)
        return from_dense(box, f.field)
    if method == "linear":
        acc = f
        for _ in range(e - 1):
            acc = poly_mul(acc, f, caps)
        return acc
    result = None
    base = f
    while e:
        if e & 1:
            result = base if result is None else poly_mul(result, base, caps)
        e >>= 1
        if e:
            base = poly_mul(base, base, caps)
    return result


def power_box(box, e, p, method="binary", impl=None):
    """e-th power of a dense coefficient box, truncated to the box."""
    mul = (impl or kernels).mul_trunc
    if method == "linear":
        acc = box
        for _ in range(e - 1):
            acc = mul(acc, box, p)
        return acc
    result = None
    base = box
    while e:
        if e & 1:
            result = base if result is None else mul(result, base, p)
        e >>= 1
        if e:
            base = mul(base, base, p)
    return result


# substitution and restriction ---------------------------------------------

def substitute(f: Poly, images, nvars_out=None) -> Poly:
    """Compose f with x_i -> images[i] (Polys sharing a target ring)."""
    if len(images) != f.nvars:
        raise ShapeMismatch(f"{len(images)} images for {f.nvars} variables")
    if nvars_out is None:
        nvars_out = images[0].nvars if images else 0
    for g in images:
        if g.nvars != nvars_out or g.field != f.field:
            raise ShapeMismatch("substitution images live in different rings")
    powers = [dict() for _ in images]

    def power(i, e):
        cache = powers[i]
        if e not in cache:
            cache[e] = Poly.one(f.field, nvars_out) if e == 0 else power(i, e - 1) * images[i]
        return cache[e]

    result = Poly.zero(f.field, nvars_out)
    for m, c in f.terms.items():
        term = Poly.const(f.field, nvars_out, c)
        for i, e in enumerate(m):
            if e:
                term = term * power(i, e)
        result = result + term
    return result


def affine_form(field, nvars_out, linear, const=0) -> Poly:
    """The polynomial sum_j linear[j]*x_{j+1} + const."""
    if len(linear) != nvars_out:
        raise ShapeMismatch("linear part has the wrong length")
    terms = {}
    for j, a in enumerate(linear):
        if a % field.p:
            m = [0] * nvars_out
            m[j] = 1
            terms[tuple(m)] = a
    if const % field.p:
        terms[(0,) * nvars_out] = const
    return Poly(field, nvars_out, terms)


def substitute_affine(f: Poly, mapping, nvars_out=None) -> Poly:
    """Compose f with an affine substitution.

    mapping[i] is either a Poly of degree <= 1 or a pair (linear, const)
    describing x_i -> sum_j linear[j] x_j + const in the target ring.
    """
    if len(mapping) != f.nvars:
        raise ShapeMismatch(f"{len(mapping)} images for {f.nvars} variables")
    images = []
    for item in mapping:
        if isinstance(item, Poly):
            g = item
        else:
            linear, const = item
            n = len(linear) if nvars_out is None else nvars_out
            g = affine_form(f.field, n, linear, const)
        if g.degree() > 1:
            raise ValueError("substitution is not affine")
        images.append(g)
    if nvars_out is None:
        nvars_out = images[0].nvars if images else f.nvars
    return substitute(f, images, nvars_out)


def restrict(f: Poly, fixed: dict) -> Poly:
    """Set x_i = fixed[i] (0-based) and drop those variables."""
    keep = [i for i in range(f.nvars) if i not in fixed]
    p = f.p
    out = {}
    for m, c in f.terms.items():
        v = c
        for i, val in fixed.items():
            if m[i]:
                v = v * pow(val, m[i], p) % p
                if v == 0:
                    break
        if v:
            mm = tuple(m[i] for i in keep)
            out[mm] = (out.get(mm, 0) + v) % p
    return Poly._raw(f.field, len(keep), {m: c for m, c in out.items() if c})


def embed(f: Poly, nvars_out, positions) -> Poly:
    """Rename x_i -> x_{positions[i]} inside a ring with nvars_out variables."""
    out = {}
    for m, c in f.terms.items():
        mm = [0] * nvars_out
        for i, e in enumerate(m):
            mm[positions[i]] += e
        out[tuple(mm)] = c
    return Poly._raw(f.field, nvars_out, out)


def vanishing_order(f: Poly, coords):
    """Order of vanishing along the coordinate subspace {x_j = 0 : j in coords}."""
    coords = list(coords)
    if not f.terms:
        return INF
    return min(sum(m[j] for j in coords) for m in f.terms)


def exact_divide(f: Poly, g: Poly) -> Poly | None:
    """f / g when g divides f exactly, else None."""
    _check_same(f, g)
    if not g.terms:
        raise ZeroInverse("division by the zero polynomial")
    p = f.p
    lg, cg = g.leading()
    inv = pow(cg, -1, p)
    rem = dict(f.terms)
    quot = {}
    while rem:
        m = max(rem, key=grlex_key)
        if any(a < b for a, b in zip(m, lg)):
            return None
        qm = tuple(a - b for a, b in zip(m, lg))
        qc = rem[m] * inv % p
        quot[qm] = qc
        for mg, c in g.terms.items():
            mm = tuple(a + b for a, b in zip(qm, mg))
            v = (rem.get(mm, 0) - qc * c) % p
            if v:
                rem[mm] = v
            else:
                rem.pop(mm, None)
    return Poly._raw(f.field, f.nvars, quot)


def divide_by_variable(f: Poly, i: int) -> Poly | None:
    """f / x_i when every term contains x_i, else None."""
    out = {}
    for m, c in f.terms.items():
        if m[i] == 0:
            return None
        mm = list(m)
        mm[i] -= 1
        out[tuple(mm)] = c
    return Poly._raw(f.field, f.nvars, out)


def derivative(f: Poly, i: int) -> Poly:
    """Formal partial derivative in x_{i+1}."""
    p = f.p
    out = {}
    for m, c in f.terms.items():
        if m[i] and (c * m[i]) % p:
            mm = list(m)
            mm[i] -= 1
            out[tuple(mm)] = c * m[i] % p
    return Poly._raw(f.field, f.nvars, out)


def homogeneous_part(f: Poly, d: int) -> Poly:
    return Poly._raw(f.field, f.nvars, {m: c for m, c in f.terms.items() if sum(m) == d})


def det_bareiss(matrix) -> Poly:
    """Determinant of a square matrix of Polys by fraction-free elimination."""
    M = [list(row) for row in matrix]
    n = len(M)
    if any(len(row) != n for row in M):
        raise ShapeMismatch("matrix is not square")
    if n == 0:
        raise ShapeMismatch("empty matrix")
    field, nvars = M[0][0].field, M[0][0].nvars
    sign = 1
    prev = Poly.one(field, nvars)
    for k in range(n - 1):
        if M[k][k].is_zero():
            for i in range(k + 1, n):
                if not M[i][k].is_zero():
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return Poly.zero(field, nvars)
        pivot = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = M[i][j] * pivot - M[i][k] * M[k][j]
                q = exact_divide(num, prev)
                if q is None:  # cannot happen for exact Bareiss steps
                    raise ArithmeticError("Bareiss step not exact")
                M[i][j] = q
        prev = pivot
    det = M[n - 1][n - 1]
    return det if sign == 1 else -det


# text format ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|x(\d+)|(\^)|(\*)|([+-]))")


def _tokens(text):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = mt.end()
        num, var, caret, star, sign = mt.groups()
        if num is not None:
            yield ("num", int(num))
        elif var is not None:
            yield ("var", int(var))
        elif caret:
            yield ("^", None)
        elif star:
            yield ("*", None)
        else:
            yield ("sign", sign)


def parse_poly(text: str, field, nvars: int | None = None) -> Poly:
    """Parse the text grammar, e.g. '3*x1^2*x2 + 4*x3 - 1'."""
    field = _field(field)
    toks = list(_tokens(text))
    if not toks:
        raise ParseError("empty polynomial")
    raw_terms = []
    i = 0
    sign = 1
    expect_term = True
    while i < len(toks):
        kind, val = toks[i]
        if kind == "sign":
            s = 1 if val == "+" else -1
            sign = sign * s if expect_term else s
            expect_term = True
            i += 1
            continue
        if not expect_term:
            raise ParseError("missing operator between terms")
        c = 1
        exps = {}
        need_factor = True
        while i < len(toks):
            kind, val = toks[i]
            if need_factor:
                if kind == "num":
                    c *= val
                    i += 1
                elif kind == "var":
                    e = 1
                    i += 1
                    if i < len(toks) and toks[i][0] == "^":
                        if i + 1 >= len(toks) or toks[i + 1][0] != "num":
                            raise ParseError("exponent expected after '^'")
                        e = toks[i + 1][1]
                        i += 2
                    if val < 1:
                        raise ParseError("variables are numbered from x1")
                    exps[val] = exps.get(val, 0) + e
                else:
                    raise ParseError(f"factor expected, got {kind}")
                need_factor = False
            elif kind == "*":
                need_factor = True
                i += 1
            else:
                break
        if need_factor:
            raise ParseError("dangling '*'")
        raw_terms.append((sign * c, exps))
        sign = 1
        expect_term = False
    if expect_term:
        raise ParseError("trailing operator")
    top = max((v for _, exps in raw_terms for v in exps), default=0)
    if nvars is None:
        nvars = top
    elif top > nvars:
        raise ShapeMismatch(f"x{top} used with nvars={nvars}")
    terms = {}
    for c, exps in raw_terms:
        m = [0] * nvars
        for v, e in exps.items():
            m[v - 1] += e
        m = tuple(m)
        terms[m] = terms.get(m, 0) + c
    return Poly(field, nvars, terms)


def format_poly(f: Poly) -> str:
    """Canonical text: grlex-descending terms, residues in [1, p), joined by ' + '."""
    if not f.terms:
        return "0"
    parts = []
    for m, c in f.sorted_terms():
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(m) if e]
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    return " + ".join(parts)
