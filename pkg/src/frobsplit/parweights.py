"""Exact calculus of parabolic types and weights.

A weight datum fixes, at each marked point x, a type n(x) = (n_1, ..., n_{l+1})
summing to the rank r and integer weights 0 = a_1 < ... < a_{l+1} < k.
Everything here is Fraction arithmetic.  Weights that depend on an
infinitesimal parameter are handled through Infinitesimal values, which
the generic Sigma formula accepts in place of a_i/k.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Mapping

from frobsplit.errors import BadHeckePoint, BadProfile, BadT, BadType, ParseError, WeightOverflow


@dataclass(frozen=True)
class PointWeight:
    n: tuple
    a: tuple

    @property
    def steps(self):
        """d_i = a_{i+1} - a_i for i = 1..l."""
        return tuple(b - a for a, b in zip(self.a, self.a[1:]))

    @property
    def partial_ranks(self):
        """r_i = n_1 + ... + n_i for i = 1..l."""
        out, s = [], 0
        for v in self.n[:-1]:
            s += v
            out.append(s)
        return tuple(out)


@dataclass(frozen=True)
class ParData:
    r: int
    d: int
    g: int
    k: int
    points: Mapping[str, PointWeight] = field(default_factory=dict)

    def __post_init__(self):
        if self.k <= 0:
            raise BadType("k must be positive")
        for label, pw in self.points.items():
            check_point(pw, self.r, self.k, label)

    @property
    def chi(self):
        return self.d + self.r * (1 - self.g)

    def weights(self, label):
        pw = self.points[label]
        return tuple(Fraction(a, self.k) for a in pw.a)

    def replace_point(self, label, pw, d=None):
        pts = dict(self.points)
        pts[label] = pw
        return ParData(self.r, self.d if d is None else d, self.g, self.k, pts)


def check_point(pw: PointWeight, r: int, k: int, label="?"):
    if any(v <= 0 for v in pw.n):
        raise BadType(f"{label}: type entries must be positive")
    if sum(pw.n) != r:
        raise BadType(f"{label}: type {pw.n} does not sum to r={r}")
    if len(pw.a) != len(pw.n):
        raise BadType(f"{label}: weight and type lengths differ")
    if pw.a[0] != 0 or any(b <= a for a, b in zip(pw.a, pw.a[1:])):
        raise BadType(f"{label}: weights {pw.a} are not 0 = a_1 < a_2 < ...")
    if pw.a[-1] >= k:
        raise WeightOverflow(f"{label}: top weight {pw.a[-1]} >= k={k}")


@dataclass(frozen=True)
class SubsheafProfile:
    r1: int
    deg: int
    m: Mapping[str, tuple]


def canonical_weight(types: Mapping[str, tuple], r: int, d: int = 0, g: int = 0) -> ParData:
    """k = 2r, a_1 = 0, a_{i+1} = a_i + n_i + n_{i+1}."""
    k = 2 * r
    pts = {}
    for label, n in types.items():
        n = tuple(int(v) for v in n)
        if sum(n) != r or any(v <= 0 for v in n):
            raise BadType(f"{label}: type {n} is not a composition of {r}")
        a = [0]
        for i in range(len(n) - 1):
            a.append(a[-1] + n[i] + n[i + 1])
        if a[-1] >= k:
            raise WeightOverflow(f"{label}: canonical weight {a} overflows k={k}")
        pts[label] = PointWeight(n, tuple(a))
    return ParData(r, d, g, k, pts)


def _check_profile(om: ParData, profile: SubsheafProfile):
    if not 0 <= profile.r1 <= om.r:
        raise BadProfile("subsheaf rank out of range")
    for label, pw in om.points.items():
        if label not in profile.m:
            raise BadProfile(f"profile has no vector at {label}")
        m = tuple(profile.m[label])
        if len(m) != len(pw.n) or any(not 0 <= a <= b for a, b in zip(m, pw.n)):
            raise BadProfile(f"{label}: m={m} not within 0 <= m_i <= n_i={pw.n}")
        if sum(m) != profile.r1:
            raise BadProfile(f"{label}: m={m} does not sum to r1={profile.r1}")


def par_chi(om: ParData, profile: SubsheafProfile | None = None) -> Fraction:
    """chi + (1/k) sum_x sum_i a_i(x) m_i(x); profile None means E itself."""
    if profile is None:
        mass = sum(a * n for pw in om.points.values() for a, n in zip(pw.a, pw.n))
        return Fraction(om.chi) + Fraction(mass, om.k)
    _check_profile(om, profile)
    chi = profile.deg + profile.r1 * (1 - om.g)
    mass = sum(a * m for label, pw in om.points.items() for a, m in zip(pw.a, profile.m[label]))
    return Fraction(chi) + Fraction(mass, om.k)


def semistability_gap(om: ParData, profile: SubsheafProfile) -> Fraction:
    """par chi(F) - r1 * par chi(E) / r; positive means F destabilizes."""
    return par_chi(om, profile) - Fraction(profile.r1, om.r) * par_chi(om)


def ell(om: ParData) -> Fraction:
    """(k chi - sum_x sum_i d_i(x) r_i(x)) / r."""
    total = sum(d * rr for pw in om.points.values() for d, rr in zip(pw.steps, pw.partial_ranks))
    return Fraction(om.k * om.chi - total, om.r)


def sigma_formula(n, w, r, r1, m):
    """Sum_j (r1 - sum_{i<=j} m_i)(n_j - m_j) + sum_j (r1 n_j - r m_j) w_j.

    w are the weight fractions a_j/k; they may be Fractions or Infinitesimals.
    """
    first = 0
    running = 0
    for nj, mj in zip(n, m):
        running += mj
        first += (r1 - running) * (nj - mj)
    second = 0
    for nj, mj, wj in zip(n, m, w):
        second = second + (r1 * nj - r * mj) * wj
    return second + first


def sigma_value(om: ParData, x: str, profile) -> Fraction:
    """Sigma_{x, r1} of the given intersection vector at x.

    profile is a SubsheafProfile or a pair (r1, m).
    """
    pw = om.points[x]
    if isinstance(profile, SubsheafProfile):
        r1, m = profile.r1, profile.m.get(x)
    else:
        r1, m = profile
    if m is None:
        raise BadProfile(f"no vector at {x}")
    m = tuple(m)
    if len(m) != len(pw.n) or any(not 0 <= a <= b for a, b in zip(m, pw.n)) or sum(m) != r1:
        raise BadProfile(f"{x}: invalid m={m} for n={pw.n}, r1={r1}")
    return sigma_formula(pw.n, om.weights(x), om.r, r1, m)


def m_vectors(n, r1):
    """All m with 0 <= m_i <= n_i and sum m_i = r1."""
    if not n:
        if r1 == 0:
            yield ()
        return
    head, rest = n[0], n[1:]
    cap = sum(rest)
    for v in range(max(0, r1 - cap), min(head, r1) + 1):
        for tail in m_vectors(rest, r1 - v):
            yield (v,) + tail


def sigma_min(om: ParData, x: str, r1: int) -> Fraction:
    if not 0 < r1 < om.r:
        raise BadProfile("need 0 < r1 < r")
    pw = om.points[x]
    w = om.weights(x)
    return min(sigma_formula(pw.n, w, om.r, r1, m) for m in m_vectors(pw.n, r1))


@dataclass(frozen=True)
class CodimBounds:
    first: Fraction | None   # Prop-style bound (1)
    second: Fraction | None  # Prop-style bound (2), same value
    sharp: Fraction | None   # min_{r1} r1(r-r1)(g-1) + sum_x sigma_min

    def __iter__(self):
        return iter((self.first, self.second))


def codim_bounds(om: ParData) -> CodimBounds:
    r, g = om.r, om.g
    if r < 2:
        return CodimBounds(None, None, None)
    base = min(r1 * (r - r1) * (g - 1) for r1 in range(1, r))
    coarse = Fraction(base) + Fraction(len(om.points), om.k)
    sharp = min(
        Fraction(r1 * (r - r1) * (g - 1)) + sum((sigma_min(om, x, r1) for x in om.points), Fraction(0))
        for r1 in range(1, r)
    )
    return CodimBounds(coarse, coarse, sharp)


def hecke_transform(om: ParData, z: str) -> ParData:
    """Degree d-1; at z: a'_1 = 0, a'_i = a_{i+1} - a_2 (2 <= i <= r-1), a'_r = k - a_2."""
    pw = om.points[z]
    r = om.r
    if pw.n != (1,) * r:
        raise BadHeckePoint(f"type at {z} is {pw.n}, not a full flag")
    a = pw.a
    if r == 1:
        raise BadHeckePoint("rank 1 has no Hecke step")
    new = [0] + [a[i] - a[1] for i in range(2, r)] + [om.k - a[1]]
    out = PointWeight(pw.n, tuple(new))
    check_point(out, r, om.k, z)
    return om.replace_point(z, out, d=om.d - 1)


# formal infinitesimal ------------------------------------------------------------

class Infinitesimal:
    """q_0 + q_1 t + q_2 t^2 + ... with t a positive infinitesimal.

    Ordering is lexicographic on (q_0, q_1, ...), constant term first.
    """

    __slots__ = ("coeffs",)

    def __init__(self, *coeffs):
        c = [Fraction(v) for v in coeffs] or [Fraction(0)]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def t(cls):
        return cls(0, 1)

    @staticmethod
    def lift(v):
        return v if isinstance(v, Infinitesimal) else Infinitesimal(v)

    def __add__(self, other):
        if not isinstance(other, (Infinitesimal, int, Fraction)):
            return NotImplemented
        o = Infinitesimal.lift(other).coeffs
        n = max(len(self.coeffs), len(o))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o + (Fraction(0),) * (n - len(o))
        return Infinitesimal(*(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return Infinitesimal(*(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-Infinitesimal.lift(other))

    def __rsub__(self, other):
        return Infinitesimal.lift(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Infinitesimal(*(c * other for c in self.coeffs))
        if not isinstance(other, Infinitesimal):
            return NotImplemented
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Infinitesimal(*out)

    __rmul__ = __mul__

    def sign(self):
        for c in self.coeffs:
            if c:
                return 1 if c > 0 else -1
        return 0

    def _cmp(self, other):
        return (self - Infinitesimal.lift(other)).sign()

    def __eq__(self, other):
        if not isinstance(other, (Infinitesimal, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash(self.coeffs[0]) if len(self.coeffs) == 1 else hash(self.coeffs)

    def __repr__(self):
        parts = [str(self.coeffs[0])]
        for i, c in enumerate(self.coeffs[1:], 1):
            if c:
                parts.append(f"{c}*t" + (f"^{i}" if i > 1 else ""))
        return " + ".join(parts)


# the omega^t family ---------------------------------------------------------------

CANONICAL_LABELS = ("y1", "z1", "z2")


def omega_t_weights(r: int, Iprime, z: str, t):
    """Weight fractions of omega^t: label -> (type, (a_1/k, ..., a_r/k)).

    t may be a Fraction or an Infinitesimal (e.g. Infinitesimal.t() for 0+).
    """
    Iprime = list(Iprime)
    if z not in Iprime:
        raise ValueError("z must belong to I'")
    if set(Iprime) & set(CANONICAL_LABELS):
        raise ValueError("I' labels clash with y1, z1, z2")
    size = len(Iprime)
    bound = Fraction(1, size * (r - 1) * r)
    lo, hi = -bound, bound
    if not (lo < t < hi):
        raise BadT(f"|t| must be < {bound}")
    out = {}
    canon = canonical_weight({"y1": (r - 1, 1), "z1": (1,) * r, "z2": (1,) * r}, r)
    for label in CANONICAL_LABELS:
        pw = canon.points[label]
        out[label] = (pw.n, tuple(Fraction(a, canon.k) for a in pw.a))
    base = tuple(Fraction(i, size * (r - 1) * r) for i in range(r))
    for x in Iprime:
        w = base
        if x == z:
            w = base[:-1] + (Fraction(1, size * r) + t,)
        out[x] = ((1,) * r, w)
    return out


def omega_t_family(r: int, Iprime, z: str, t, d: int = 0, g: int = 0) -> ParData:
    """omega^t as integer weights over the least common denominator k."""
    t = Fraction(t)
    fr = omega_t_weights(r, Iprime, z, t)
    k = lcm(*(w.denominator for _, ws in fr.values() for w in ws))
    pts = {label: PointWeight(n, tuple(int(w * k) for w in ws)) for label, (n, ws) in fr.items()}
    return ParData(r, d, g, k, pts)


@dataclass(frozen=True)
class ExtraPointSigmaReport:
    r: int
    min_r1_1: object
    min_r1_rm1: object
    bound: object
    holds: bool


def extra_point_sigma_bounds(r: int) -> ExtraPointSigmaReport:
    """Sigma_{z,1} and Sigma_{z,r-1} of omega^{0+} at the single extra point z,
    minimized over all m-vectors and compared with 1/2 + t symbolically."""
    t = Infinitesimal.t()
    fr = omega_t_weights(r, ["z"], "z", t)
    n, w = fr["z"]
    vals = {}
    for r1 in (1, r - 1):
        vals[r1] = min(
            (Infinitesimal.lift(sigma_formula(n, w, r, r1, m)) for m in m_vectors(n, r1)),
        )
    bound = t + Fraction(1, 2)
    holds = vals[1] >= bound and vals[r - 1] >= bound
    return ExtraPointSigmaReport(r, vals[1], vals[r - 1], bound, holds)


# GPS calculus ---------------------------------------------------------------------

@dataclass(frozen=True)
class TwoComponent:
    """Data for a curve with two components: I = I1 ⊔ I2 and polarization c1, c2."""
    omega: ParData
    part1: frozenset
    c1: int
    c2: int

    @property
    def part2(self):
        return frozenset(self.omega.points) - self.part1

    def top_weight_sum(self, part):
        return sum(self.omega.points[x].a[-1] for x in part)


@dataclass(frozen=True)
class GPSProfile:
    r_F: object            # int, or pair (r1, r2) on two components
    parchi_F: Fraction
    dimQ_F: int
    alpha: Fraction
    dimQ: int
    two: TwoComponent | None = None

    def __post_init__(self):
        if not 0 <= self.dimQ_F <= self.dimQ:
            raise BadProfile("need 0 <= dim Q^F <= dim Q")
        if not 0 < Fraction(self.alpha) <= 1:
            raise BadProfile("need 0 < alpha <= 1")


def rank_on_two(two: TwoComponent, ranks) -> Fraction:
    r1, r2 = ranks
    return Fraction(two.c1 * r1 + two.c2 * r2, two.c1 + two.c2)


def modification(two: TwoComponent, ranks) -> Fraction:
    """m(F) = (r(F)-r1)/k sum_{I1} a_top + (r(F)-r2)/k sum_{I2} a_top."""
    rF = rank_on_two(two, ranks)
    k = two.omega.k
    return ((rF - ranks[0]) * two.top_weight_sum(two.part1)
            + (rF - ranks[1]) * two.top_weight_sum(two.part2)) / k


def gps_alpha_semistable(prof: GPSProfile, parchi_E, r_E) -> str:
    """'stable', 'strictly-semistable' or 'unstable' for the single test object F."""
    alpha = Fraction(prof.alpha)
    parchi_E = Fraction(parchi_E)
    if prof.two is not None:
        ranks = prof.r_F if isinstance(prof.r_F, tuple) else (prof.r_F, prof.r_F)
        rF = rank_on_two(prof.two, ranks)
        lhs = Fraction(prof.parchi_F) + modification(prof.two, ranks) - prof.dimQ_F * alpha
    else:
        if isinstance(prof.r_F, tuple):
            raise BadProfile("rank pair needs two-component data")
        rF = Fraction(prof.r_F)
        lhs = Fraction(prof.parchi_F) - prof.dimQ_F * alpha
    rhs = rF * (parchi_E - prof.dimQ * alpha) / r_E
    if lhs < rhs:
        return "stable"
    if lhs == rhs:
        return "strictly-semistable"
    return "unstable"


def n_j_omega(two: TwoComponent, chi=None, ell_value=None):
    """(n_1, n_2) with n_j = (1/k)(r c_j/(c1+c2) ell + sum_{I_j} sum_i d_i r_i)."""
    om = two.omega
    if ell_value is None:
        if chi is not None:
            ell_value = Fraction(om.k * chi - _dr_sum(om, om.points), om.r)
        else:
            ell_value = ell(om)
    out = []
    for cj, part in ((two.c1, two.part1), (two.c2, two.part2)):
        val = Fraction(om.r * cj, two.c1 + two.c2) * ell_value + _dr_sum(om, part)
        out.append(val / om.k)
    return tuple(out)


def _dr_sum(om, labels):
    return sum(d * rr for x in labels for d, rr in zip(om.points[x].steps, om.points[x].partial_ranks))


def n_j_from_numbers(r, k, c1, c2, ell_value, dr1, dr2):
    """n_j^omega from raw numbers (ell and the two sums of d_i r_i)."""
    return tuple(Fraction(r * cj, c1 + c2) * Fraction(ell_value) / k + Fraction(dr, k)
                 for cj, dr in ((c1, dr1), (c2, dr2)))


def chi_range_check(chi1, chi2, n1, n2, r, dimQ_E1, dimQ_E2, alpha) -> bool:
    """Both the alpha-refined range and the coarse range n_j <= chi_j <= n_j + r."""
    alpha = Fraction(alpha)
    fine = (n1 + (r - dimQ_E2) * alpha <= chi1 <= n1 + dimQ_E1 * alpha
            and n2 + (r - dimQ_E1) * alpha <= chi2 <= n2 + dimQ_E2 * alpha)
    coarse = n1 <= chi1 <= n1 + r and n2 <= chi2 <= n2 + r
    return bool(fine and coarse)


# config text format ---------------------------------------------------------------

def parse_pardata(text: str) -> ParData:
    """Read 'rank=', 'degree=', 'genus=', 'k=' lines and 'point <label> type=.. weight=..' lines."""
    head = {}
    pts = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("point"):
            fields = line.split()
            if len(fields) < 4:
                raise ParseError(f"line {lineno}: point needs label, type and weight")
            label = fields[1]
            kv = dict(f.split("=", 1) for f in fields[2:])
            try:
                n = tuple(int(v) for v in kv["type"].split(","))
                a = tuple(int(v) for v in kv["weight"].split(","))
            except (KeyError, ValueError) as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            pts[label] = PointWeight(n, a)
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in ("rank", "degree", "genus", "k"):
            raise ParseError(f"line {lineno}: unknown key {key}")
        head[key] = int(val)
    missing = {"rank", "k"} - set(head)
    if missing:
        raise ParseError(f"missing {sorted(missing)}")
    return ParData(head["rank"], head.get("degree", 0), head.get("genus", 0), head["k"], pts)


def format_pardata(om: ParData) -> str:
    lines = [f"rank={om.r}", f"degree={om.d}", f"genus={om.g}", f"k={om.k}"]
    for label, pw in om.points.items():
        lines.append(f"point {label} type={','.join(map(str, pw.n))} weight={','.join(map(str, pw.a))}")
    return "\n".join(lines) + "\n"


def fmt(q) -> str:
    """Exact rational as num/den (integers printed as n/1)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
