"""Parabolic structures on the trivial bundle O^r over P^1 with flags at y1, z1, z2.

Everything is pulled back to W = H^0(O^r) = F_q^r, where evaluation at any
point is the identity.  At a point with type (n_1, ..., n_{l+1}) the flag is
recorded kernel side: E_x = K_0 > K_1 > ... > K_{l+1} = 0 with
dim K_{i-1}/K_i = n_i, and the weight a_i sits on K_{i-1}/K_i.  A full flag is
an invertible matrix with columns c_1..c_r and E_{x,j} = K_j = span(c_1..c_{r-j}),
so the leading column spans the deepest piece.  At y1 the datum is the line
E_{y1,1} = K_1 (type (r-1, 1)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from frobsplit import linalg
from frobsplit.errors import BadConfig, ParseError, UnsupportedRank
from frobsplit.gfpoly import INF, is_prime
from frobsplit.parweights import ParData, SubsheafProfile, canonical_weight, par_chi


@dataclass
class FlagPoint:
    at: object                  # int in F_q, or INF
    kind: str                   # 'flag', 'line' or 'mark' (position only)
    data: np.ndarray = None     # r x r matrix for 'flag', r x 1 column for 'line'

    def chain(self, n, q):
        """Kernel-side subspaces K_0 = W, K_1, ..., K_{l+1} = 0 for type n."""
        r = sum(n)
        if self.kind == "line":
            if tuple(n) != (r - 1, 1):
                raise BadConfig(f"a line datum only carries type ({r - 1}, 1), not {tuple(n)}")
            return [np.eye(r, dtype=np.int64), self.data, np.zeros((r, 0), dtype=np.int64)]
        if self.kind != "flag":
            raise BadConfig("point carries no flag")
        out, depth = [], r
        out.append(self.data[:, :r])
        for v in n:
            depth -= v
            out.append(self.data[:, :depth])
        return out

    def piece(self, j):
        """E_{x,j} = span(c_1..c_{r-j}) of a full flag (j = 0..r)."""
        r = self.data.shape[0]
        return self.data[:, : r - j]


@dataclass
class FlagConfig:
    r: int
    q: int
    points: dict = field(default_factory=dict)   # label -> FlagPoint

    def __post_init__(self):
        if not is_prime(self.q):
            raise BadConfig("field must be a prime")
        seen = set()
        for label, pt in self.points.items():
            key = "inf" if pt.at is INF else int(pt.at) % self.q
            if key in seen:
                raise BadConfig(f"{label}: marked points must be distinct")
            seen.add(key)
            if pt.kind == "flag":
                pt.data = np.asarray(pt.data, dtype=np.int64) % self.q
                if pt.data.shape != (self.r, self.r) or linalg.det(pt.data, self.q) == 0:
                    raise BadConfig(f"{label}: flag matrix must be invertible {self.r}x{self.r}")
            elif pt.kind == "line":
                pt.data = np.asarray(pt.data, dtype=np.int64).reshape(self.r, 1) % self.q
                if not pt.data.any():
                    raise BadConfig(f"{label}: zero vector does not span a line")

    def flag(self, label):
        pt = self.points.get(label)
        if pt is None or pt.kind != "flag":
            raise BadConfig(f"{label}: full flag required")
        return pt

    def line(self):
        pt = self.points.get("y1")
        if pt is None or pt.kind != "line":
            raise BadConfig("y1: line datum required")
        return pt.data

    def transformed(self, g):
        """Apply g in GL_r(F_q) to every flag datum."""
        g = np.asarray(g, dtype=np.int64) % self.q
        pts = {}
        for label, pt in self.points.items():
            data = None if pt.data is None else linalg.matmul(g, pt.data, self.q)
            pts[label] = FlagPoint(pt.at, pt.kind, data)
        return FlagConfig(self.r, self.q, pts)


def standard_flags(r, q, line=None, at=None):
    """z1 = coordinate flag at 0, z2 = opposite flag at inf, y1 = span(1, ..., 1) at 1."""
    at = at or {"y1": 1, "z1": 0, "z2": INF}
    ident = np.eye(r, dtype=np.int64)
    line = np.ones((r, 1), dtype=np.int64) if line is None else line
    return FlagConfig(r, q, {
        "y1": FlagPoint(at["y1"], "line", line),
        "z1": FlagPoint(at["z1"], "flag", ident),
        "z2": FlagPoint(at["z2"], "flag", ident[:, ::-1].copy()),
    })


def omega_c0(r: int) -> ParData:
    """Canonical weights for y1:(r-1,1), z1, z2 full flags, degree 0, genus 0."""
    return canonical_weight({"y1": (r - 1, 1), "z1": (1,) * r, "z2": (1,) * r}, r, 0, 0)


# condition (5.12) ---------------------------------------------------------------

@dataclass
class Genericity:
    holds: bool
    witness: str = ""


def genericity_check_512(cfg: FlagConfig) -> Genericity:
    """(a) E_{y1,1} not inside E_{z1,r-i+1} + E_{z2,i} (1 <= i <= r);
    (b) E_{z1,r-i} ∩ E_{z2,i} = 0 (1 <= i <= r-1)."""
    r, q = cfg.r, cfg.q
    z1, z2, ell = cfg.flag("z1"), cfg.flag("z2"), cfg.line()
    for i in range(1, r + 1):
        S = linalg.hstack(z1.piece(r - i + 1), z2.piece(i))
        if S.shape[1] and linalg.contains(S, ell, q):
            return Genericity(False, f"(a) fails at i={i}")
    for i in range(1, r):
        if linalg.intersect(z1.piece(r - i), z2.piece(i), q).shape[1]:
            return Genericity(False, f"(b) fails at i={i}")
    return Genericity(True)


# special loci -----------------------------------------------------------------

@dataclass
class SpecialLoci:
    lines: list     # L_1..L_r
    Hs: list        # H_1..H_{r-1}
    Hz: np.ndarray


def _point_value(v0, v1, at, q):
    return v1 if at is INF else (v0 + int(at) * v1) % q


def special_loci(cfg: FlagConfig, z=None) -> SpecialLoci:
    r, q = cfg.r, cfg.q
    if not genericity_check_512(cfg).holds:
        raise BadConfig("configuration fails (5.12)")
    z1, z2, ell = cfg.flag("z1"), cfg.flag("z2"), cfg.line()
    if z is None:
        zp = cfg.points.get("z")
        if zp is None:
            raise BadConfig("point z is required for H_z")
        z = zp.at
    lines = []
    for i in range(1, r + 1):
        L = linalg.intersect(z1.piece(r - i), z2.piece(i - 1), q)
        if L.shape[1] != 1:
            raise BadConfig(f"L_{i} is not a line")
        lines.append(L)
    Hs = []
    for i in range(1, r):
        parts = [ell] + [lines[j - 1] for j in range(1, r + 1) if j not in (i, i + 1)]
        H = linalg.span(linalg.hstack(*parts), q)
        if H.shape[1] != r - 1:
            raise BadConfig(f"H_{i} is not a hyperplane")
        Hs.append(H)
    Hz = _hz(cfg, z)
    return SpecialLoci(lines, Hs, Hz)


def _hz(cfg, z):
    """H_z = W' + span(u(z)), u(t) = v0 + t v1 of degree one with u(z1) in E_{z1,1},
    u(z2) in E_{z2,1} and E_{y1,1} inside W' + span(u(y1)); W' = E_{z1,1} ∩ E_{z2,1}."""
    r, q = cfg.r, cfg.q
    z1, z2 = cfg.flag("z1"), cfg.flag("z2")
    ell = cfg.line()
    y1 = cfg.points["y1"].at
    Wp = linalg.intersect(z1.piece(1), z2.piece(1), q)
    if Wp.shape[1] != r - 2:
        raise BadConfig("E_{z1,1} ∩ E_{z2,1} does not have dimension r-2")
    rows = []

    def at_point(form, at):
        # the form applied to u(at) as a row acting on (v0, v1)
        form = np.asarray(form, dtype=np.int64).reshape(-1)
        if at is INF:
            return np.concatenate([np.zeros(r, dtype=np.int64), form])
        return np.concatenate([form, form * int(at) % q]) % q

    for flag, at in ((z1, cfg.points["z1"].at), (z2, cfg.points["z2"].at)):
        for lam in linalg.annihilator(flag.piece(1), q):
            rows.append(at_point(lam, at))
    Wl = linalg.span(linalg.hstack(Wp, ell), q)
    if Wl.shape[1] != r - 1:
        raise BadConfig("E_{y1,1} lies in W'")
    for mu in linalg.annihilator(Wl, q):
        rows.append(at_point(mu, y1))
    sols = linalg.nullspace(np.array(rows, dtype=np.int64), q)
    for c in range(sols.shape[1]):
        v0, v1 = sols[:r, c], sols[r:, c]
        if linalg.contains(Wp, v0, q) and linalg.contains(Wp, v1, q):
            continue
        u = _point_value(v0, v1, z, q).reshape(r, 1)
        if linalg.contains(Wp, u, q):
            raise BadConfig("u(z) lies in W'")
        return linalg.span(linalg.hstack(Wp, u), q)
    raise BadConfig("no degree-one section u outside W'")


# semistability -------------------------------------------------------------------

def intersection_profile(U, chain, q):
    """n_i^F = dim(U ∩ K_{i-1}) - dim(U ∩ K_i)."""
    return _profile_from_forms(U, [linalg.annihilator(K, q) for K in chain], q)


def _profile_from_forms(U, forms, q):
    # dim(U ∩ K) = dim U - rank(Ann(K) U)
    k = U.shape[1]
    dims = [k - (linalg.rank(linalg.matmul(A, U, q), q) if A.shape[0] else 0) for A in forms]
    return tuple(a - b for a, b in zip(dims, dims[1:]))


def _chain_forms(cfg, om):
    return {label: [linalg.annihilator(K, cfg.q) for K in cfg.points[label].chain(pw.n, cfg.q)]
            for label, pw in om.points.items()}


def subspace_profile(cfg, om: ParData, U, forms=None):
    if forms is None:
        forms = _chain_forms(cfg, om)
    m = {label: _profile_from_forms(U, f, cfg.q) for label, f in forms.items()}
    return SubsheafProfile(U.shape[1], 0, m)


@lru_cache(maxsize=None)
def all_subspaces(r, q, k):
    """Every k-dimensional subspace of F_q^r, once, from RREF row spaces (as column bases)."""
    return tuple(_rref_subspaces(r, q, k))


def _rref_subspaces(r, q, k):
    for pivots in combinations(range(r), k):
        free = [(a, c) for a in range(k) for c in range(r) if c > pivots[a] and c not in pivots]
        for vals in product(range(q), repeat=len(free)):
            M = np.zeros((k, r), dtype=np.int64)
            for a, c in enumerate(pivots):
                M[a, c] = 1
            for (a, c), v in zip(free, vals):
                M[a, c] = v
            yield M.T.copy()


def _adapted_subspaces(cfg, k):
    q = cfg.q
    vecs = []
    for pt in cfg.points.values():
        if pt.data is not None:
            vecs += [pt.data[:, c:c + 1] for c in range(pt.data.shape[1])]
    seen = []
    for combo in combinations(range(len(vecs)), k):
        U = linalg.span(linalg.hstack(*[vecs[i] for i in combo]), q)
        if U.shape[1] == k and not any(linalg.same_space(U, V, q) for V in seen):
            seen.append(U)
            yield U


@dataclass
class Destabilizer:
    subspace: np.ndarray
    gap: Fraction           # r * par chi(U) - r1 * par chi(E); >= 0 means not stable
    profile: SubsheafProfile


def subspace_destabilizer_search(cfg: FlagConfig, om: ParData, exhaustive=None):
    """Degree-0 subbundles U (x) O: the one maximizing r*par chi(U) - r1*par chi(E).

    Returns (verdict, witness) with verdict in {stable, strictly-semistable,
    unstable} restricted to this class of subsheaves; witness is None when no
    proper subspace reaches equality.
    """
    r, q = cfg.r, cfg.q
    if om.r != r:
        raise BadConfig("rank of weights and configuration differ")
    if exhaustive is None:
        exhaustive = r <= 4 and q <= 7
    total = par_chi(om)
    forms = _chain_forms(cfg, om)
    best = None
    for k in range(1, r):
        spaces = all_subspaces(r, q, k) if exhaustive else _adapted_subspaces(cfg, k)
        for U in spaces:
            prof = subspace_profile(cfg, om, U, forms)
            gap = r * par_chi(om, prof) - k * total
            if best is None or gap > best.gap:
                best = Destabilizer(U, gap, prof)
    if best is None or best.gap < 0:
        return "stable", None
    return ("strictly-semistable" if best.gap == 0 else "unstable"), best


# rank 2 brute force ---------------------------------------------------------------

def _sylvester_resultant(f, g, q):
    """Resultant of two binary forms of formal degree d (coefficient lists, low degree first)."""
    d = len(f) - 1
    if d == 0:
        return 1 if (f[0] % q or g[0] % q) else 0
    n = 2 * d
    S = np.zeros((n, n), dtype=np.int64)
    for i in range(d):
        S[i, i:i + d + 1] = f[::-1]
        S[d + i, i:i + d + 1] = g[::-1]
    return linalg.det(S % q, q)


def _form_value(coeffs, at, q):
    # homogeneous form sum c_i s^{d-i} t^i at [1:t], or at [0:1] for infinity
    if at is INF:
        return coeffs[-1] % q
    return sum(c * pow(int(at), i, q) for i, c in enumerate(coeffs)) % q


def rank2_d_max(om: ParData):
    """Largest d with 1 - d + mass >= par chi(E)/2 (mass = sum of top weights / k)."""
    mass = sum(Fraction(pw.a[-1], om.k) for pw in om.points.values())
    bound = 1 + mass - par_chi(om) / 2
    return max(0, int(bound // 1))


def _normalized_pairs(d, q):
    size = 2 * (d + 1)
    for vals in product(range(q), repeat=size):
        first = next((v for v in vals if v), None)
        if first == 1:
            yield list(vals[: d + 1]), list(vals[d + 1:])


def rank2_bruteforce(cfg: FlagConfig, om: ParData, d_max=None):
    """Every saturated O(-d) in O^2 (0 <= d <= d_max) against par chi(E)/2.

    A sub line bundle is a pair of binary forms (f, g) of degree d without a
    common zero, up to scalar.  Its weight at x is a_2 when (f(x), g(x)) lies in
    E_{x,1}, else a_1.
    """
    if cfg.r != 2 or om.r != 2:
        raise UnsupportedRank("rank2_bruteforce needs r = 2")
    q, k = cfg.q, om.k
    if d_max is None:
        d_max = rank2_d_max(om)
    marks = []
    for label, pw in om.points.items():
        if len(pw.n) == 1:
            marks.append((None, None, pw.a[0], pw.a[0]))
            continue
        K1 = cfg.points[label].chain(pw.n, q)[1][:, 0]
        marks.append((cfg.points[label].at, K1, pw.a[0], pw.a[1]))
    target = k * par_chi(om)          # compare 2 * k * par chi(F) with it
    best = None
    for d in range(d_max + 1):
        base = 2 * k * (1 - d - om.g)
        for f, g in _normalized_pairs(d, q):
            score = base
            for at, K1, low, high in marks:
                if K1 is None:
                    score += 2 * low
                    continue
                fx, gx = _form_value(f, at, q), _form_value(g, at, q)
                inside = (fx * int(K1[1]) - gx * int(K1[0])) % q == 0
                score += 2 * (high if inside else low)
            if best is not None and score <= best:
                continue
            if _sylvester_resultant(f, g, q) == 0:
                continue
            best = score
    if best is None or best < target:
        return "stable"
    return "strictly-semistable" if best == target else "unstable"


# single orbit -----------------------------------------------------------------------

def canonical_form(cfg: FlagConfig):
    """g with g.z1 = coordinate flag, g.z2 = opposite flag, g.E_{y1,1} = span(1,...,1)."""
    r, q = cfg.r, cfg.q
    loci = [linalg.intersect(cfg.flag("z1").piece(r - i), cfg.flag("z2").piece(i - 1), q) for i in range(1, r + 1)]
    if any(L.shape[1] != 1 for L in loci):
        raise BadConfig("flags at z1, z2 are not transverse")
    basis = linalg.hstack(*loci)
    coeffs = linalg.solve(basis, cfg.line(), q)
    if coeffs is None or not all(int(c) % q for c in coeffs):
        raise BadConfig("E_{y1,1} has a zero coordinate in the adapted basis")
    scaled = basis * coeffs.reshape(1, -1) % q
    g = linalg.inverse(scaled, q)
    return g, cfg.transformed(g)


def same_flag(A, B, q):
    r = A.shape[0]
    return all(linalg.same_space(A[:, :t], B[:, :t], q) for t in range(1, r))


def same_orbit(a: FlagConfig, b: FlagConfig):
    """An explicit g with g.a = b when both pass (5.12), else None."""
    q = a.q
    if not (genericity_check_512(a).holds and genericity_check_512(b).holds):
        return None
    ga, _ = canonical_form(a)
    gb, _ = canonical_form(b)
    g = linalg.matmul(linalg.inverse(gb, q), ga, q)
    moved = a.transformed(g)
    ok = (same_flag(moved.flag("z1").data, b.flag("z1").data, q)
          and same_flag(moved.flag("z2").data, b.flag("z2").data, q)
          and linalg.same_space(moved.line(), b.line(), q))
    return g if ok else None


# random configurations ----------------------------------------------------------------

def random_config(r, q, rng, at=None) -> FlagConfig:
    at = at or {"y1": 1, "z1": 0, "z2": INF}

    def invertible():
        while True:
            M = rng.integers(0, q, size=(r, r))
            if linalg.det(M, q):
                return M

    def vector():
        while True:
            v = rng.integers(0, q, size=(r, 1))
            if v.any():
                return v

    return FlagConfig(r, q, {
        "y1": FlagPoint(at["y1"], "line", vector()),
        "z1": FlagPoint(at["z1"], "flag", invertible()),
        "z2": FlagPoint(at["z2"], "flag", invertible()),
    })


# config text format --------------------------------------------------------------------

def _parse_at(text, q):
    return INF if text.lower() in ("inf", "infinity", "oo") else int(text) % q


def _parse_matrix(text):
    rows = [r.replace(",", " ").split() for r in text.split(";") if r.strip()]
    return np.array([[int(v) for v in row] for row in rows], dtype=np.int64)


def parse_flag_config(text: str) -> FlagConfig:
    """Grammar: 'rank=', 'field=', then lines
        point <label> at=<t|inf> [flag=<rows separated by ;>]
        hyperplane <label> at=<t> normal=<row>   (the normal spans the line E_{y1,1})
        line <label> at=<t> span=<row>
    """
    head, pts = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split(None, 1)[0]
        if word in ("point", "hyperplane", "line"):
            parts = line.split(None, 2)
            if len(parts) < 3:
                raise ParseError(f"line {lineno}: expected '{word} <label> key=value ...'")
            label = parts[1]
            kv = {}
            for chunk in parts[2].split():
                if "=" in chunk:
                    key, val = chunk.split("=", 1)
                    kv[key] = val
                elif kv:
                    last = list(kv)[-1]
                    kv[last] += " " + chunk
            if "at" not in kv:
                raise ParseError(f"line {lineno}: missing at=")
            pts[label] = (word, kv, lineno)
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in ("rank", "field"):
            raise ParseError(f"line {lineno}: unknown key {key}")
        head[key] = int(val)
    if "rank" not in head or "field" not in head:
        raise ParseError("rank= and field= are required")
    r, q = head["rank"], head["field"]
    points = {}
    for label, (word, kv, lineno) in pts.items():
        try:
            at = _parse_at(kv["at"], q)
            if word == "point":
                if "flag" in kv:
                    points[label] = FlagPoint(at, "flag", _parse_matrix(kv["flag"]))
                else:
                    points[label] = FlagPoint(at, "mark")
            else:
                vec = _parse_matrix(kv["normal" if word == "hyperplane" else "span"]).reshape(-1, 1)
                points[label] = FlagPoint(at, "line", vec)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return FlagConfig(r, q, points)


def format_flag_config(cfg: FlagConfig) -> str:
    out = [f"rank={cfg.r}", f"field={cfg.q}"]
    for label, pt in cfg.points.items():
        at = "inf" if pt.at is INF else str(pt.at)
        if pt.kind == "flag":
            rows = ";".join(",".join(str(int(v)) for v in row) for row in pt.data)
            out.append(f"point {label} at={at} flag={rows}")
        elif pt.kind == "line":
            out.append(f"line {label} at={at} span={','.join(str(int(v)) for v in pt.data[:, 0])}")
        else:
            out.append(f"point {label} at={at}")
    return "\n".join(out) + "\n"
