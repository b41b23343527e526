"""Full flags of W = F_p^r near a point, the line/hyperplane configuration
used to build the anticanonical section sigma = d_1...d_{r-1} e_1...e_{r-1},
and the chain of sub-flag varieties R_r > R_{r-1} > ... > R_1 = {w}.

A chart is a frame g*N(x): N is unipotent lower triangular with entries
x_ij (i > j) and V_i is the span of its first i columns.  Changing g moves
the chart center; the split coefficient does not depend on it, but vanishing
orders along a locus are read off in a chart where the locus is a coordinate
subspace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from frobsplit import linalg
from frobsplit.errors import DegenerateConfig, NotInChart
from frobsplit.gfpoly import (
    INF,
    Poly,
    PrimeField,
    det_bareiss,
    divide_by_variable,
    restrict,
    vanishing_order,
)
from frobsplit.splitcheck import divisor_propagation_check, split_coefficient


# charts ------------------------------------------------------------------------

def lower_vars(r):
    """Chart variable labels in order x21, x31, x32, x41, ..."""
    return [(i, j) for i in range(2, r + 1) for j in range(1, i)]


@dataclass
class FlagChart:
    r: int
    p: int
    coords: list
    frame: list                      # r x r matrix of Polys, columns span the flag
    center: np.ndarray = None        # g with frame = g * N(x)
    translated: bool = False

    @property
    def nvars(self):
        return len(self.coords)

    @property
    def field(self):
        return self.frame[0][0].field

    def var(self, i, j):
        return self.coords.index((i, j))

    def columns(self, count):
        """First `count` frame columns as lists of Polys."""
        return [[self.frame[row][c] for row in range(self.r)] for c in range(count)]


def unipotent_frame(r, field, nvars, positions=None):
    """Lower unitriangular r x r matrix with x_ij in the slots given by positions."""
    if positions is None:
        positions = {ij: n for n, ij in enumerate(lower_vars(r))}
    N = [[Poly.const(field, nvars, 1 if a == b else 0) for b in range(r)] for a in range(r)]
    for (i, j), n in positions.items():
        N[i - 1][j - 1] = Poly.var(field, nvars, n)
    return N


def const_times(g, M, p):
    """Constant matrix g times a matrix of Polys."""
    r = len(M)
    cols = len(M[0])
    field, nvars = M[0][0].field, M[0][0].nvars
    out = []
    for a in range(r):
        row = []
        for b in range(cols):
            acc = Poly.zero(field, nvars)
            for c in range(r):
                if g[a][c] % p:
                    acc = acc + M[c][b].scale(int(g[a][c]))
            row.append(acc)
        out.append(row)
    return out


def big_cell_chart(r: int, p: int, center=None) -> FlagChart:
    if r < 2:
        raise ValueError("need r >= 2")
    field = PrimeField(p)
    coords = lower_vars(r)
    N = unipotent_frame(r, field, len(coords))
    g = np.eye(r, dtype=np.int64) if center is None else np.asarray(center, dtype=np.int64) % p
    if linalg.det(g, p) == 0:
        raise DegenerateConfig("chart center frame is singular")
    frame = N if center is None else const_times(g, N, p)
    return FlagChart(r, p, coords, frame, g, center is not None)


def vandermonde(r, p):
    """Deterministic general-position frame: entries (j+2)^i."""
    return np.array([[pow(j + 2, i, p) for j in range(r)] for i in range(r)], dtype=np.int64)


# the configuration ----------------------------------------------------------------

@dataclass
class SubspaceConfig:
    r: int
    p: int
    lines: list          # L_1..L_r as r x 1 columns
    generic: np.ndarray  # L
    H: np.ndarray        # r x (r-1)
    Hs: list             # H_1..H_{r-1}
    W: dict = field(default_factory=dict)   # i -> basis of W_i, 0 <= i <= r
    S: dict = field(default_factory=dict)   # i -> basis of S_i, 1 <= i <= r


def _e(r, i):
    v = np.zeros((r, 1), dtype=np.int64)
    v[i - 1, 0] = 1
    return v


def _sum(p, r, parts):
    parts = [x for x in parts if x.shape[1]]
    if not parts:
        return np.zeros((r, 0), dtype=np.int64)
    return linalg.span(linalg.hstack(*parts), p)


def w_s_index_sets(r):
    """i -> set of j with L_j in W_i (resp. S_i, which also contains L)."""
    W, S = {}, {}
    for i in range(1, r // 2 + 1):
        W[r + 1 - 2 * i] = set(range(i + 1, r + 2 - i))
        W[r - 2 * i] = set(range(i + 1, r + 1 - i))
        S[2 * i - 1] = set(range(1, r + 1)) - set(range(i, r + 2 - i))
        S[2 * i] = set(range(1, r + 1)) - set(range(i + 1, r + 2 - i))
    W[r] = set(range(1, r + 1))
    W.setdefault(0, set())
    return W, S


def standard_config(r: int, p: int) -> SubspaceConfig:
    if p <= 2:
        raise DegenerateConfig("need p > 2")
    lines = [_e(r, i) for i in range(1, r + 1)]
    L = np.ones((r, 1), dtype=np.int64)
    hcols = [_e(r, i) for i in range(2, r)] + [(_e(r, 1) - _e(r, r)) % p]
    H = linalg.hstack(*hcols) % p
    return build_config(r, p, lines, L, H)


def build_config(r, p, lines, L, H) -> SubspaceConfig:
    """Assemble H_i, W_i, S_i and verify every invariant by rank."""
    Wsets, Ssets = w_s_index_sets(r)
    Hs = [_sum(p, r, [L] + [lines[j - 1] for j in range(1, r + 1) if j not in (i, i + 1)])
          for i in range(1, r)]
    W = {i: _sum(p, r, [lines[j - 1] for j in sorted(js)]) for i, js in Wsets.items()}
    S = {i: _sum(p, r, [L] + [lines[j - 1] for j in sorted(js)]) for i, js in Ssets.items()}
    cfg = SubspaceConfig(r, p, lines, L, H, Hs, W, S)
    check_config(cfg)
    return cfg


def check_config(cfg: SubspaceConfig):
    r, p = cfg.r, cfg.p
    fail = []
    if linalg.dim(linalg.hstack(*cfg.lines), p) != r:
        fail.append("L_1..L_r do not span W")
    if linalg.dim(cfg.H, p) != r - 1:
        fail.append("H is not a hyperplane")
    for name, v in (("L", cfg.generic), ("L_1", cfg.lines[0]), ("L_r", cfg.lines[-1])):
        if linalg.contains(cfg.H, v, p):
            fail.append(f"{name} lies in H")
    for i in range(2, r):
        if not linalg.contains(cfg.H, cfg.lines[i - 1], p):
            fail.append(f"L_{i} is not in H")
    for i, Hi in enumerate(cfg.Hs, 1):
        if linalg.dim(Hi, p) != r - 1:
            fail.append(f"H_{i} is not a hyperplane")
    for i in range(1, r):
        if linalg.dim(cfg.W[i], p) != i:
            fail.append(f"dim W_{i} != {i}")
        if linalg.dim(cfg.S[i], p) != i:
            fail.append(f"dim S_{i} != {i}")
        if not linalg.contains(cfg.W[i + 1] if i + 1 in cfg.W else cfg.W[r], cfg.W[i], p):
            fail.append(f"W_{i} not inside W_{i + 1}")
    if fail:
        raise DegenerateConfig("; ".join(fail))


def special_loci_distinct(cfg: SubspaceConfig) -> bool:
    """The r lines L_i are pairwise distinct, and so are the r hyperplanes H_1..H_{r-1}, H."""
    p = cfg.p
    lines = cfg.lines
    hyps = cfg.Hs + [cfg.H]
    ok = all(not linalg.same_space(lines[a], lines[b], p)
             for a in range(len(lines)) for b in range(a + 1, len(lines)))
    return ok and all(not linalg.same_space(hyps[a], hyps[b], p)
                      for a in range(len(hyps)) for b in range(a + 1, len(hyps)))


# sections --------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisorSection:
    poly: Poly
    label: str
    divisor: str
    twist: int   # the section lives in det(V_twist)^{-1}


def _const_col(vec, field, nvars):
    return [Poly.const(field, nvars, int(v)) for v in np.asarray(vec).reshape(-1)]


def subspace_det(basis, frame, count):
    """det[basis | first `count` columns of frame] as a Poly."""
    r = len(frame)
    field, nvars = frame[0][0].field, frame[0][0].nvars
    cols = [_const_col(basis[:, j], field, nvars) for j in range(basis.shape[1])]
    cols += [[frame[row][c] for row in range(r)] for c in range(count)]
    return det_bareiss([[cols[c][row] for c in range(r)] for row in range(r)])


def sections_in_frame(frame, cfg: SubspaceConfig):
    r = cfg.r
    out = []
    for i in range(1, r):
        out.append(DivisorSection(subspace_det(cfg.W[i], frame, r - i), f"d{i}", f"D{i}", r - i))
    for i in range(1, r):
        out.append(DivisorSection(subspace_det(cfg.S[i], frame, r - i), f"e{i}", f"E{i}", r - i))
    return out


def divisor_sections(chart: FlagChart, cfg: SubspaceConfig):
    if (chart.r, chart.p) != (cfg.r, cfg.p):
        raise ValueError("chart and configuration disagree on (r, p)")
    return sections_in_frame(chart.frame, cfg)


def _product(polys, field, nvars):
    out = Poly.one(field, nvars)
    for f in polys:
        out = out * f
    return out


def sigma_in_frame(frame, cfg):
    secs = sections_in_frame(frame, cfg)
    return _product([s.poly for s in secs], frame[0][0].field, frame[0][0].nvars)


@dataclass
class MultidegreeReport:
    twists: dict          # label -> j with the section in det(V_j)^{-1}
    counts: dict          # j -> number of sections in det(V_j)^{-1}
    degrees: dict         # label -> total degree in the chart
    consistent: bool


def multidegree_report(sections, r) -> MultidegreeReport:
    twists = {s.label: s.twist for s in sections}
    counts = {j: sum(1 for s in sections if s.twist == j) for j in range(1, r)}
    degrees = {s.label: s.poly.degree() for s in sections}
    # each det(V_j)^{-1} appears twice, and a minor of j frame columns has degree <= j(r-j)
    ok = all(c == 2 for c in counts.values()) and all(
        0 <= degrees[s.label] <= s.twist * (r - s.twist) for s in sections)
    return MultidegreeReport(twists, counts, degrees, ok)


def sigma_lemma59(chart: FlagChart, cfg: SubspaceConfig):
    """sigma = d_1...d_{r-1} e_1...e_{r-1} in the chart, with its multidegree report."""
    secs = divisor_sections(chart, cfg)
    sigma = _product([s.poly for s in secs], chart.field, chart.nvars)
    return sigma, multidegree_report(secs, chart.r)


def generic_chart(r, p, cfg=None):
    """Big cell at the standard flag, moved to a Vandermonde frame if sigma vanishes there."""
    cfg = cfg or standard_config(r, p)
    chart = big_cell_chart(r, p)
    sigma, _ = sigma_lemma59(chart, cfg)
    if sigma.constant_term() == 0:
        chart = big_cell_chart(r, p, vandermonde(r, p))
    return chart


# vanishing orders -------------------------------------------------------------------

def _adapted_center(subspace, p):
    return linalg.complete_basis(subspace, p)


def locus_charts(cfg: SubspaceConfig):
    """name -> (frame center g, locus variables) making the locus a coordinate subspace.

    X_i = {V_1 = L_i}: first column of g spans L_i, locus x_21 = ... = x_r1 = 0.
    Y_i = {V_{r-1} = H_i}, Y_r = {V_{r-1} = H}: first r-1 columns span the
    hyperplane, locus x_r1 = ... = x_r,r-1 = 0.
    """
    r, p = cfg.r, cfg.p
    coords = lower_vars(r)
    first_col = [coords.index((i, 1)) for i in range(2, r + 1)]
    last_row = [coords.index((r, j)) for j in range(1, r)]
    out = {}
    for i, Li in enumerate(cfg.lines, 1):
        out[f"X{i}"] = (_adapted_center(Li, p), first_col)
    for i, Hi in enumerate(cfg.Hs + [cfg.H], 1):
        out[f"Y{i}"] = (_adapted_center(Hi, p), last_row)
    return out


@dataclass(frozen=True)
class LocusOrder:
    name: str
    order: object        # int, INF, or None when not in chart
    bound: int
    in_chart: bool

    @property
    def ok(self):
        return (not self.in_chart) or self.order >= self.bound


def _scalar_multiple(a: Poly, b: Poly):
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    m, c = a.leading()
    lam = b.terms.get(m, 0) * pow(c, -1, a.p) % a.p
    return lam != 0 and a.scale(lam) == b


def vanishing_orders_at_special_loci(sigma: Poly, chart: FlagChart, cfg: SubspaceConfig):
    """Orders of sigma along X_1..X_r and Y_1..Y_r, each read in an adapted chart.

    The section is recomputed in the adapted frame; sigma must be the
    chart's own section up to a unit, which is checked.
    """
    ref, _ = sigma_lemma59(chart, cfg)
    if not _scalar_multiple(ref, sigma):
        raise ValueError("sigma is not the configuration's section in this chart")
    r, p = cfg.r, cfg.p
    bound = r - 2
    out = {}
    for name, (g, locus) in locus_charts(cfg).items():
        adapted = big_cell_chart(r, p, g)
        s = sigma_in_frame(adapted.frame, cfg)
        if s.is_zero():
            raise NotInChart(f"{name}: section vanishes identically in its chart")
        out[name] = LocusOrder(name, vanishing_order(s, locus), bound, True)
    return out


# the delta chain ---------------------------------------------------------------------

@dataclass
class DeltaLevel:
    k: int
    nvars: int
    coefficient: int
    splits: bool
    peel_ok: bool          # divisibility and propagation checks on the way down to R_{k-1}
    matches_next: bool     # the peeled section is a unit multiple of delta_{k-1}


@dataclass
class DeltaChainReport:
    r: int
    p: int
    levels: list
    base_value: int
    top_matches_sigma: bool

    @property
    def ok(self):
        return (self.base_value != 0 and self.top_matches_sigma
                and all(l.splits and l.peel_ok and l.matches_next for l in self.levels))


def adapted_w_basis(cfg: SubspaceConfig):
    """Basis b_1..b_r with W_i = span(b_1..b_i)."""
    r, p = cfg.r, cfg.p
    cols = []
    current = np.zeros((r, 0), dtype=np.int64)
    for i in range(1, r + 1):
        Wi = cfg.W[i]
        for j in range(Wi.shape[1]):
            v = Wi[:, j:j + 1]
            if current.shape[1] == 0 or not linalg.contains(current, v, p):
                cols.append(v)
                current = linalg.hstack(current, v)
                break
    B = linalg.hstack(*cols)
    assert linalg.det(B, p) != 0
    return B


def r_k_chart(cfg, B, k):
    """Frame B * diag(N_k(x), I) and the variable labels of N_k."""
    r, p = cfg.r, cfg.p
    field = PrimeField(p)
    coords = lower_vars(k)
    nvars = len(coords)
    N = unipotent_frame(r, field, nvars, {ij: n for n, ij in enumerate(coords)})
    return const_times(B, N, p), coords


def c_section(frame_N, k, i):
    """1_{C_{k,i}}: minor of N_k on rows k-i+1..k and columns 1..i."""
    rows = range(k - i, k)
    return det_bareiss([[frame_N[a][b] for b in range(i)] for a in rows])


def delta_section(cfg, B, k):
    r, p = cfg.r, cfg.p
    frame, coords = r_k_chart(cfg, B, k)
    field = PrimeField(p)
    nvars = len(coords)
    N = unipotent_frame(r, field, nvars, {ij: n for n, ij in enumerate(coords)})
    tilde = _product([subspace_det(cfg.S[i], frame, r - i) for i in range(1, r)], field, nvars)
    delta = tilde
    for i in range(1, k):
        delta = delta * c_section(N, k, i)
    return delta, coords


def _peel(delta, coords, k):
    """Walk Z_{k,0} > Z_{k,1} > ... > Z_{k,k-1} = R_{k-1}: divide by x_{k,i},
    check the propagation identity, restrict x_{k,i} = 0."""
    cur, labels = delta, list(coords)
    ok = True
    for i in range(1, k):
        v = labels.index((k, i))
        q = divide_by_variable(cur, v)
        if q is None:
            return None, False
        ok &= divisor_propagation_check(q, [v])
        cur = restrict(q, {v: 0})
        labels.pop(v)
    return cur, ok


def delta_chain(r: int, p: int, cfg: SubspaceConfig | None = None) -> DeltaChainReport:
    cfg = cfg or standard_config(r, p)
    B = adapted_w_basis(cfg)
    deltas = {k: delta_section(cfg, B, k) for k in range(1, r + 1)}
    base = deltas[1][0].constant_term()
    levels = []
    for k in range(r, 0, -1):
        delta, coords = deltas[k]
        c = split_coefficient(delta)
        if k > 1:
            peeled, ok = _peel(delta, coords, k)
            match = peeled is not None and _scalar_multiple(deltas[k - 1][0], peeled)
        else:
            ok, match = True, True
        levels.append(DeltaLevel(k, len(coords), c, c != 0, ok, match))
    sigma, _ = sigma_lemma59(big_cell_chart(r, p, B), cfg)
    top_matches = _scalar_multiple(sigma, deltas[r][0])
    return DeltaChainReport(r, p, levels, base, top_matches)


# one-call verification -------------------------------------------------------------

@dataclass
class FlagReport:
    r: int
    p: int
    checks: list           # (name, value, passed)

    @property
    def ok(self):
        return all(c[2] for c in self.checks)


def flag_verify(r: int, p: int, orders: bool = True, chain: bool = True) -> FlagReport:
    cfg = standard_config(r, p)
    chart = generic_chart(r, p, cfg)
    sigma, md = sigma_lemma59(chart, cfg)
    c = split_coefficient(sigma)
    checks = [
        ("chart_translated", str(chart.translated).lower(), True),
        ("sigma_nonzero", str(not sigma.is_zero()).lower(), not sigma.is_zero()),
        ("multidegree", " ".join(f"{j}:{n}" for j, n in md.counts.items()), md.consistent),
        ("loci_distinct", str(special_loci_distinct(cfg)).lower(), special_loci_distinct(cfg)),
        ("split_coefficient", c, c != 0),
    ]
    if orders:
        for name, lo in vanishing_orders_at_special_loci(sigma, chart, cfg).items():
            val = "inf" if lo.order is INF else lo.order
            checks.append((f"order_{name}", f"{val}>={lo.bound}", lo.ok))
    if chain:
        rep = delta_chain(r, p, cfg)
        checks.append(("delta_base", rep.base_value, rep.base_value != 0))
        checks.append(("delta_top_is_sigma", str(rep.top_matches_sigma).lower(), rep.top_matches_sigma))
        for lv in rep.levels:
            checks.append((f"delta_{lv.k}", lv.coefficient, lv.splits and lv.peel_ok and lv.matches_next))
    return FlagReport(r, p, checks)
