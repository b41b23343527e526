"""The Grassmannian tower over a point: E_1 = E_2 = k^r.

Level j (0 <= j <= r/2) is modelled by flags A^i_1 < ... < A^i_j < A^i_{r-j}
< ... < A^i_{r-1} in each E_i (kernel side) together with an r-dimensional
K-hat inside E_1 + E_2 satisfying

    A^1_j + A^2_j  <  K-hat  <  A^1_{r-j} + A^2_{r-j}.

K-hat / (A^1_j + A^2_j) is the kernel of the universal quotient
F^1 + F^2 -> Q_{r-2j} with F^i = A^i_{r-j} / A^i_j.  The map down to level
j-1 keeps K-hat and forgets A^i_j, A^i_{r-j}.

Chart conventions (the "fingerprint" carried by every report):
  * fiber: q(f1, f2) = B f1 + (I - B) f2, so K = {((I-B)u, -Bu)}; q_1 = B and
    q_2 = I - B, hence s_1 = det B and s_2 = det(I - B).  Both divisors meet
    the chart, which the usual graph chart [A | I] would not allow (s_2 = 1).
  * flags: frame_1 = N(x), frame_2 = P N(y) with N block unitriangular and P
    the antidiagonal permutation; level 0 uses identity frames.
Sections of O(m) on Gr_0 are degree-m forms in the C(2r, r) Plücker
coordinates of K-hat (Polys in those variables), evaluated in any chart by
substituting the r x r minors of a kernel frame.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from math import comb

import numpy as np

from frobsplit import flagchart, linalg
from frobsplit.errors import LiftFailed, NotInChart, OutsideBirationalLocus, PipelineBroken, UnsupportedRank
from frobsplit.gfpoly import (
    Poly,
    PrimeField,
    det_bareiss,
    derivative,
    exact_divide,
    homogeneous_part,
    substitute,
    vanishing_order,
)
from frobsplit.splitcheck import split_coefficient, split_coefficient_of_product

FINGERPRINT = "fiber=q(f1,f2)=B*f1+(I-B)*f2;frame1=N(x);frame2=P*N(y);plucker=kernel-minors"


def flag_type(r, j):
    """m_j = (1^j, r-2j, 1^j); for 2j = r the middle block disappears."""
    mid = [r - 2 * j] if r - 2 * j > 0 else []
    return tuple([1] * j + mid + [1] * j)


def flag_dim(m):
    r = sum(m)
    return (r * r - sum(v * v for v in m)) // 2


def level_dim(r, j):
    n = r - 2 * j
    if j == 0:
        return r * r
    return 2 * flag_dim(flag_type(r, j)) + n * n


def _block_of(m):
    out = []
    for b, size in enumerate(m):
        out += [b] * size
    return out


def block_lower_slots(m):
    """Entries (a, c) (0-based) of a block unitriangular matrix of type m below the diagonal blocks."""
    blk = _block_of(m)
    r = len(blk)
    return [(a, c) for a in range(r) for c in range(r) if blk[a] > blk[c]]


def antidiagonal(r):
    return np.eye(r, dtype=np.int64)[::-1].copy()


@dataclass
class TowerLevel:
    r: int
    p: int
    j: int
    coords: list                  # labels ('x'|'y', a, c) or ('b', a, c)
    frame1: list = None           # r x r Polys (level >= 1)
    frame2: list = None
    fiber: list = None            # B, n x n Polys (empty at the even top)
    kernel: list = None           # 2r x r Polys, columns span K-hat

    @property
    def nvars(self):
        return len(self.coords)

    @property
    def n(self):
        return self.r - 2 * self.j

    @property
    def m(self):
        return flag_type(self.r, self.j)

    @property
    def dim(self):
        return level_dim(self.r, self.j)

    @property
    def is_flag_top(self):
        return self.n == 0

    @property
    def field(self):
        return PrimeField(self.p)

    def divisor_section(self, i):
        """s_1 = det B, s_2 = det(I - B) in chart coordinates."""
        if self.is_flag_top:
            raise ValueError("the top level of an even tower carries no divisor sections")
        B = self.fiber
        if i == 1:
            M = B
        elif i == 2:
            M = [[(1 if a == c else 0) - B[a][c] for c in range(self.n)] for a in range(self.n)]
        else:
            raise ValueError("i must be 1 or 2")
        return det_bareiss(M)

    def evaluate(self, point):
        """Numeric frames and K-hat at a chart point."""
        pt = [int(v) % self.p for v in point]
        ev = lambda M: np.array([[e.evaluate(pt) for e in row] for row in M], dtype=np.int64)
        f1 = ev(self.frame1) if self.frame1 is not None else np.eye(self.r, dtype=np.int64)
        f2 = ev(self.frame2) if self.frame2 is not None else np.eye(self.r, dtype=np.int64)
        return f1, f2, ev(self.kernel)


def _poly_matmul(A, B):
    rows, inner, cols = len(A), len(B), len(B[0])
    field, nvars = A[0][0].field, A[0][0].nvars
    out = []
    for a in range(rows):
        row = []
        for c in range(cols):
            acc = Poly.zero(field, nvars)
            for k in range(inner):
                if A[a][k] and B[k][c]:
                    acc = acc + A[a][k] * B[k][c]
            row.append(acc)
        out.append(row)
    return out


def _const(field, nvars, c):
    return Poly.const(field, nvars, int(c))


def build_level(r: int, p: int, j: int) -> TowerLevel:
    if r < 2 or not 0 <= j <= r // 2:
        raise ValueError("need r >= 2 and 0 <= j <= r/2")
    field = PrimeField(p)
    n = r - 2 * j
    slots = block_lower_slots(flag_type(r, j)) if j else []
    coords = [("x",) + s for s in slots] + [("y",) + s for s in slots]
    coords += [("b", a, c) for a in range(n) for c in range(n)]
    nv = len(coords)
    index = {lab: k for k, lab in enumerate(coords)}
    one = lambda: _const(field, nv, 1)
    zero = lambda: Poly.zero(field, nv)

    def unitri(tag):
        N = [[one() if a == c else zero() for c in range(r)] for a in range(r)]
        for a, c in slots:
            N[a][c] = Poly.var(field, nv, index[(tag, a, c)])
        return N

    if j == 0:
        f1 = f2 = None
        F1 = [[one() if a == c else zero() for c in range(r)] for a in range(r)]
        F2 = F1
    else:
        f1 = unitri("x")
        P = antidiagonal(r)
        f2 = flagchart.const_times(P, unitri("y"), p)
        F1, F2 = f1, f2
    B = [[Poly.var(field, nv, index[("b", a, c)]) for c in range(n)] for a in range(n)]
    IminusB = [[(one() if a == c else zero()) - B[a][c] for c in range(n)] for a in range(n)]
    cols = []
    for t in range(j):  # A^1_j + 0 and 0 + A^2_j
        cols.append([F1[a][t] for a in range(r)] + [zero() for _ in range(r)])
    for t in range(j):
        cols.append([zero() for _ in range(r)] + [F2[a][t] for a in range(r)])
    if n:
        mid1 = [[F1[a][c] for c in range(j, r - j)] for a in range(r)]
        mid2 = [[F2[a][c] for c in range(j, r - j)] for a in range(r)]
        top = _poly_matmul(mid1, IminusB)
        bot = _poly_matmul(mid2, B)
        for c in range(n):
            cols.append([top[a][c] for a in range(r)] + [-bot[a][c] for a in range(r)])
    kernel = [[cols[c][a] for c in range(r)] for a in range(2 * r)]
    return TowerLevel(r, p, j, coords, f1, f2, B if n else [], kernel)


def build_tower(r: int, p: int):
    return [build_level(r, p, j) for j in range(r // 2 + 1)]


# Plücker forms --------------------------------------------------------------------

def plucker_index(r):
    return list(combinations(range(2 * r), r))


def plucker_coordinates(kernel):
    """All r x r minors of a 2r x r Poly matrix, in plucker_index order."""
    r = len(kernel[0])
    return [det_bareiss([kernel[a] for a in rows]) for rows in plucker_index(r)]


def plucker_form_var(r, p, rows):
    idx = plucker_index(r).index(tuple(rows))
    return Poly.var(PrimeField(p), comb(2 * r, r), idx)


def divisor_form(r, p, i):
    """s_i as a linear Plücker form, normalized to match det B / det(I-B) on the level-0 chart."""
    if i == 1:
        form = plucker_form_var(r, p, range(r, 2 * r))
        return form if r % 2 == 0 else -form
    return plucker_form_var(r, p, range(r))


def evaluate_form(form: Poly, kernel):
    return substitute(form, plucker_coordinates(kernel))


@dataclass
class SectionSpace:
    m: int
    basis: list            # Plücker monomial forms (Polys in C(2r, r) variables)
    chart_polys: list      # their level-0 chart expansions
    rank: int


def _coefficient_matrix(polys, p):
    monos = sorted({m for f in polys for m in f.terms})
    pos = {m: k for k, m in enumerate(monos)}
    A = np.zeros((len(monos), len(polys)), dtype=np.int64)
    for c, f in enumerate(polys):
        for m, v in f.terms.items():
            A[pos[m], c] = v
    return A, monos


def section_space(level: TowerLevel, m: int) -> SectionSpace:
    """Spanning set of H^0(O(m)) on Gr_0 by products of m Plücker coordinates."""
    if level.j != 0:
        raise UnsupportedRank("section spaces are built on Gr_0 only")
    r, p = level.r, level.p
    nP = comb(2 * r, r)
    field = PrimeField(p)
    mins = plucker_coordinates(level.kernel)
    basis, polys = [], []
    for combo in combinations_with_replacement(range(nP), m):
        expo = [0] * nP
        f = Poly.one(field, level.nvars)
        for c in combo:
            expo[c] += 1
            f = f * mins[c]
        basis.append(Poly(field, nP, {tuple(expo): 1}))
        polys.append(f)
    A, _ = _coefficient_matrix(polys, p)
    return SectionSpace(m, basis, polys, linalg.rank(A, p))


# the chart map phi_j ---------------------------------------------------------------

def block_normal_form(M, m, p):
    """N block unitriangular of type m with the same prefix spans (at block ends) as M."""
    M = np.asarray(M, dtype=np.int64) % p
    r = M.shape[0]
    N = M.copy()
    start = 0
    for size in m:
        end = start + size
        piv = N[start:end, start:end]
        if linalg.det(piv, p) == 0:
            raise NotInChart("flag is outside the big cell of this chart")
        N[:, start:end] = linalg.matmul(N[:, start:end], linalg.inverse(piv, p), p)
        # clear the block rows of later columns
        if end < r:
            N[:, end:] = (N[:, end:] - linalg.matmul(N[:, start:end], N[start:end, end:], p)) % p
        start = end
    return N


def _fiber_coordinates(f1, f2, Khat, j, r, p):
    """B with K-hat / (A^1_j + A^2_j) = {((I-B)u, -Bu)} in middle-column coordinates."""
    n = r - 2 * j
    inv1, inv2 = linalg.inverse(f1, p), linalg.inverse(f2, p)
    a1 = linalg.matmul(inv1, Khat[:r], p)
    a2 = linalg.matmul(inv2, Khat[r:], p)
    if np.any(a1[r - j:] % p) or np.any(a2[r - j:] % p):
        raise OutsideBirationalLocus("K-hat is not inside A^1_{r-j} + A^2_{r-j}")
    K = linalg.span(np.vstack([a1[j:r - j], a2[j:r - j]]), p)
    if K.shape[1] != n:
        raise OutsideBirationalLocus("K-hat has the wrong rank modulo A^1_j + A^2_j")
    X, Y = K[:n], K[n:]
    D = (X - Y) % p
    if linalg.det(D, p) == 0:
        raise NotInChart("kernel meets the diagonal; outside the fiber chart")
    return (-linalg.matmul(Y, linalg.inverse(D, p), p)) % p


def chart_coordinates(level: TowerLevel, f1, f2, Khat):
    """Coordinates of (flags from frames f1, f2; K-hat) in the level's chart."""
    r, p, j = level.r, level.p, level.j
    values = {}
    if j:
        N1 = block_normal_form(f1, level.m, p)
        N2 = block_normal_form(linalg.matmul(antidiagonal(r), f2, p), level.m, p)
        for a, c in block_lower_slots(level.m):
            values[("x", a, c)] = int(N1[a, c])
            values[("y", a, c)] = int(N2[a, c])
        F1, F2 = N1, linalg.matmul(antidiagonal(r), N2, p)
    else:
        F1 = F2 = np.eye(r, dtype=np.int64)
    if level.n:
        B = _fiber_coordinates(F1, F2, np.asarray(Khat) % p, j, r, p)
        for a in range(level.n):
            for c in range(level.n):
                values[("b", a, c)] = int(B[a, c])
    return [values[lab] for lab in level.coords]


def phi_point(upper: TowerLevel, lower: TowerLevel, point):
    """phi_j at a chart point of level j, as chart coordinates of level j-1."""
    if lower.j != upper.j - 1 or (upper.r, upper.p) != (lower.r, lower.p):
        raise ValueError("levels are not adjacent")
    f1, f2, Khat = upper.evaluate(point)
    return chart_coordinates(lower, f1, f2, Khat)


def _extend(cols, target, p):
    current = linalg.hstack(*cols) if cols else np.zeros((target.shape[0], 0), dtype=np.int64)
    for c in range(target.shape[1]):
        v = target[:, c:c + 1]
        if current.shape[1] == 0 or not linalg.contains(current, v, p):
            cols.append(v)
            current = linalg.hstack(current, v)
    return cols


def phi_inverse_point(upper: TowerLevel, lower: TowerLevel, point):
    """phi_j^{-1} on U_{j-1}: A^i_j = K-hat ∩ E_i, A^i_{r-j} = pi_i(K-hat)."""
    r, p, j = upper.r, upper.p, upper.j
    f1, f2, Khat = lower.evaluate(point)
    frames = []
    for i, f in ((0, f1), (1, f2)):
        other = slice(r, 2 * r) if i == 0 else slice(0, r)
        own = slice(0, r) if i == 0 else slice(r, 2 * r)
        inter = linalg.matmul(Khat, linalg.nullspace(Khat[other], p), p)[own]
        inter = linalg.span(inter, p)
        proj = linalg.span(Khat[own], p)
        if inter.shape[1] != j or proj.shape[1] != r - j:
            raise OutsideBirationalLocus(f"q_{i + 1} does not have corank exactly 1")
        cols = []
        _extend(cols, f[:, :j - 1], p)
        _extend(cols, inter, p)
        _extend(cols, proj, p)
        _extend(cols, f[:, :r - j + 1], p)
        _extend(cols, np.eye(r, dtype=np.int64), p)
        frames.append(linalg.hstack(*cols[:r]))
    return chart_coordinates(upper, frames[0], frames[1], Khat)


def image_in_divisors(upper: TowerLevel, point) -> bool:
    """dim(K-hat ∩ E_i) > j-1 for both i: the image of phi_j lies in D_1 ∩ D_2 one level down."""
    r, p, j = upper.r, upper.p, upper.j
    _, _, Khat = upper.evaluate(point)
    for other in (slice(r, 2 * r), slice(0, r)):
        if linalg.nullspace(Khat[other], p).shape[1] <= j - 1:
            return False
    return True


# lifting ----------------------------------------------------------------------------

@dataclass
class LiftProblem:
    space: SectionSpace
    minors: list            # Plücker coordinates of K-hat along phi_1
    restricted: list        # basis forms restricted along phi_1 (polys in the level-1 chart)
    matrix: np.ndarray
    monomials: list


def lift_problem(level0: TowerLevel, level1: TowerLevel, m: int) -> LiftProblem:
    space = section_space(level0, m)
    mins = plucker_coordinates(level1.kernel)
    restricted = [substitute(f, mins) for f in space.basis]
    A, monos = _coefficient_matrix(restricted, level0.p)
    return LiftProblem(space, mins, restricted, A, monos)


def lift_section(problem: LiftProblem, target: Poly) -> Poly:
    """A Plücker form of degree m whose restriction along phi_1 equals target."""
    p = target.p
    pos = {mono: k for k, mono in enumerate(problem.monomials)}
    b = np.zeros(len(problem.monomials), dtype=np.int64)
    for mono, c in target.terms.items():
        if mono not in pos:
            raise LiftFailed(f"target monomial {mono} is outside the restricted section space")
        b[pos[mono]] = c
    x = linalg.solve(problem.matrix, b, p)
    if x is None:
        raise LiftFailed("restriction system is inconsistent")
    nP = problem.space.basis[0].nvars
    form = Poly.zero(PrimeField(p), nP)
    for c, f in zip(x, problem.space.basis):
        if c:
            form = form + f.scale(int(c))
    if substitute(form, problem.minors) != target:
        raise LiftFailed("nonzero residual after solving")
    return form


# Y and the default section ------------------------------------------------------------

def default_sigma_y(level: TowerLevel) -> Poly:
    """A splitting anticanonical section of Y in the top level's flag coordinates.

    r = 2: u(u-1) w(w-1) on P^1 x P^1.  r >= 3: the product of the flag
    sections d_1...e_{r-1} of the two factors.
    """
    if level.j != level.r // 2:
        raise UnsupportedRank("sigma_Y lives on the top level")
    if level.r == 2:
        field = PrimeField(level.p)
        u = Poly.var(field, level.nvars, 0)
        w = Poly.var(field, level.nvars, 1)
        return u * (u - 1) * w * (w - 1)
    a, b = _flag_factors(level)
    return a * b


# the pipeline ----------------------------------------------------------------------

@dataclass
class LevelReport:
    level: int
    nvars: int
    split_coefficient: object      # int, or None when skipped
    vanishing: dict = field(default_factory=dict)
    note: str = ""

    @property
    def ok(self):
        return (self.split_coefficient is None or self.split_coefficient != 0) and all(self.vanishing.values())

    def as_dict(self):
        return {"level": self.level, "vars": self.nvars,
                "split_coefficient": self.split_coefficient,
                "vanishing": self.vanishing, "note": self.note, "pass": self.ok}


@dataclass
class PipelineReport:
    r: int
    p: int
    levels: list
    fingerprint: str = FINGERPRINT

    @property
    def ok(self):
        return all(l.ok for l in self.levels)


def _adapted_plucker_chart(r, p, i):
    """Kernel frame of the Plücker chart p_J != 0 with |J ∩ J_D| = r-1, and the variable cutting D_i."""
    field = PrimeField(p)
    JD = list(range(r, 2 * r)) if i == 1 else list(range(r))
    outside = [a for a in range(2 * r) if a not in JD]
    J = sorted(JD[1:] + outside[:1])
    free = [a for a in range(2 * r) if a not in J]
    nv = r * r
    rows = {}
    for k, a in enumerate(J):
        rows[a] = [Poly.const(field, nv, 1 if c == k else 0) for c in range(r)]
    for k, a in enumerate(free):
        rows[a] = [Poly.var(field, nv, k * r + c) for c in range(r)]
    kernel = [rows[a] for a in range(2 * r)]
    # D_i is the vanishing of the minor on JD rows: only row JD[0] is free there, and the
    # identity rows JD[1:] leave its entry in the column of outside[0]
    col = J.index(outside[0])
    var = free.index(JD[0]) * r + col
    return kernel, var


def corollary45_pipeline(r: int, p: int, sigma_y: Poly | None = None, heavy: bool = False):
    """sigma_0 on Gr_0 from a splitting section on the top level, with per-level checks."""
    if r >= 4:
        raise UnsupportedRank("the pipeline executes for r = 2 (and r = 3 with heavy); r >= 4 is construction only")
    if r == 3 and not heavy:
        raise UnsupportedRank("r = 3 needs heavy=True")
    tower = build_tower(r, p)
    top = tower[-1]
    levels = []
    if r == 2:
        sy = sigma_y if sigma_y is not None else default_sigma_y(top)
        if sy.nvars != top.nvars:
            raise PipelineBroken(top.j, f"sigma_Y must have {top.nvars} variables")
        c_top = split_coefficient(sy)
        if c_top == 0:
            raise PipelineBroken(top.j, "sigma_Y^(p-1) does not split Y")
        levels.append(LevelReport(top.j, top.nvars, c_top, note="Y = P1 x P1"))
        level0 = tower[0]
        problem = lift_problem(level0, top, 2 * r - 2)
        tilde = lift_section(problem, sy)
        sigma_form = tilde * divisor_form(r, p, 1) * divisor_form(r, p, 2)
        sigma0 = evaluate_form(sigma_form, level0.kernel)
        s1, s2 = level0.divisor_section(1), level0.divisor_section(2)
        vanish = {
            "divides_s1": exact_divide(sigma0, s1) is not None,
            "divides_s2": exact_divide(sigma0, s2) is not None,
        }
        for i in (1, 2):
            kernel, var = _adapted_plucker_chart(r, p, i)
            vanish[f"order_D{i}>=1"] = vanishing_order(evaluate_form(sigma_form, kernel), [var]) >= 1
        c0 = split_coefficient(sigma0)
        rep = LevelReport(0, level0.nvars, c0, vanish, note=f"Grass_{r}(k^{2 * r})")
        levels.append(rep)
        if not rep.ok:
            raise PipelineBroken(0, f"level 0 failed: {rep.as_dict()}")
        return sigma0, PipelineReport(r, p, levels)
    # r = 3: top level is a P^1-bundle over Y with fiber coordinate b
    field = PrimeField(p)
    b = Poly.var(field, top.nvars, top.coords.index(("b", 0, 0)))
    sy = sigma_y if sigma_y is not None else default_sigma_y(top)
    factors = _flag_factors(top) if sigma_y is None else None
    c_y = split_coefficient_of_product(factors + [b * (1 - b)]) if factors else split_coefficient(sy * b * (1 - b))
    if c_y == 0:
        raise PipelineBroken(top.j, "sigma_top^(p-1) does not split the top level")
    sigma_top = sy * (1 - b) * b
    vanish = {"divides_s1": exact_divide(sigma_top, top.divisor_section(1)) is not None,
              "divides_s2": exact_divide(sigma_top, top.divisor_section(2)) is not None}
    levels.append(LevelReport(top.j, top.nvars, c_y, vanish, note="P1-bundle over Y; sigma = sigma_Y*(1-b)*b"))
    level0 = tower[0]
    mins = plucker_coordinates(top.kernel)
    img = {f"image_in_D{i}": substitute(divisor_form(r, p, i), mins).is_zero() for i in (1, 2)}
    levels.append(LevelReport(0, level0.nvars, None, img,
                              note="lift to O(4) and the 9-variable split are beyond desk scale; skipped"))
    return None, PipelineReport(r, p, levels)


def _flag_factors(top):
    cfg = flagchart.standard_config(top.r, top.p)
    return [flagchart.sigma_in_frame(top.frame1, cfg), flagchart.sigma_in_frame(top.frame2, cfg)]


# structural checks -------------------------------------------------------------------

def jacobian_rank(polys, point, p):
    J = np.array([[derivative(f, i).evaluate(point) for i in range(f.nvars)] for f in polys], dtype=np.int64)
    return linalg.rank(J, p)


def quadratic_rank(f: Poly):
    """Rank of the Hessian of the degree-2 part."""
    q = homogeneous_part(f, 2)
    n = f.nvars
    H = np.array([[derivative(derivative(q, a), c).constant_term() for c in range(n)] for a in range(n)],
                 dtype=np.int64)
    return linalg.rank(H, f.p)


def random_point(level, rng):
    return [int(v) for v in rng.integers(0, level.p, size=level.nvars)]
