"""Acceptance suite: one printed PASS/FAIL line per criterion, exact arithmetic, with runtime budgets."""
import time
from fractions import Fraction as Q

import numpy as np
import pytest

from frobsplit import flagchart as fc
from frobsplit import grtower as gt
from frobsplit import linalg, repdims
from frobsplit import stab01 as sb
from frobsplit.gfpoly import Poly, PrimeField, exact_divide, poly_pow_truncated, truncate
from frobsplit.parweights import (
    Infinitesimal, ParData, PointWeight, canonical_weight, check_point, codim_bounds, ell,
    hecke_transform, extra_point_sigma_bounds, m_vectors, sigma_min, sigma_value,
)
from frobsplit.splitcheck import divisor_propagation_check, split_coefficient


def compositions(r):
    if r == 0:
        yield ()
        return
    for head in range(1, r + 1):
        for tail in compositions(r - head):
            yield (head,) + tail


@pytest.fixture
def report(capsys):
    """Run body() under a wall-clock budget and print one result line."""
    def run(number, name, budget, body):
        start = time.perf_counter()
        ok, detail = body()
        elapsed = time.perf_counter() - start
        passed = bool(ok) and elapsed < budget
        with capsys.disabled():
            print(f"\ncriterion {number:>2} {name}: {'PASS' if passed else 'FAIL'} "
                  f"{detail} time={elapsed:.2f}s budget={budget}s")
        assert ok, detail
        assert elapsed < budget, f"{elapsed:.2f}s over {budget}s"
    return run


def test_c01_sigma_closed_forms(report):
    def body():
        cases = 0
        for r in range(2, 7):
            full = canonical_weight({"x": (1,) * r}, r)
            hyper = canonical_weight({"x": (r - 1, 1)}, r)
            for r1 in range(1, r):
                for m in m_vectors((1,) * r, r1):
                    cases += 1
                    if sigma_value(full, "x", (r1, m)) != Q(r1 * (r - r1), 2):
                        return False, f"full flag r={r} r1={r1} m={m}"
                for m in m_vectors((r - 1, 1), r1):
                    cases += 1
                    expect = Q(r - r1, 2) if m[1] else Q(r1, 2)
                    if sigma_value(hyper, "x", (r1, m)) != expect:
                        return False, f"type ({r - 1},1) r={r} r1={r1} m={m}"
        return True, f"cases={cases}"
    report(1, "sigma closed forms", 1, body)


def test_c02_sigma_lower_bound(report):
    def body():
        cases = 0
        for r in range(2, 6):
            for n in compositions(r):
                if len(n) == 1:
                    continue        # no flag, no parabolic point
                om = canonical_weight({"x": n}, r)
                for r1 in range(1, r):
                    cases += 1
                    if sigma_min(om, "x", r1) < Q(1, om.k):
                        return False, f"type={n} r1={r1}"
        return True, f"cases={cases}"
    report(2, "sigma_min >= 1/k", 10, body)


def test_c03_hecke_fixed_point(report):
    def body():
        cases = 0
        for r in range(2, 9):
            for n in compositions(r):
                om = canonical_weight({"z": (1,) * r, "w": n}, r)
                out = hecke_transform(om, "z")
                cases += 1
                if out.points != om.points or out.k != om.k:
                    return False, f"r={r} w={n}"
                for label, pw in out.points.items():
                    check_point(pw, r, out.k, label)
        return True, f"cases={cases}"
    report(3, "hecke fixes canonical weights", 1, body)


def test_c04_flag_verify(report):
    def body():
        for r, p in [(2, 7), (2, 11), (2, 31), (3, 11), (3, 13)]:
            rep = fc.flag_verify(r, p)
            names = {c[0] for c in rep.checks}
            if not rep.ok or not {"split_coefficient", "delta_base"} <= names:
                bad = [c for c in rep.checks if not c[2]]
                return False, f"r={r} p={p} failing={bad}"
        return True, "pairs=5"
    report(4, "flag-verify at desk scale", 60, body)


def test_c05_pipeline(report):
    def body():
        for p in (7, 11):
            sigma0, rep = gt.corollary45_pipeline(2, p)
            lv0 = gt.build_level(2, p, 0)
            if not rep.ok or sigma0.nvars != 4 or split_coefficient(sigma0) == 0:
                return False, f"p={p} pipeline"
            for i in (1, 2):
                if exact_divide(sigma0, lv0.divisor_section(i)) is None:
                    return False, f"p={p} sigma0 not divisible by s_{i}"
        return True, "p=7,11"
    report(5, "tower pipeline", 60, body)


def test_c06_lift_solvability(report):
    def body():
        rng = np.random.default_rng(6)
        solved = 0
        for p in (7, 11):
            lv0, lv1 = gt.build_tower(2, p)
            prob = gt.lift_problem(lv0, lv1, 2)
            for _ in range(100):
                coeffs = rng.integers(0, p, size=len(prob.restricted))
                target = Poly.zero(PrimeField(p), lv1.nvars)
                for c, f in zip(coeffs, prob.restricted):
                    target = target + f.scale(int(c))
                form = gt.lift_section(prob, target)
                if gt.substitute(form, prob.minors) != target:
                    return False, f"p={p} lift mismatch"
                solved += 1
        rank = gt.section_space(gt.build_level(2, 7, 0), 2).rank
        return rank == 20 == repdims.grass_sections_dim(2, 2), f"solved={solved} section_rank={rank}"
    report(6, "lift solvability", 10, body)


def test_c07_divisor_propagation(report):
    def body():
        rng = np.random.default_rng(7)
        nonzero = 0
        for i in range(1000):
            p = (5, 7, 11)[i % 3]
            n = int(rng.integers(1, 5))
            terms = {}
            for _ in range(int(rng.integers(1, 7))):
                terms[tuple(int(e) for e in rng.integers(0, 4, size=n))] = int(rng.integers(1, p))
            sigma = Poly(PrimeField(p), n, terms)
            size = int(rng.integers(1, n + 1))
            divs = sorted(rng.choice(n, size=size, replace=False).tolist())
            if not divisor_propagation_check(sigma, divs):
                return False, f"case {i}: {terms} D={divs} p={p}"
            nonzero += split_coefficient(sigma) != 0
        return True, f"inputs=1000 nonzero_sigma={nonzero}"
    report(7, "divisor propagation identity", 10, body)


def test_c08_truncation_soundness(report):
    def body():
        rng = np.random.default_rng(8)
        methods = ["binary", "linear", "auto"]
        backends = ["dense", "sparse"]
        for i in range(500):
            p = (2, 3, 5, 7, 11)[i % 5]
            n = int(rng.integers(1, 4))
            terms = {}
            for _ in range(int(rng.integers(1, 5))):
                terms[tuple(int(e) for e in rng.integers(0, 3, size=n))] = int(rng.integers(1, p))
            f = Poly(PrimeField(p), n, terms)
            e = int(rng.integers(0, 7))
            cap = tuple(int(c) for c in rng.integers(0, p, size=n))
            got = poly_pow_truncated(f, e, cap, method=methods[i % 3], backend=backends[i % 2])
            if got != truncate(f ** e, cap):
                return False, f"case {i}: f={terms} e={e} cap={cap} p={p}"
        return True, "comparisons=500"
    report(8, "truncation soundness", 10, body)


def test_c09_stability_equivalence(report):
    def body():
        rng = np.random.default_rng(9)
        om2, om3 = sb.omega_c0(2), sb.omega_c0(3)
        generic = [0, 0]
        for _ in range(200):
            cfg = sb.random_config(2, 5, rng)
            gen = sb.genericity_check_512(cfg).holds
            generic[0] += gen
            if (sb.rank2_bruteforce(cfg, om2) == "stable") != gen:
                return False, "r=2 mismatch"
        for _ in range(200):
            cfg = sb.random_config(3, 7, rng)
            gen = sb.genericity_check_512(cfg).holds
            generic[1] += gen
            verdict, witness = sb.subspace_destabilizer_search(cfg, om3)
            if (witness is None) != gen or (verdict == "stable") != gen:
                return False, "r=3 mismatch"
        return True, f"r2_generic={generic[0]}/200 r3_generic={generic[1]}/200"
    report(9, "stability equivalence", 30, body)


def test_c10_special_loci(report):
    def body():
        rng = np.random.default_rng(10)
        q = 13
        done = 0
        while done < 100:
            r = 2 + done % 2
            cfg = sb.random_config(r, q, rng)
            if not sb.genericity_check_512(cfg).holds:
                continue
            z = int(rng.integers(2, q))
            loci = sb.special_loci(cfg, z=z)
            L = loci.lines
            if any(l.shape[1] != 1 for l in L) or linalg.dim(linalg.hstack(*L), q) != r:
                return False, "L_i not distinct lines spanning W"
            if any(H.shape[1] != r - 1 for H in loci.Hs) or loci.Hz.shape[1] != r - 1:
                return False, "hyperplane dimension"
            # same flags and line, other bases: upper-triangular change of columns, rescaled line
            moved = dict(cfg.points)
            for label in ("z1", "z2"):
                U = np.triu(rng.integers(0, q, size=(r, r)))
                np.fill_diagonal(U, rng.integers(1, q, size=r))
                pt = cfg.points[label]
                moved[label] = sb.FlagPoint(pt.at, "flag", linalg.matmul(pt.data, U, q))
            y = cfg.points["y1"]
            moved["y1"] = sb.FlagPoint(y.at, "line", y.data * int(rng.integers(1, q)) % q)
            again = sb.special_loci(sb.FlagConfig(r, q, moved), z=z)
            if not linalg.same_space(loci.Hz, again.Hz, q):
                return False, "H_z depends on the bases"
            done += 1
        return True, "configs=100"
    report(10, "special loci", 10, body)


def test_c11_dimension_identity(report):
    def body():
        for r in range(1, 5):
            for m in range(5):
                if not repdims.decomposition_identity(r, m):
                    return False, f"r={r} m={m}"
        rank = gt.section_space(gt.build_level(2, 7, 0), 2).rank
        return repdims.grass_sections_dim(2, 2) == 20 == rank, f"spanning_rank={rank}"
    report(11, "dimension identity", 5, body)


def test_c12_numeric_reproductions(report):
    def body():
        om = canonical_weight({"y1": (2, 1), "z1": (1, 1, 1), "z2": (1, 1, 1)}, 3)
        if ell(om) != 0:
            return False, f"ell={ell(om)}"
        # rank 2 with a single extra point is the case the argument sets aside: Sigma = 1/2 - t there
        low = extra_point_sigma_bounds(2)
        if low.holds or low.min_r1_1 != Q(1, 2) - Infinitesimal.t():
            return False, "rank 2 value"
        for r in range(3, 6):
            if not extra_point_sigma_bounds(r).holds:
                return False, f"extra point bounds r={r}"
        bounds = codim_bounds(ParData(2, 0, 2, 4, {x: PointWeight((1, 1), (0, 2)) for x in "abc"}))
        if not bounds.first == bounds.second == Q(7, 4):
            return False, f"codim={bounds}"
        return True, "ell=0 sigma_bounds=r3..5 codim=7/4"
    report(12, "numeric reproductions", 1, body)
