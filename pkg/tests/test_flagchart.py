import numpy as np
import pytest
import sympy

from conftest import to_sympy
from frobsplit import flagchart as fc
from frobsplit import linalg
from frobsplit.errors import DegenerateConfig
from frobsplit.gfpoly import format_poly
from frobsplit.splitcheck import divisor_propagation_check, split_coefficient, splits_by_p_minus_1


@pytest.mark.parametrize("r,n", [(2, 1), (3, 3), (4, 6), (5, 10)])
def test_big_cell_dimension(r, n):
    ch = fc.big_cell_chart(r, 7)
    assert len(ch.coords) == n
    for i in range(r):
        assert ch.frame[i][i].constant_term() == 1 and ch.frame[i][i].is_constant()
        assert all(ch.frame[i][j].is_zero() for j in range(i + 1, r))


def test_big_cell_r2_frame():
    ch = fc.big_cell_chart(2, 5)
    assert [[format_poly(e) for e in row] for row in ch.frame] == [["1", "0"], ["x1", "1"]]


def test_standard_config_r2():
    cfg = fc.standard_config(2, 5)
    assert linalg.same_space(cfg.W[1], np.array([[0], [1]]), 5)
    assert linalg.same_space(cfg.S[1], np.array([[1], [1]]), 5)
    assert linalg.dim(cfg.S[2], 5) == 2


def test_index_sets_r3():
    W, S = fc.w_s_index_sets(3)
    assert W[1] == {2} and W[2] == {2, 3} and W[3] == {1, 2, 3}
    assert S[1] == set() and S[2] == {1}


@pytest.mark.parametrize("r", range(2, 7))
def test_standard_config_generic(r):
    cfg = fc.standard_config(r, 7)
    assert not linalg.contains(cfg.H, cfg.generic, 7)
    assert fc.special_loci_distinct(cfg)
    for i in range(1, r):
        assert linalg.dim(cfg.W[i], 7) == i and linalg.dim(cfg.S[i], 7) == i


def test_degenerate_config_rejected():
    r, p = 3, 7
    lines = [np.eye(r, dtype=np.int64)[:, [i]] for i in range(r)]
    H = np.array([[1, 0], [0, 1], [0, 0]])     # contains L_1
    with pytest.raises(DegenerateConfig):
        fc.build_config(r, p, lines, np.ones((r, 1), dtype=np.int64), H)
    with pytest.raises(DegenerateConfig):
        fc.standard_config(r, 2)


def test_r2_sections_and_sigma():
    cfg = fc.standard_config(2, 5)
    ch = fc.generic_chart(2, 5, cfg)
    secs = {s.label: format_poly(s.poly) for s in fc.divisor_sections(ch, cfg)}
    assert secs == {"d1": "4", "e1": "x1 + 4"}        # d1 = -1, e1 = t - 1
    sigma, md = fc.sigma_lemma59(ch, cfg)
    assert split_coefficient(sigma) == 1 and md.consistent


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17, 19, 23, 29, 31])
def test_r2_splits_for_all_small_primes(p):
    cfg = fc.standard_config(2, p)
    sigma, _ = fc.sigma_lemma59(fc.generic_chart(2, p, cfg), cfg)
    assert split_coefficient(sigma) != 0


def test_sections_match_sympy_determinants():
    r, p = 3, 11
    cfg = fc.standard_config(r, p)
    ch = fc.generic_chart(r, p, cfg)
    frame = sympy.Matrix([[to_sympy(e).as_expr() for e in row] for row in ch.frame])
    gens = sympy.symbols(f"x1:{len(ch.coords) + 1}")
    for sec in fc.divisor_sections(ch, cfg):
        i = int(sec.label[1:])
        basis = (cfg.W if sec.label[0] == "d" else cfg.S)[i]
        M = sympy.Matrix.hstack(sympy.Matrix(basis.tolist()), frame[:, : r - i])
        ref = sympy.Poly(sympy.expand(M.det()), *gens, modulus=p)
        assert to_sympy(sec.poly) == ref


@pytest.fixture(scope="module")
def r3():
    cfg = fc.standard_config(3, 11)
    ch = fc.generic_chart(3, 11, cfg)
    sigma, md = fc.sigma_lemma59(ch, cfg)
    return cfg, ch, sigma, md


def test_r3_sigma_splits(r3):
    cfg, ch, sigma, md = r3
    assert ch.translated
    assert md.consistent
    rep = splits_by_p_minus_1(sigma)
    assert rep.splits
    assert split_coefficient(sigma, method="direct") == rep.coefficient


def test_r3_vanishing_orders(r3):
    cfg, ch, sigma, _ = r3
    orders = fc.vanishing_orders_at_special_loci(sigma, ch, cfg)
    assert set(orders) == {"X1", "X2", "X3", "Y1", "Y2", "Y3"}
    for lo in orders.values():
        assert lo.ok and lo.order >= 1


def test_sigma_nonzero_at_generic_point(r3, rng):
    _, _, sigma, _ = r3
    vals = [sigma.evaluate([int(v) for v in rng.integers(0, 11, size=3)]) for _ in range(20)]
    assert any(vals)


@pytest.mark.parametrize("r,p", [(2, 7), (3, 11)])
def test_delta_chain(r, p):
    rep = fc.delta_chain(r, p)
    assert rep.ok
    assert rep.base_value != 0
    assert rep.top_matches_sigma
    assert [lv.k for lv in rep.levels] == list(range(r, 0, -1))


def test_propagation_on_peeled_sections(r3):
    cfg, ch, sigma, _ = r3
    # sigma multiplied by a chart coordinate: divisor propagation in that coordinate
    assert divisor_propagation_check(sigma, [0])


def test_flag_verify_r2():
    rep = fc.flag_verify(2, 7)
    assert rep.ok
    names = [c[0] for c in rep.checks]
    assert "split_coefficient" in names and "delta_base" in names
