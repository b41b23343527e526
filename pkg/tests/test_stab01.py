import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobsplit import linalg
from frobsplit import stab01 as sb
from frobsplit.errors import BadConfig, ParseError, UnsupportedRank
from frobsplit.gfpoly import INF
from frobsplit.parweights import ParData, canonical_weight


def test_standard_configuration_generic():
    for r in (2, 3, 4):
        cfg = sb.standard_flags(r, 7)
        assert sb.genericity_check_512(cfg).holds
        verdict, wit = sb.subspace_destabilizer_search(cfg, sb.omega_c0(r))
        assert verdict == "stable" and wit is None


@pytest.mark.parametrize("r", [2, 3, 4])
def test_same_flag_fails_b_everywhere(r):
    cfg = sb.standard_flags(r, 5)
    cfg.points["z2"] = sb.FlagPoint(INF, "flag", cfg.points["z1"].data.copy())
    gen = sb.genericity_check_512(cfg)
    assert not gen.holds and gen.witness == "(b) fails at i=1"
    z1 = cfg.flag("z1")
    for i in range(1, r):
        assert linalg.intersect(z1.piece(r - i), z1.piece(i), 5).shape[1] > 0
    verdict, wit = sb.subspace_destabilizer_search(cfg, sb.omega_c0(r))
    assert verdict == "unstable"
    assert wit.gap > 0 and wit.subspace.shape[1] >= 1


def test_monte_carlo_genericity_large_field():
    rng = np.random.default_rng(7)
    for r in (2, 3, 4):
        hits = sum(sb.genericity_check_512(sb.random_config(r, 101, rng)).holds for _ in range(200))
        assert hits >= 200 * (1 - 3 * r * r / 101)


def test_rank2_examples():
    cfg = sb.standard_flags(2, 5)
    assert sb.rank2_bruteforce(cfg, ParData(2, 0, 0, 4, {})) == "strictly-semistable"
    assert sb.rank2_bruteforce(cfg, sb.omega_c0(2)) == "stable"
    common = sb.FlagConfig(2, 5, {
        "y1": sb.FlagPoint(1, "line", [1, 0]),
        "z1": sb.FlagPoint(0, "flag", [[1, 0], [0, 1]]),
        "z2": sb.FlagPoint(INF, "flag", [[1, 1], [0, 1]]),
    })
    assert sb.rank2_bruteforce(common, sb.omega_c0(2)) == "unstable"
    with pytest.raises(UnsupportedRank):
        sb.rank2_bruteforce(sb.standard_flags(3, 5), sb.omega_c0(3))


def test_rank2_d_max_bound_is_sufficient():
    rng = np.random.default_rng(3)
    om = sb.omega_c0(2)
    for _ in range(8):
        cfg = sb.random_config(2, 5, rng)
        assert sb.rank2_bruteforce(cfg, om) == sb.rank2_bruteforce(cfg, om, d_max=2)


def test_rank2_agrees_with_genericity():
    rng = np.random.default_rng(0)
    om = sb.omega_c0(2)
    for _ in range(100):
        cfg = sb.random_config(2, 5, rng)
        assert (sb.rank2_bruteforce(cfg, om) == "stable") == sb.genericity_check_512(cfg).holds


def test_hz_rank2_example():
    cfg = sb.FlagConfig(2, 5, {
        "y1": sb.FlagPoint(2, "line", [1, 2]),
        "z1": sb.FlagPoint(0, "flag", [[1, 0], [0, 1]]),
        "z2": sb.FlagPoint(INF, "flag", [[0, 1], [1, 0]]),
    })
    loci = sb.special_loci(cfg, z=1)
    assert linalg.same_space(loci.Hz, np.array([[1], [1]]), 5)


def _random_generic(rng, r, q):
    while True:
        cfg = sb.random_config(r, q, rng)
        if sb.genericity_check_512(cfg).holds:
            return cfg


def test_special_loci_properties():
    rng = np.random.default_rng(11)
    for r in (2, 3, 4):
        for _ in range(10):
            cfg = _random_generic(rng, r, 13)
            loci = sb.special_loci(cfg, z=5)
            assert linalg.dim(linalg.hstack(*loci.lines), 13) == r
            assert all(H.shape[1] == r - 1 for H in loci.Hs)
            assert loci.Hz.shape[1] == r - 1


def test_special_loci_swap_symmetry():
    rng = np.random.default_rng(5)
    cfg = _random_generic(rng, 3, 11)
    swapped = sb.FlagConfig(3, 11, {
        "y1": cfg.points["y1"],
        "z1": sb.FlagPoint(cfg.points["z2"].at, "flag", cfg.points["z2"].data),
        "z2": sb.FlagPoint(cfg.points["z1"].at, "flag", cfg.points["z1"].data),
    })
    a = sb.special_loci(cfg, z=4).lines
    b = sb.special_loci(swapped, z=4).lines
    for i in range(3):
        assert linalg.same_space(a[i], b[2 - i], 11)


def test_gl_equivariance():
    rng = np.random.default_rng(9)
    q = 7
    for r in (2, 3):
        for _ in range(5):
            cfg = sb.random_config(r, q, rng)
            while True:
                g = rng.integers(0, q, size=(r, r))
                if linalg.det(g, q):
                    break
            moved = cfg.transformed(g)
            om = sb.omega_c0(r)
            assert sb.genericity_check_512(cfg).holds == sb.genericity_check_512(moved).holds
            assert sb.subspace_destabilizer_search(cfg, om)[0] == sb.subspace_destabilizer_search(moved, om)[0]
            if sb.genericity_check_512(cfg).holds:
                a, b = sb.special_loci(cfg, z=3), sb.special_loci(moved, z=3)
                assert linalg.same_space(linalg.matmul(g, a.Hz, q), b.Hz, q)
                for La, Lb in zip(a.lines, b.lines):
                    assert linalg.same_space(linalg.matmul(g, La, q), Lb, q)


def test_single_orbit():
    rng = np.random.default_rng(2)
    for r in (2, 3):
        for _ in range(10):
            a, b = _random_generic(rng, r, 7), _random_generic(rng, r, 7)
            g = sb.same_orbit(a, b)
            assert g is not None and linalg.det(g, 7)
            _, canon = sb.canonical_form(a)
            std = sb.standard_flags(r, 7)
            assert sb.same_flag(canon.flag("z1").data, std.flag("z1").data, 7)
            assert sb.same_flag(canon.flag("z2").data, std.flag("z2").data, 7)
            assert linalg.same_space(canon.line(), std.line(), 7)


def test_non_generic_has_no_orbit_map():
    cfg = sb.standard_flags(3, 7)
    cfg.points["z2"] = sb.FlagPoint(INF, "flag", np.eye(3, dtype=np.int64))
    assert sb.same_orbit(cfg, sb.standard_flags(3, 7)) is None


def test_config_validation():
    with pytest.raises(BadConfig):
        sb.FlagConfig(2, 6, {})
    with pytest.raises(BadConfig):
        sb.FlagConfig(2, 5, {"z1": sb.FlagPoint(0, "flag", [[1, 1], [1, 1]])})
    with pytest.raises(BadConfig):
        sb.FlagConfig(2, 5, {"a": sb.FlagPoint(0, "line", [1, 0]), "b": sb.FlagPoint(5, "line", [0, 1])})
    with pytest.raises(BadConfig):
        sb.genericity_check_512(sb.FlagConfig(2, 5, {}))


def test_config_text_round_trip():
    text = """rank=3
field=7
point z1 at=0 flag=1 0 0; 0 1 0; 0 0 1
point z2 at=inf flag=0 0 1; 0 1 0; 1 0 0
hyperplane y1 at=1 normal=1 1 1
point z at=2
"""
    cfg = sb.parse_flag_config(text)
    assert cfg.points["z2"].at is INF and cfg.points["z"].kind == "mark"
    again = sb.parse_flag_config(sb.format_flag_config(cfg))
    for label, pt in cfg.points.items():
        other = again.points[label]
        assert pt.at == other.at and pt.kind == other.kind
        if pt.data is not None:
            assert (pt.data == other.data).all()
    for bad in ["field=7\n", "rank=2\nfield=5\npoint z1 flag=1 0; 0 1\n", "rank=2\nfield=5\nfoo=1\n"]:
        with pytest.raises(ParseError):
            sb.parse_flag_config(bad)


@given(st.integers(0, 2 ** 32 - 1))
def test_subspace_verdict_matches_genericity_r3(seed):
    rng = np.random.default_rng(seed)
    cfg = sb.random_config(3, 5, rng)
    verdict, _ = sb.subspace_destabilizer_search(cfg, sb.omega_c0(3))
    assert (verdict == "stable") == sb.genericity_check_512(cfg).holds


def test_all_subspaces_counts():
    # Gaussian binomials [3 choose 1]_5 = 31, [4 choose 2]_3 = 130
    assert len(sb.all_subspaces(3, 5, 1)) == 31
    assert len(sb.all_subspaces(4, 3, 2)) == 130


def test_adapted_search_agrees_on_standard():
    cfg = sb.standard_flags(3, 7)
    om = canonical_weight({"y1": (2, 1), "z1": (1, 1, 1), "z2": (1, 1, 1)}, 3)
    assert sb.subspace_destabilizer_search(cfg, om, exhaustive=False)[0] == "stable"
