from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobsplit.errors import BadHeckePoint, BadProfile, BadT, BadType, WeightOverflow
from frobsplit.parweights import (
    GPSProfile, Infinitesimal, ParData, PointWeight, SubsheafProfile, TwoComponent, canonical_weight,
    check_point, chi_range_check, codim_bounds, ell, fmt, format_pardata, gps_alpha_semistable,
    hecke_transform, extra_point_sigma_bounds, m_vectors, n_j_from_numbers, n_j_omega, omega_t_family,
    omega_t_weights, par_chi, parse_pardata, semistability_gap, sigma_min, sigma_value,
)

SECTION5 = {"y1": (2, 1), "z1": (1, 1, 1), "z2": (1, 1, 1)}


def compositions(r):
    if r == 0:
        yield ()
        return
    for head in range(1, r + 1):
        for tail in compositions(r - head):
            yield (head,) + tail


def test_canonical_weight_examples():
    om = canonical_weight({"a": (1, 1, 1), "b": (2, 1)}, 3)
    assert om.k == 6 and om.points["a"].a == (0, 2, 4) and om.points["b"].a == (0, 3)
    assert canonical_weight({"a": (1, 1)}, 2).points["a"].a == (0, 2)
    with pytest.raises(BadType):
        canonical_weight({"a": (1, 1)}, 3)
    with pytest.raises(WeightOverflow):
        check_point(PointWeight((1, 1), (0, 4)), 2, 4)


def test_par_chi_and_ell_section5():
    om = canonical_weight(SECTION5, 3)
    assert par_chi(om) == Q(11, 2)
    assert ell(om) == 0
    assert par_chi(ParData(3, 1, 0, 6, {})) == 4
    assert ell(ParData(4, 0, 1, 8, {})) == 0
    assert ell(canonical_weight({"z": (1, 1)}, 2)) == 3


def test_profile_validation():
    om = canonical_weight(SECTION5, 3)
    with pytest.raises(BadProfile):
        par_chi(om, SubsheafProfile(1, 0, {"y1": (1, 0), "z1": (1, 0, 0)}))
    with pytest.raises(BadProfile):
        par_chi(om, SubsheafProfile(1, 0, {"y1": (0, 1), "z1": (2, 0, 0), "z2": (1, 0, 0)}))


def test_gap_vanishes_at_E():
    om = canonical_weight(SECTION5, 3, d=2, g=1)
    full = SubsheafProfile(3, 2, {x: pw.n for x, pw in om.points.items()})
    assert semistability_gap(om, full) == 0
    assert par_chi(om, full) == par_chi(om)


def test_sigma_value_examples():
    om4 = canonical_weight({"x": (1, 1, 1, 1)}, 4)
    assert sigma_value(om4, "x", (2, (1, 1, 0, 0))) == 2
    om3 = canonical_weight({"x": (2, 1)}, 3)
    assert sigma_value(om3, "x", (1, (1, 0))) == Q(1, 2)
    assert sigma_value(om3, "x", (1, (0, 1))) == 1
    assert sigma_min(om3, "x", 1) == Q(1, 2)
    assert sigma_min(om3, "x", 2) == Q(1, 2)
    with pytest.raises(BadProfile):
        sigma_value(om3, "x", (1, (2, 0)))


@pytest.mark.parametrize("r", range(2, 7))
def test_full_flag_sigma_constant(r):
    om = canonical_weight({"x": (1,) * r}, r)
    for r1 in range(1, r):
        vals = {sigma_value(om, "x", (r1, m)) for m in m_vectors((1,) * r, r1)}
        assert vals == {Q(r1 * (r - r1), 2)}


@pytest.mark.parametrize("r", range(2, 9))
def test_hyperplane_type_case_table(r):
    om = canonical_weight({"x": (r - 1, 1)}, r)
    for r1 in range(1, r):
        for m in m_vectors((r - 1, 1), r1):
            expect = Q(r - r1, 2) if m[1] else Q(r1, 2)
            assert sigma_value(om, "x", (r1, m)) == expect


def test_sigma_min_lower_bound():
    # single-part compositions carry no flag and give 0; they are not parabolic points
    for r in range(2, 6):
        for n in compositions(r):
            if len(n) == 1:
                continue
            om = canonical_weight({"x": n}, r)
            for r1 in range(1, r):
                assert sigma_min(om, "x", r1) >= Q(1, om.k)


def test_codim_bounds_examples():
    om = ParData(2, 0, 2, 4, {x: PointWeight((1, 1), (0, 2)) for x in "abc"})
    first, second = codim_bounds(om)
    assert first == second == Q(7, 4)
    om1 = ParData(2, 0, 1, 4, {x: PointWeight((1, 1), (0, 1)) for x in "ab"})
    assert codim_bounds(om1).first == Q(2, 4)
    om3 = canonical_weight({x: (1, 1, 1) for x in "abcd"}, 3)
    assert codim_bounds(om3).sharp == 2


def test_hecke_examples():
    om = canonical_weight({"z": (1, 1, 1)}, 3, d=1)
    out = hecke_transform(om, "z")
    assert out.points["z"].a == (0, 2, 4) and out.d == 0
    assert hecke_transform(canonical_weight({"z": (1, 1)}, 2), "z").points["z"].a == (0, 2)
    with pytest.raises(BadHeckePoint):
        hecke_transform(canonical_weight({"z": (2, 1)}, 3), "z")


@pytest.mark.parametrize("r", range(2, 9))
def test_hecke_fixes_canonical(r):
    om = canonical_weight({"z": (1,) * r, "w": (r - 1, 1)}, r)
    out = hecke_transform(om, "z")
    assert out.points == om.points and out.d == om.d - 1


@given(st.integers(2, 6).flatmap(lambda r: st.tuples(
    st.just(r), st.lists(st.integers(1, 4), min_size=r - 1, max_size=r - 1))))
def test_hecke_output_valid(data):
    r, steps = data
    a = [0]
    for s in steps:
        a.append(a[-1] + s)
    k = a[-1] + 1 + steps[0]
    om = ParData(r, 0, 0, k, {"z": PointWeight((1,) * r, tuple(a))})
    out = hecke_transform(om, "z")
    check_point(out.points["z"], r, k)


def test_omega_t_examples():
    fr = omega_t_weights(2, ["z"], "z", Q(0))
    assert fr["z"][1] == (0, Q(1, 2))
    assert omega_t_weights(3, ["z"], "z", Q(0))["z"][1] == (0, Q(1, 6), Q(1, 3))
    assert fr["y1"][1] == (0, Q(1, 2))
    om = omega_t_family(3, ["z"], "z", Q(1, 100))
    assert om.weights("z")[-1] == Q(1, 3) + Q(1, 100)
    for r in (2, 3, 4):
        with pytest.raises(BadT):
            omega_t_weights(r, ["z"], "z", Q(1, (r - 1) * r))
        with pytest.raises(BadT):
            omega_t_weights(r, ["z"], "z", Q(-1, (r - 1) * r))


def test_infinitesimal_order():
    t = Infinitesimal.t()
    assert Q(0) < t < Q(1, 10 ** 9)
    assert t + Q(1, 2) > Q(1, 2)
    assert t * t < t
    assert -t < 0 and (t - t) == 0
    assert Infinitesimal(1, -5) < 1


@pytest.mark.parametrize("r", [3, 4, 5])
def test_extra_point_bounds_hold(r):
    rep = extra_point_sigma_bounds(r)
    assert rep.holds
    assert rep.min_r1_1 >= rep.bound and rep.min_r1_rm1 >= rep.bound


def test_extra_point_bounds_rank2_exception():
    # at r = 2 the single extra point carries a_2/k = 1/2 + t and Sigma drops to 1/2 - t
    rep = extra_point_sigma_bounds(2)
    assert not rep.holds
    assert rep.min_r1_1 == Q(1, 2) - Infinitesimal.t()


def test_gps_examples():
    prof = GPSProfile(1, Q(2), 1, Q(1), 2)
    assert gps_alpha_semistable(prof, 4, 2) == "strictly-semistable"
    prof = GPSProfile(1, Q(3), 1, Q(1), 2)
    assert gps_alpha_semistable(prof, 4, 2) == "unstable"
    prof = GPSProfile(1, Q(1), 1, Q(1), 2)
    assert gps_alpha_semistable(prof, 4, 2) == "stable"
    full = GPSProfile(2, Q(4), 2, Q(1, 2), 2)
    assert gps_alpha_semistable(full, 4, 2) == "strictly-semistable"
    with pytest.raises(BadProfile):
        GPSProfile(1, Q(1), 3, Q(1), 2)
    with pytest.raises(BadProfile):
        GPSProfile(1, Q(1), 1, Q(0), 2)


def test_gps_two_component_full_is_equality():
    om = canonical_weight({"a": (1, 1), "b": (1, 1)}, 2)
    two = TwoComponent(om, frozenset({"a"}), 1, 2)
    prof = GPSProfile((2, 2), Q(5), 2, Q(1, 3), 2, two)
    assert gps_alpha_semistable(prof, 5, 2) == "strictly-semistable"


def test_n_j_examples():
    assert n_j_from_numbers(2, 4, 1, 1, 2, 2, 2) == (1, 1)
    om = canonical_weight({"a": (1, 1), "b": (1, 1)}, 2)
    two = TwoComponent(om, frozenset({"a"}), 1, 1)
    n1, n2 = n_j_omega(two)
    assert n1 == n2
    assert not chi_range_check(n1 - 1, n2, n1, n2, 2, 1, 1, Q(1, 2))
    assert chi_range_check(n1 + Q(1, 2), n2 + Q(1, 2), n1, n2, 2, 1, 1, Q(1, 2))


def test_text_format_round_trip():
    om = canonical_weight(SECTION5, 3, d=-1, g=2)
    assert parse_pardata(format_pardata(om)) == om
    assert fmt(Q(11, 2)) == "11/2" and fmt(0) == "0/1"
