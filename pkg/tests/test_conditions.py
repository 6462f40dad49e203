"""Per-region condition checks: LP route, falsification, branch-and-bound,
set conditions, and the end-to-end certificate pipeline."""

import numpy as np
import pytest

from relubarrier import (DEFAULT_CONFIG, FALSIFIED, UNKNOWN, VERIFIED,
                         ActivationIndicator, DynamicsSystem, NoRegions,
                         boundary_propagation, build_valid_region,
                         check_initial_condition, check_invariance,
                         check_region_affine, check_unsafe_condition,
                         falsify_region, is_affine, parse_expression,
                         verify_certificate, verify_region_bab)

from helpers import diamond_net, slice_grid, CUBIC2D


def ind(*bits):
    return ActivationIndicator((tuple(bits),))


def diamond_regions():
    net = diamond_net()
    seed = build_valid_region(net, ind(1, 0, 1, 0))
    return net, boundary_propagation(net, seed).regions


def first_quadrant_region():
    net = diamond_net()
    return net, build_valid_region(net, ind(1, 0, 1, 0))


# -- affine route ------------------------------------------------------------------

def test_affine_route_stable_flow_bound_one():
    _net, region = first_quadrant_region()[0], None
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    F, c = is_affine(sys)
    verdict = check_region_affine(region, F, c)
    assert verdict.status == VERIFIED
    assert verdict.bound == pytest.approx(1.0, abs=1e-9)
    assert verdict.method == "lp"


def test_affine_route_constant_negative_falsifies():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["1", "0"], dim=2)
    F, c = is_affine(sys)
    verdict = check_region_affine(region, F, c)
    assert verdict.status == FALSIFIED
    assert verdict.witness is not None
    # witness on the slice segment with value exactly -1
    assert region.slice.contains(verdict.witness, tol=1e-7)
    assert verdict.witness_value == pytest.approx(-1.0, abs=1e-9)


def test_affine_route_zero_field_verified():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["0", "0"], dim=2)
    F, c = is_affine(sys)
    verdict = check_region_affine(region, F, c)
    assert verdict.status == VERIFIED
    assert verdict.bound == pytest.approx(0.0, abs=1e-12)


def test_affine_route_completeness_against_grid():
    net, regions = diamond_regions()
    rng = np.random.default_rng(8)
    for _ in range(20):
        F = rng.normal(size=(2, 2))
        c = rng.normal(size=2)
        for region in regions:
            verdict = check_region_affine(region, F, c)
            pts = slice_grid(region, 2000)
            vals = (pts @ F.T + c) @ region.affine.w
            grid_min = vals.min()
            if abs(verdict.bound if verdict.bound is not None else grid_min) <= 1e-5:
                continue  # too marginal for a grid comparison
            if verdict.status == VERIFIED:
                assert grid_min >= -1e-5
            elif verdict.status == FALSIFIED:
                assert grid_min <= 1e-5


# -- falsification search ---------------------------------------------------------------

def test_falsify_finds_witness_for_constant_negative():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["1", "0"], dim=2)
    hit = falsify_region(region, sys, budget=100)
    assert hit is not None
    assert hit.status == FALSIFIED
    assert region.slice.contains(hit.witness, tol=1e-6)
    assert hit.witness_value < -1e-9


def test_falsify_absent_for_stable_flow():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    assert falsify_region(region, sys, budget=100) is None


def test_falsify_sign_change_matches_grid_oracle():
    """Cubic flow whose w.f changes sign along the slice segment."""
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(CUBIC2D, dim=2)
    pts = slice_grid(region, 10_000)
    w = region.affine.w
    grid_vals = np.array([w @ sys(p) for p in pts[::10]])
    hit = falsify_region(region, sys, budget=100)
    if grid_vals.min() < -1e-6:
        assert hit is not None
        assert hit.witness_value < -1e-9
        direct = w @ sys(np.asarray(hit.witness))
        assert hit.witness_value == pytest.approx(direct, rel=1e-9, abs=1e-12)
    else:
        assert hit is None


# -- branch and bound ------------------------------------------------------------------

def test_bab_certifies_stable_flow():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    verdict = verify_region_bab(region, sys)
    assert verdict.status == VERIFIED
    assert verdict.bound is not None and verdict.bound >= -1e-9


def test_bab_falsifies_constant_negative():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["1", "0"], dim=2)
    verdict = verify_region_bab(region, sys)
    assert verdict.status == FALSIFIED
    assert verdict.witness is not None
    assert region.slice.contains(verdict.witness, tol=1e-6)


def test_bab_cubic_inward_verified():
    net, region = first_quadrant_region()
    sys = DynamicsSystem.parse(["-x1^3", "-x2^3"], dim=2)
    verdict = verify_region_bab(region, sys)
    assert verdict.status == VERIFIED


def test_bab_flat_case_margin_semantics():
    """w.f identically 0 on the slice: Unknown at zero margin, Verified
    with any positive margin."""
    net, region = first_quadrant_region()
    # w = (-1,-1): w.f = -(x2^3) - (-x2^3) = 0 pointwise, but the interval
    # enclosure of the difference never collapses
    sys = DynamicsSystem.parse(["x2^3", "-x2^3"], dim=2)
    verdict = verify_region_bab(region, sys)
    assert verdict.status == UNKNOWN
    # a margin above the residual enclosure width at the minimum box size
    cfg = DEFAULT_CONFIG.updated(tol_margin=1e-3)
    verdict = verify_region_bab(region, sys, cfg)
    assert verdict.status == VERIFIED


def test_bab_verified_never_contradicted_by_sampling():
    net, regions = diamond_regions()
    systems = [DynamicsSystem.parse(["-x1^3", "-x2^3"], dim=2),
               DynamicsSystem.parse(["-x1 - x2^2 * x1", "-x2"], dim=2),
               DynamicsSystem.parse(CUBIC2D, dim=2)]
    for sys in systems:
        for region in regions:
            verdict = verify_region_bab(region, sys)
            if verdict.status != VERIFIED:
                continue
            pts = slice_grid(region, 10_000)
            vals = np.array([region.affine.w @ sys(p) for p in pts[::7]])
            assert vals.min() >= -DEFAULT_CONFIG.tol_margin - 1e-9


def test_margin_monotonicity_never_flips_verified_to_falsified():
    net, regions = diamond_regions()
    sys = DynamicsSystem.parse(CUBIC2D, dim=2)
    for region in regions:
        small = verify_region_bab(region, sys, DEFAULT_CONFIG.updated(tol_margin=0.0))
        large = verify_region_bab(region, sys, DEFAULT_CONFIG.updated(tol_margin=0.5))
        if small.status == VERIFIED:
            assert large.status == VERIFIED


# -- invariance aggregation ----------------------------------------------------------

def test_invariance_diamond_stable_all_verified():
    net, regions = diamond_regions()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    result = check_invariance(net, regions, sys)
    assert result.status == VERIFIED
    assert len(result.region_verdicts) == 4
    for v in result.region_verdicts:
        assert v.status == VERIFIED
        assert v.bound == pytest.approx(1.0, abs=1e-6)


def test_invariance_diamond_drift_falsified_with_witness():
    net, regions = diamond_regions()
    sys = DynamicsSystem.parse(["1", "0"], dim=2)
    result = check_invariance(net, regions, sys)
    assert result.status == FALSIFIED
    falsified = [v for v in result.region_verdicts if v.status == FALSIFIED]
    assert falsified
    for v in falsified:
        region = next(r for r in regions if r.indicator == v.indicator)
        assert region.slice.contains(v.witness, tol=1e-6)
        assert v.witness_value < -1e-9


def test_invariance_empty_regions_raises():
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    with pytest.raises(NoRegions):
        check_invariance(diamond_net(), [], sys)


def test_witness_revalidation_on_nonlinear_falsified():
    net, regions = diamond_regions()
    sys = DynamicsSystem.parse(["x1^3 + 1", "x2^3"], dim=2)
    result = check_invariance(net, regions, sys)
    for v in result.region_verdicts:
        if v.status == FALSIFIED:
            region = next(r for r in regions if r.indicator == v.indicator)
            assert region.slice.contains(v.witness, tol=1e-6)
            direct = region.affine.w @ sys(np.asarray(v.witness))
            assert direct < -1e-9
            assert direct == pytest.approx(v.witness_value, rel=1e-9, abs=1e-12)


# -- set conditions ---------------------------------------------------------------------

def test_initial_condition_verified():
    net, regions = diamond_regions()
    h_init = parse_expression("0.04 - x1^2 - x2^2", 2)
    result = check_initial_condition(net, regions, h_init)
    assert result.status == VERIFIED
    assert result.probe is not None
    assert result.probe.ok
    assert result.probe.h_value > 0


def test_initial_condition_boundary_ball_falsified():
    net, regions = diamond_regions()
    h_init = parse_expression("0.01 - (x1 - 1)^2 - x2^2", 2)
    result = check_initial_condition(net, regions, h_init)
    assert result.status == FALSIFIED
    falsified = [v for v in result.region_verdicts if v.status == FALSIFIED]
    assert falsified
    for v in falsified:
        assert np.linalg.norm(np.asarray(v.witness) - np.array([1.0, 0.0])) < 1e-3


def test_unsafe_condition_verified():
    net, regions = diamond_regions()
    h_unsafe = parse_expression("1 - (x1 - 3)^2 - (x2 - 3)^2", 2)
    result = check_unsafe_condition(net, regions, h_unsafe)
    assert result.status == VERIFIED
    assert result.probe.ok
    assert result.probe.h_value < 0


def test_unsafe_condition_boundary_ball_falsified():
    net, regions = diamond_regions()
    h_unsafe = parse_expression("0.01 - (x1 - 1)^2 - x2^2", 2)
    result = check_unsafe_condition(net, regions, h_unsafe)
    assert result.status == FALSIFIED


def test_membership_asymmetry_initial_needs_strict_inside():
    """A set sitting wholly on the h < 0 side passes part one (no slice
    contact at tolerance zero) but must fail the membership probe."""
    net, regions = diamond_regions()
    # tiny ball just outside the vertex (1,0); sup over slice = 0 exactly
    h_init = parse_expression("0.000001 - (x1 - 1.001)^2 - x2^2", 2)
    result = check_initial_condition(net, regions, h_init)
    assert result.status == FALSIFIED
    assert result.probe is not None
    assert not result.probe.ok
    assert result.probe.h_value < 0  # sampled point is outside, h negative


def test_membership_asymmetry_unsafe_needs_strict_outside():
    net, regions = diamond_regions()
    # ball strictly inside the invariant set: h > 0 at every sample
    h_unsafe = parse_expression("0.01 - x1^2 - x2^2", 2)
    result = check_unsafe_condition(net, regions, h_unsafe)
    assert result.status == FALSIFIED
    assert not result.probe.ok
    assert result.probe.h_value > 0


def test_affine_set_expression_uses_lp_route():
    net, regions = diamond_regions()
    # half-plane x1 >= 2 misses the diamond; affine handling is exact
    h_init = parse_expression("x1 - 2", 2)
    result = check_initial_condition(net, regions, h_init)
    for v in result.region_verdicts:
        assert v.method == "lp"


# -- end-to-end --------------------------------------------------------------------------

def test_verify_certificate_all_verified():
    net = diamond_net()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    h_init = parse_expression("0.04 - x1^2 - x2^2", 2)
    h_unsafe = parse_expression("1 - (x1 - 3)^2 - (x2 - 3)^2", 2)
    verdict = verify_certificate(net, sys, h_init, h_unsafe)
    assert verdict.invariance == VERIFIED
    assert verdict.initial_condition == VERIFIED
    assert verdict.unsafe_condition == VERIFIED
    assert verdict.overall == VERIFIED
    assert verdict.failure is None
    assert len(verdict.enumeration.regions) == 4
    assert any("connected" in c for c in verdict.caveats)


def test_verify_certificate_drift_falsifies_invariance_only():
    net = diamond_net()
    sys = DynamicsSystem.parse(["1", "0"], dim=2)
    h_init = parse_expression("0.04 - x1^2 - x2^2", 2)
    h_unsafe = parse_expression("1 - (x1 - 3)^2 - (x2 - 3)^2", 2)
    verdict = verify_certificate(net, sys, h_init, h_unsafe)
    assert verdict.invariance == FALSIFIED
    assert verdict.initial_condition == VERIFIED
    assert verdict.unsafe_condition == VERIFIED
    assert verdict.overall == FALSIFIED


def test_verify_certificate_constant_network_structured_failure():
    from helpers import all_dead_net
    net = all_dead_net()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    cfg = DEFAULT_CONFIG.updated(max_attempts=3)
    verdict = verify_certificate(net, sys, None, None, cfg)
    assert verdict.failure is not None
    assert verdict.failure["kind"] == "search-exhausted"
    assert verdict.overall == UNKNOWN


def test_verify_certificate_empty_set_reports_sampler_exhaustion():
    net = diamond_net()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    h_init = parse_expression("0 - 1 - x1^2", 2)  # empty in any domain
    verdict = verify_certificate(net, sys, h_init, None)
    assert verdict.initial_condition == UNKNOWN
    assert any("sampling exhausted" in c for c in verdict.caveats)


def test_verify_certificate_unknown_flat_case():
    """Nonlinear flat objective leaves branch-and-bound undecided at zero
    margin; the aggregate is Unknown, not Falsified."""
    net = diamond_net()
    sys = DynamicsSystem.parse(["x2^3", "-x2^3"], dim=2)
    verdict = verify_certificate(net, sys, None, None)
    assert verdict.invariance == UNKNOWN
    assert verdict.overall == UNKNOWN
    statuses = {v.status for v in verdict.invariance_result.region_verdicts}
    assert UNKNOWN in statuses
    assert FALSIFIED not in statuses


def test_verify_certificate_timings_and_seeds_stable():
    net = diamond_net()
    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    h_init = parse_expression("0.04 - x1^2 - x2^2", 2)
    h_unsafe = parse_expression("1 - (x1 - 3)^2 - (x2 - 3)^2", 2)
    a = verify_certificate(net, sys, h_init, h_unsafe)
    b = verify_certificate(net, sys, h_init, h_unsafe)
    assert [r.indicator for r in a.enumeration.regions] == \
           [r.indicator for r in b.enumeration.regions]
    for va, vb in zip(a.invariance_result.region_verdicts,
                      b.invariance_result.region_verdicts):
        assert va.status == vb.status
        assert va.bound == vb.bound
    assert set(a.timings) >= {"search_s", "enumeration_s", "invariance_s",
                              "initial_s", "unsafe_s", "total_s"}


def test_threaded_run_matches_serial():
    net = diamond_net()
    sys = DynamicsSystem.parse(CUBIC2D, dim=2)
    h_init = parse_expression("0.04 - x1^2 - x2^2", 2)
    h_unsafe = parse_expression("1 - (x1 - 3)^2 - (x2 - 3)^2", 2)
    serial = verify_certificate(net, sys, h_init, h_unsafe)
    threaded = verify_certificate(net, sys, h_init, h_unsafe,
                                  DEFAULT_CONFIG.updated(threads=4))
    assert serial.invariance == threaded.invariance
    assert serial.initial_condition == threaded.initial_condition
    assert serial.unsafe_condition == threaded.unsafe_condition
    for va, vb in zip(serial.invariance_result.region_verdicts,
                      threaded.invariance_result.region_verdicts):
        assert va.status == vb.status
