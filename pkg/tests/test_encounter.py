import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from colregs_rrt.encounter import (
    EncounterKind,
    ShipDomain,
    VesselState,
    classify_encounter,
    compliant_region,
    cpa,
    domain_violated,
    relative_bearing,
    tcpa,
)
from colregs_rrt.errors import DegenerateGeometryError, InfeasibleGeometryError, NoActionRequiredError
from colregs_rrt.geom import Point
from colregs_rrt.sampling import sample_half_annulus

from oracles import domain_form, stepping_closest_approach


def vessel(n, e, heading_deg, speed, length=100.0):
    return VesselState(Point(n, e), speed, math.radians(heading_deg), length)


def _oracle(os, tv):
    t = tcpa(os, tv)
    horizon = max(2.0 * abs(t), 1.0)
    return stepping_closest_approach(
        os.position.as_tuple(), os.velocity, tv.position.as_tuple(), tv.velocity, -horizon, horizon
    )


class TestVesselState:
    def test_velocity_is_compass(self):
        v = vessel(0, 0, 90, 5).velocity
        assert v == pytest.approx((0.0, 5.0), abs=1e-12)

    @pytest.mark.parametrize("speed, length", [(-1.0, 10.0), (1.0, 0.0)])
    def test_invariants(self, speed, length):
        with pytest.raises(ValueError):
            VesselState(Point(0, 0), speed, 0.0, length)


class TestTcpaCpa:
    def test_head_on_example(self):
        os, tv = vessel(0, 0, 0, 10), vessel(1000, 0, 180, 10)
        assert tcpa(os, tv) == pytest.approx(50.0)
        assert cpa(os, tv) == pytest.approx(0.0, abs=1e-9)

    def test_crossing_example(self):
        os, tv = vessel(0, 0, 0, 10), vessel(600, -500, 90, 10)
        assert tcpa(os, tv) == pytest.approx(55.0)
        assert cpa(os, tv) == pytest.approx(70.7107, abs=1e-4)

    @pytest.mark.parametrize("os, tv", [
        (vessel(0, 0, 0, 10), vessel(1000, 0, 180, 10)),
        (vessel(0, 0, 0, 10), vessel(600, -500, 90, 10)),
    ])
    def test_examples_match_stepping_oracle(self, os, tv):
        t, d = _oracle(os, tv)
        assert tcpa(os, tv) == pytest.approx(t, abs=0.01)
        assert cpa(os, tv) == pytest.approx(d, abs=0.05)

    def test_equal_velocities_are_degenerate(self):
        with pytest.raises(DegenerateGeometryError):
            tcpa(vessel(0, 0, 30, 7), vessel(500, 100, 30, 7))
        with pytest.raises(DegenerateGeometryError):
            cpa(vessel(0, 0, 30, 7), vessel(500, 100, 30, 7))

    def test_diverging_reports_current_distance(self):
        os, tv = vessel(0, 0, 180, 10), vessel(1000, 0, 0, 10)
        assert tcpa(os, tv) < 0
        assert cpa(os, tv) == pytest.approx(1000.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-3000, 3000), st.floats(-3000, 3000), st.floats(0, 360), st.floats(0.5, 15),
        st.floats(0, 360), st.floats(0.5, 15), st.floats(0, 2 * math.pi), st.floats(-1e4, 1e4), st.floats(-1e4, 1e4),
    )
    def test_cpa_invariant_under_rigid_motion(self, n, e, h1, s1, h2, s2, rot, tn, te):
        os, tv = vessel(0, 0, h1, s1), vessel(n, e, h2, s2)
        dv = np.subtract(tv.velocity, os.velocity)
        if np.hypot(*dv) < 1e-3:
            return

        def moved(v):
            c, s = math.cos(rot), math.sin(rot)
            p = v.position
            return VesselState(
                Point(tn + c * p.north - s * p.east, te + s * p.north + c * p.east),
                v.speed, v.heading + rot, v.length,
            )

        assert cpa(moved(os), moved(tv)) == pytest.approx(cpa(os, tv), abs=1e-6 * (1 + abs(n) + abs(e)))


class TestDomain:
    domain = ShipDomain.from_length(100.0)
    tv = vessel(0, 0, 0, 5)

    def test_default_axes(self):
        assert (self.domain.a_sd, self.domain.b_sd) == (800.0, 320.0)

    def test_coincident(self):
        assert domain_violated(Point(0, 0), self.tv, self.domain)

    def test_boundary_counts(self):
        assert domain_violated(Point(400, 0), self.tv, self.domain)

    def test_outside_on_beam(self):
        assert not domain_violated(Point(0, 200), self.tv, self.domain)

    def test_invalid_axes(self):
        with pytest.raises(ValueError):
            ShipDomain(100.0, 200.0)

    @given(st.floats(-1000, 1000), st.floats(-1000, 1000), st.floats(0, 2 * math.pi))
    def test_matches_direct_form(self, n, e, heading):
        tv = VesselState(Point(0, 0), 5.0, heading, 100.0)
        lhs = domain_form(n, e, 0.0, 0.0, heading, 800.0, 320.0)
        if abs(lhs - 1.0) > 1e-9:
            assert domain_violated(Point(n, e), tv, self.domain) == (lhs <= 1.0)

    @given(st.floats(-1000, 1000), st.floats(-1000, 1000), st.floats(0, 2 * math.pi))
    def test_circle_case(self, n, e, heading):
        tv = VesselState(Point(0, 0), 5.0, heading, 100.0)
        d = math.hypot(n, e)
        if abs(d - 250.0) > 1e-6:
            assert domain_violated(Point(n, e), tv, ShipDomain(500.0, 500.0)) == (d <= 250.0)


class TestRelativeBearing:
    observer = vessel(0, 0, 0, 5)

    @pytest.mark.parametrize("n, e, expected", [(100, 0, 0.0), (0, 100, math.pi / 2), (-100, 0, math.pi),
                                                (0, -100, -math.pi / 2)])
    def test_examples(self, n, e, expected):
        assert relative_bearing(self.observer, Point(n, e)) == pytest.approx(expected)

    def test_coincident(self):
        with pytest.raises(ValueError):
            relative_bearing(self.observer, Point(0, 0))


class TestClassify:
    def test_head_on(self):
        a = classify_encounter(vessel(0, 0, 0, 10), vessel(1000, 0, 180, 10), 500, 300)
        assert a.kind is EncounterKind.HEAD_ON
        assert a.tcpa == pytest.approx(50.0) and a.cpa == pytest.approx(0.0, abs=1e-9)

    def test_port_bow_forty_five(self):
        tv = vessel(0, 0, 0, 10)
        # Own ship placed at relative bearing -45 deg from the target, heading for the target's track ahead.
        d = 1000.0
        p = (d * math.cos(math.radians(-45)), d * math.sin(math.radians(-45)))
        meet = (p[0] + 700.0, 0.0)
        t_meet = (meet[0] - 0.0) / 10.0
        vel = ((meet[0] - p[0]) / t_meet, (meet[1] - p[1]) / t_meet)
        os = VesselState(Point(*p), math.hypot(*vel), math.atan2(vel[1], vel[0]))
        a = classify_encounter(os, tv, 500, 300)
        assert math.degrees(a.relative_bearing) == pytest.approx(-45.0)
        assert a.cpa < 500 and 0 < a.tcpa < 300
        assert a.kind is EncounterKind.CROSSING_GIVE_WAY

    def test_stand_on(self):
        a = classify_encounter(vessel(0, 0, 0, 10), vessel(2000, -1600, 90, 8), 500, 300)
        assert a.kind is EncounterKind.CROSSING_STAND_ON

    def test_no_risk_when_cpa_large(self):
        a = classify_encounter(vessel(0, 0, 0, 10), vessel(1000, 600, 180, 10), 500, 300)
        assert a.kind is EncounterKind.NO_RISK

    def test_no_risk_when_too_far_in_time(self):
        a = classify_encounter(vessel(0, 0, 0, 10), vessel(10000, 0, 180, 10), 500, 300)
        assert a.tcpa == pytest.approx(500.0)
        assert a.kind is EncounterKind.NO_RISK

    def test_no_risk_when_diverging(self):
        a = classify_encounter(vessel(0, 0, 180, 10), vessel(100, 0, 0, 10), 500, 300)
        assert a.kind is EncounterKind.NO_RISK

    def test_overtaking(self):
        a = classify_encounter(vessel(0, 0, 0, 10), vessel(1000, 0, 0, 5), 500, 300)
        assert a.kind is EncounterKind.OVERTAKING_OWN

    def test_overtaken(self):
        a = classify_encounter(vessel(1000, 0, 0, 5), vessel(0, 0, 0, 10), 500, 300)
        assert a.kind is EncounterKind.OVERTAKEN_BY_TARGET

    def test_invalid_thresholds(self):
        with pytest.raises(ValueError):
            classify_encounter(vessel(0, 0, 0, 10), vessel(1000, 0, 180, 10), 0, 300)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-3000, 3000), st.floats(-3000, 3000), st.floats(0, 360), st.floats(1, 15),
           st.floats(0, 360), st.floats(1, 15))
    def test_exclusive_and_consistent_with_gate(self, n, e, h1, s1, h2, s2):
        os, tv = vessel(0, 0, h1, s1), vessel(n, e, h2, s2)
        if math.hypot(n, e) < 1.0 or np.hypot(*np.subtract(os.velocity, tv.velocity)) < 1e-3:
            return
        a = classify_encounter(os, tv, 500, 300)
        gate = 0 < a.tcpa <= 300 and a.cpa < 500
        assert (a.kind is EncounterKind.NO_RISK) == (not gate)
        if gate and a.kind in (EncounterKind.HEAD_ON,):
            assert abs(math.degrees(a.relative_bearing)) <= 3.5 + 1e-9


class TestCompliantRegion:
    def test_head_on_region(self):
        os, tv = vessel(0, 0, 0, 10), vessel(4000, 0, 180, 10)
        a = classify_encounter(os, tv, 500, 300)
        region = compliant_region(os, tv, a, 500, 300)
        assert region.r_min == 500 and region.r_max == pytest.approx(3000)
        assert region.allowed_arc.width == pytest.approx(math.pi)
        assert region.center.north == pytest.approx(2000) and region.center.east == pytest.approx(0, abs=1e-9)
        assert region.goal_point.north == pytest.approx(5000)

    def test_head_on_arc_is_targets_port_side(self):
        # Target heads south, so its port side is east: own ship passes port to port on the east.
        os, tv = vessel(0, 0, 0, 10), vessel(4000, 0, 180, 10)
        region = compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)
        assert region.contains(Point(2000, 1000))
        assert not region.contains(Point(2000, -1000))

    def test_crossing_arc_is_astern_of_target(self):
        os, tv = vessel(0, 0, 0, 10), vessel(2000, 1600, 270, 8)
        a = classify_encounter(os, tv, 500, 300)
        assert a.kind is EncounterKind.CROSSING_GIVE_WAY
        region = compliant_region(os, tv, a, 500, 300)
        # Target heads west from the centre, so astern is east.
        assert region.contains(Point(2000, 1000))
        assert not region.contains(Point(2000, -1000))

    def test_overtaking_full_annulus(self):
        os, tv = vessel(0, 0, 0, 10), vessel(1000, 0, 0, 5)
        region = compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)
        assert region.allowed_arc.width == pytest.approx(2 * math.pi)

    def test_stand_on_raises(self):
        os, tv = vessel(0, 0, 0, 10), vessel(2000, -1600, 90, 8)
        with pytest.raises(NoActionRequiredError, match="stand-on: no action required"):
            compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)

    def test_no_risk_raises(self):
        os, tv = vessel(0, 0, 0, 10), vessel(1000, 900, 180, 10)
        with pytest.raises(NoActionRequiredError):
            compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)

    def test_start_inside_keep_out_raises(self):
        os, tv = vessel(0, 0, 0, 10), vessel(400, 0, 180, 10)
        with pytest.raises(InfeasibleGeometryError, match="inside d_act"):
            compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)

    def test_outer_radius_clamped_to_keep_start_inside(self):
        os, tv = vessel(0, 0, 0, 10), vessel(8000, 0, 180, 10)
        a = classify_encounter(os, tv, 500, 500)
        region = compliant_region(os, tv, a, 500, 500)
        assert region.r_max == pytest.approx(max(5000, 1.2 * (4000 + 500)))
        assert os.position.distance_to(region.center) < region.r_max

    def test_samples_inside_region(self):
        os, tv = vessel(0, 0, 0, 10), vessel(4000, 0, 180, 10)
        region = compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)
        pts = sample_half_annulus(region.to_annulus(), np.random.default_rng(3), size=100_000)
        assert all(region.contains(Point(n, e)) for n, e in pts[:2000])
        r = np.hypot(pts[:, 0] - region.center.north, pts[:, 1] - region.center.east)
        assert r.min() >= 500 - 1e-9 and r.max() <= 3000 + 1e-9
        assert (pts[:, 1] - region.center.east).min() >= -1e-6

    def test_head_on_sampled_points_pass_port_to_port(self):
        # A waypoint in the region keeps own ship on the target's port side when it sails through it.
        os, tv = vessel(0, 0, 0, 10), vessel(4000, 0, 180, 10)
        region = compliant_region(os, tv, classify_encounter(os, tv, 500, 300), 500, 300)
        pts = sample_half_annulus(region.to_annulus(), np.random.default_rng(5), size=200)
        t = np.arange(0.0, 400.0, 0.5)
        tv_n = 4000.0 - 10.0 * t
        for n, e in pts:
            leg = math.hypot(n, e)
            frac = np.minimum(t * 10.0 / leg, 1.0)
            os_n, os_e = frac * n, frac * e
            # Relative to the target (heading south), east is port.
            alongside = np.abs(os_n - tv_n) < 1.0
            assert np.all(os_e[alongside] >= -1e-6)
