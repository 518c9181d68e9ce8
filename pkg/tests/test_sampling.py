import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from colregs_rrt.errors import RegionTooSmallError
from colregs_rrt.geom import Arc, Point
from colregs_rrt.sampling import (
    AnnulusSpec,
    EllipticalAnnulusSpec,
    Rect,
    SampleSpace,
    SamplingMode,
    area_gain_annulus,
    area_gain_elliptical,
    elliptical_area_ratio,
    elliptical_theta_cdf,
    inverse_cdf_radial,
    invert_theta_cdf,
    radial_cdf,
    rejection_sample_rect,
    sample_elliptical_half_annulus,
    sample_half_annulus,
    select_space,
    switch_area_ratio,
    switch_threshold,
)

from oracles import ellipse_quadrant_area

PAPER = SamplingMode.PAPER_FAITHFUL
EXACT = SamplingMode.EXACT_AREA_UNIFORM
ORIGIN = Point(0.0, 0.0)


def radii(pts, center=ORIGIN):
    return np.hypot(pts[:, 0] - center.north, pts[:, 1] - center.east)


class TestSpecs:
    def test_annulus_invariants(self):
        with pytest.raises(ValueError):
            AnnulusSpec(ORIGIN, 5.0, 5.0)
        with pytest.raises(ValueError):
            AnnulusSpec(ORIGIN, -1.0, 5.0)

    def test_elliptical_invariants(self):
        with pytest.raises(ValueError):
            EllipticalAnnulusSpec(ORIGIN, 1.0, 2.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            EllipticalAnnulusSpec(ORIGIN, 2.0, 1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            EllipticalAnnulusSpec(ORIGIN, 2.0, 1.0, 0.0, 0.0, allowed_half=2)

    def test_informed_axes(self):
        spec = EllipticalAnnulusSpec.informed(Point(0, 0), Point(0, 4000), 5000.0)
        assert spec.a == 2500.0 and spec.b == pytest.approx(1500.0)
        assert spec.center == Point(0.0, 2000.0)
        assert spec.orientation == pytest.approx(math.pi / 2)

    def test_informed_rejects_short_cost(self):
        with pytest.raises(ValueError):
            EllipticalAnnulusSpec.informed(Point(0, 0), Point(0, 4000), 3000.0)


class TestRadialInverse:
    @pytest.mark.parametrize("mode", [PAPER, EXACT])
    def test_endpoints(self, mode):
        assert inverse_cdf_radial(0.0, 100.0, 300.0, mode) == pytest.approx(0.0, abs=1e-15)
        assert inverse_cdf_radial(1.0, 100.0, 300.0, mode) == pytest.approx(1.0, abs=1e-15)

    def test_linear_law_reduces_to_sqrt(self):
        assert inverse_cdf_radial(0.25, 0.0, 10.0, PAPER) == pytest.approx(0.5)

    def test_exact_definition(self):
        x = inverse_cdf_radial(0.3, 100.0, 300.0, EXACT)
        r = 100.0 + x * 200.0
        assert r == pytest.approx(math.sqrt(100.0**2 + 0.3 * (300.0**2 - 100.0**2)))

    @pytest.mark.parametrize("u", [-0.01, 1.01, math.nan])
    def test_rejects_bad_u(self, u):
        with pytest.raises(ValueError):
            inverse_cdf_radial(u, 0.0, 1.0)

    def test_linear_law_round_trip(self):
        rng = np.random.default_rng(0)
        for u in rng.random(1000):
            x = inverse_cdf_radial(float(u), 40.0, 100.0, PAPER)
            assert radial_cdf(x, 40.0, 100.0) == pytest.approx(u, abs=1e-12)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.99), st.sampled_from([PAPER, EXACT]))
    def test_monotone(self, u1, u2, rho, mode):
        lo, hi = sorted((u1, u2))
        assert inverse_cdf_radial(lo, rho, 1.0, mode) <= inverse_cdf_radial(hi, rho, 1.0, mode) + 1e-15


class TestHalfAnnulus:
    def test_returns_point(self):
        p = sample_half_annulus(AnnulusSpec(ORIGIN, 1.0, 2.0), np.random.default_rng(0))
        assert isinstance(p, Point) and 1.0 <= math.hypot(p.north, p.east) <= 2.0

    def test_thin_limit(self):
        spec = AnnulusSpec(ORIGIN, 999.999, 1000.0, Arc(0.3, 1e-9))
        pts = sample_half_annulus(spec, np.random.default_rng(1), size=100)
        assert np.allclose(radii(pts), 1000.0, atol=1e-3)
        assert np.allclose(np.arctan2(pts[:, 1], pts[:, 0]), 0.3, atol=1e-8)

    def test_disk_radius_distribution(self):
        spec = AnnulusSpec(ORIGIN, 0.0, 50.0, Arc.full())
        r = radii(sample_half_annulus(spec, np.random.default_rng(2), EXACT, size=100_000))
        assert stats.kstest(r, lambda x: (np.clip(x, 0, 50) / 50.0) ** 2).pvalue > 0.01

    def test_area_ratio_fraction(self):
        spec = AnnulusSpec(ORIGIN, 0.5, 1.0, Arc(0.0, math.pi))
        r = radii(sample_half_annulus(spec, np.random.default_rng(3), EXACT, size=100_000))
        assert np.mean(r < 0.75) == pytest.approx(5 / 12, abs=0.005)

    def test_membership(self):
        spec = AnnulusSpec(Point(100, -50), 20.0, 80.0, Arc(math.radians(300), math.pi))
        for mode in (PAPER, EXACT):
            pts = sample_half_annulus(spec, np.random.default_rng(4), mode, size=20_000)
            assert all(spec.contains(n, e) for n, e in pts)

    def test_linear_law_inner_edge_density(self):
        # Normalised radial density at x = 0 with r_min/r_max = 0.5: 0.25 for the linear law, 2/3 exact.
        spec = AnnulusSpec(ORIGIN, 0.5, 1.0)
        width = 0.02
        for mode, expected in ((PAPER, 0.25), (EXACT, 2.0 / 3.0)):
            x = (radii(sample_half_annulus(spec, np.random.default_rng(5), mode, size=400_000)) - 0.5) / 0.5
            density = np.mean(x < width) / width
            slope = 1.5 if mode is PAPER else 0.0
            assert density == pytest.approx(expected + slope * width / 2, abs=0.04)

    def test_scalar_and_bulk_agree_in_law(self):
        spec = AnnulusSpec(ORIGIN, 1.0, 3.0, Arc(1.0, math.pi))
        rng = np.random.default_rng(6)
        scalar = np.array([sample_half_annulus(spec, rng).as_tuple() for _ in range(5000)])
        bulk = sample_half_annulus(spec, np.random.default_rng(7), size=5000)
        assert stats.ks_2samp(radii(scalar), radii(bulk)).pvalue > 0.01

    def test_determinism(self):
        spec = AnnulusSpec(ORIGIN, 1.0, 3.0, Arc(1.0, math.pi))
        a = sample_half_annulus(spec, np.random.default_rng(42), size=100)
        b = sample_half_annulus(spec, np.random.default_rng(42), size=100)
        assert np.array_equal(a, b)


class TestThetaCdf:
    def test_zero(self):
        assert elliptical_theta_cdf(0.0, 2.0, 1.0, 0.5) == 0.0

    def test_circle(self):
        assert elliptical_theta_cdf(math.pi / 4, 3.0, 3.0, 1.0) == pytest.approx(0.125)

    def test_domain(self):
        with pytest.raises(ValueError):
            elliptical_theta_cdf(math.pi / 2, 2.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            elliptical_theta_cdf(-0.1, 2.0, 1.0, 0.0)

    def test_against_quadrature(self):
        a, b, r_min = 2000.0, 1000.0, 500.0
        total = math.pi * (a * b - r_min**2)
        for theta in (0.1, 0.5, 1.0, 1.4, 1.57):
            assert elliptical_theta_cdf(theta, a, b, r_min) == pytest.approx(
                ellipse_quadrant_area(a, b, r_min, theta) / total, rel=1e-9
            )

    @given(st.floats(0, 1.5707), st.floats(0, 1.5707))
    def test_monotone(self, t1, t2):
        lo, hi = sorted((t1, t2))
        assert elliptical_theta_cdf(lo, 3.0, 1.0, 0.5) <= elliptical_theta_cdf(hi, 3.0, 1.0, 0.5)


class TestThetaInversion:
    def test_zero(self):
        assert invert_theta_cdf(0.0, 2.0, 1.0, 0.5).theta == pytest.approx(0.0, abs=1e-9)

    def test_circle(self):
        assert invert_theta_cdf(0.125, 5.0, 5.0, 1.0).theta == pytest.approx(math.pi / 4, abs=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        for u in 0.25 * rng.random(500):
            res = invert_theta_cdf(float(u), 2.0, 1.0, 0.0)
            assert elliptical_theta_cdf(res.theta, 2.0, 1.0, 0.0) == pytest.approx(u, abs=1e-9)

    def test_reports_newton(self):
        res = invert_theta_cdf(0.1, 2.0, 1.0, 0.5)
        assert res.method == "newton" and res.iterations < 10

    def test_bisection_fallback(self):
        res = invert_theta_cdf(0.2, 1000.0, 1.0, 0.9, max_iter=0)
        assert res.method == "bisection"
        assert elliptical_theta_cdf(res.theta, 1000.0, 1.0, 0.9) == pytest.approx(0.2, abs=1e-10)

    @pytest.mark.parametrize("u", [-0.1, 0.25, 0.3])
    def test_rejects_bad_u(self, u):
        with pytest.raises(ValueError):
            invert_theta_cdf(u, 2.0, 1.0, 0.0)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 0.2499999), st.floats(1, 1000), st.floats(0, 1), st.floats(0, 0.999))
    def test_round_trip_property(self, u, b, stretch, hole):
        a = b + stretch * (1000 - b)
        r_min = hole * b
        res = invert_theta_cdf(u, a, b, r_min)
        assert 0.0 <= res.theta < math.pi / 2
        assert abs(elliptical_theta_cdf(res.theta, a, b, r_min) - u) < 1e-9


class TestEllipticalSampler:
    spec = EllipticalAnnulusSpec(Point(300, -200), 2000.0, 1000.0, 500.0, math.radians(30.0))

    def test_membership(self):
        for half in (-1, 0, 1):
            spec = EllipticalAnnulusSpec(Point(300, -200), 2000.0, 1000.0, 500.0, math.radians(30.0), half)
            pts = sample_elliptical_half_annulus(spec, np.random.default_rng(9), size=100_000)
            x, y = spec.to_local(pts[:, 0], pts[:, 1])
            r = np.hypot(x, y)
            assert np.all(r >= 500.0 - 1e-6)
            assert np.all(np.hypot(x / 2000.0, y / 1000.0) <= 1.0 + 1e-9)
            if half:
                assert np.all(half * y >= -1e-9)

    def test_scalar_draw(self):
        p = sample_elliptical_half_annulus(self.spec, np.random.default_rng(10))
        assert isinstance(p, Point) and self.spec.contains(p.north, p.east)

    def test_wedges_follow_area(self):
        spec = EllipticalAnnulusSpec(ORIGIN, 2000.0, 1000.0, 500.0, 0.0)
        pts = sample_elliptical_half_annulus(spec, np.random.default_rng(11), EXACT, size=100_000)
        ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * math.pi)
        edges = np.linspace(0.0, 2 * math.pi, 37)
        observed = np.histogram(ang, bins=edges)[0]

        def cum(t):
            # Area from 0 to t using quadrant symmetry of the quadrature oracle.
            q, rest = divmod(t, math.pi / 2)
            quarter = ellipse_quadrant_area(2000.0, 1000.0, 500.0, math.pi / 2)
            part = (
                ellipse_quadrant_area(2000.0, 1000.0, 500.0, rest)
                if int(q) % 2 == 0
                else quarter - ellipse_quadrant_area(2000.0, 1000.0, 500.0, math.pi / 2 - rest)
            )
            return q * quarter + part

        areas = np.diff([cum(t) for t in edges])
        expected = areas / areas.sum() * len(ang)
        assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_circle_equivalence(self):
        ell = EllipticalAnnulusSpec(ORIGIN, 100.0, 100.0, 40.0, 0.0)
        ann = AnnulusSpec(ORIGIN, 40.0, 100.0)
        a = sample_elliptical_half_annulus(ell, np.random.default_rng(12), size=100_000)
        b = sample_half_annulus(ann, np.random.default_rng(13), size=100_000)
        assert stats.ks_2samp(radii(a), radii(b)).pvalue > 0.01
        assert stats.ks_2samp(np.arctan2(a[:, 1], a[:, 0]), np.arctan2(b[:, 1], b[:, 0])).pvalue > 0.01

    def test_determinism(self):
        a = sample_elliptical_half_annulus(self.spec, np.random.default_rng(5), size=50)
        b = sample_elliptical_half_annulus(self.spec, np.random.default_rng(5), size=50)
        assert np.array_equal(a, b)


class TestRejection:
    def test_always_true_accepts_first(self):
        draw = rejection_sample_rect(Rect(0, 1, 0, 1), lambda n, e: True, np.random.default_rng(0))
        assert draw.rejected == 0

    def test_cap(self):
        with pytest.raises(RegionTooSmallError):
            rejection_sample_rect(Rect(0, 1, 0, 1), lambda n, e: False, np.random.default_rng(0), cap=100)

    def test_uniform_over_region(self):
        spec = AnnulusSpec(ORIGIN, 0.5, 1.0, Arc(0.0, math.pi))
        rng = np.random.default_rng(14)
        pts = np.array(
            [rejection_sample_rect(Rect.around(ORIGIN, 1.0), spec.contains, rng).point.as_tuple() for _ in range(20_000)]
        )
        direct = sample_half_annulus(spec, np.random.default_rng(15), EXACT, size=20_000)
        assert stats.ks_2samp(radii(pts), radii(direct)).pvalue > 0.01

    def test_rect_validation(self):
        with pytest.raises(ValueError):
            Rect(1, 0, 0, 1)


class TestAreaGains:
    def test_annulus_lower_bound(self):
        assert area_gain_annulus(0.0, 10.0) == pytest.approx(4 / math.pi)
        assert area_gain_annulus(0.0, 10.0) == pytest.approx(1.27324, abs=1e-5)

    def test_annulus_half_ratio(self):
        assert area_gain_annulus(5.0, 10.0) == pytest.approx(16 / (3 * math.pi))
        assert area_gain_annulus(5.0, 10.0) == pytest.approx(1.69765, abs=1e-5)

    def test_half_doubles(self):
        assert area_gain_annulus(3.0, 10.0, half=True) == pytest.approx(2 * area_gain_annulus(3.0, 10.0))

    def test_elliptical_no_hole(self):
        assert area_gain_elliptical(5000.0, 0.0, 2000.0) == pytest.approx(1.0)

    def test_elliptical_domain(self):
        with pytest.raises(ValueError):
            area_gain_elliptical(4000.0, 100.0, 2000.0)

    @given(st.floats(1, 499), st.floats(1, 499))
    def test_elliptical_monotone_in_hole(self, h1, h2):
        lo, hi = sorted((h1, h2))
        assert area_gain_elliptical(5000.0, lo, 2000.0) <= area_gain_elliptical(5000.0, hi, 2000.0)

    def test_gain_formula_vs_area_ratio(self):
        # The closed-form gain is the exact area ratio when start and goal sit 2 r_max apart.
        assert area_gain_elliptical(5000.0, 500.0, 2000.0) == pytest.approx(
            elliptical_area_ratio(5000.0, 4000.0, 500.0), rel=1e-12
        )
        # For other start-goal distances the two differ; both are reported, neither is asserted.
        assert area_gain_elliptical(5000.0, 500.0, 2000.0) != pytest.approx(
            elliptical_area_ratio(5000.0, 3000.0, 500.0), rel=1e-3
        )

    def test_area_ratio_monte_carlo(self):
        c_best, c_min, r_min = 5000.0, 4000.0, 500.0
        spec = EllipticalAnnulusSpec.informed(Point(0, 0), Point(4000, 0), c_best)
        rng = np.random.default_rng(16)
        x = spec.a * (2 * rng.random(400_000) - 1)
        y = spec.b * (2 * rng.random(400_000) - 1)
        inside = (x / spec.a) ** 2 + (y / spec.b) ** 2 <= 1
        hole = inside & (np.hypot(x, y) < r_min)
        mc = inside.sum() / (inside.sum() - hole.sum())
        assert mc == pytest.approx(elliptical_area_ratio(c_best, c_min, r_min), rel=0.01)


class TestSwitching:
    def test_zero_c_min(self):
        assert switch_threshold(0.0, 1000.0) == pytest.approx(1000.0)

    def test_example(self):
        gamma = switch_threshold(2000.0, 1000.0)
        assert gamma == pytest.approx(2058.171, abs=1e-3)
        assert switch_area_ratio(gamma, 2000.0, 1000.0) == pytest.approx(1.0, rel=1e-6)

    def test_informed_half_ellipse_is_quarter_at_threshold(self):
        # The ellipse actually sampled has semi-axes half those compared by the rule.
        c_min, r_max = 2000.0, 1000.0
        gamma = switch_threshold(c_min, r_max)
        spec = EllipticalAnnulusSpec.informed(Point(0, 0), Point(c_min, 0), gamma)
        half_ellipse = 0.5 * math.pi * spec.a * spec.b
        semicircle = 0.5 * math.pi * r_max**2
        assert half_ellipse / semicircle == pytest.approx(0.25, rel=1e-9)

    @given(st.floats(0, 1e5), st.floats(1e-3, 1e5))
    def test_gamma_bounds(self, c_min, r_max):
        gamma = switch_threshold(c_min, r_max)
        assert gamma >= max(c_min, r_max) * (1 - 1e-12)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            switch_threshold(-1.0, 10.0)

    def test_select_space(self):
        gamma = switch_threshold(4000.0, 3000.0)
        assert select_space(None, 4000.0, 3000.0) is SampleSpace.HALF_ANNULUS
        assert select_space(math.inf, 4000.0, 3000.0) is SampleSpace.HALF_ANNULUS
        assert select_space(4000.0, 4000.0, 3000.0) is SampleSpace.ELLIPTICAL_HALF_ANNULUS
        assert select_space(10 * gamma, 4000.0, 3000.0) is SampleSpace.HALF_ANNULUS
