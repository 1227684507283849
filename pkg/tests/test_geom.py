import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planarclusters.geom import (
    Curve,
    DegenerateCurveError,
    EmptyTrimError,
    chord_arc_constant,
    co_normal,
    curve_hausdorff,
    frame,
    frames,
    geodesic_dist,
    hausdorff,
    is_simple,
    perp,
    polyline_distance,
    resample,
    trim,
)


def circle(n=256, r=1.0, ccw=True):
    th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    if not ccw:
        th = -th
    return Curve(np.stack([r * np.cos(th), r * np.sin(th)], axis=1), closed=True)


def segment(n=3):
    x = np.linspace(0.0, 2.0, n)
    return Curve(np.stack([x, np.zeros(n)], axis=1), closed=False)


def quarter_arc(n=128, r=1.0):
    th = np.linspace(0.0, math.pi / 2.0, n)
    return Curve(np.stack([r * np.cos(th), r * np.sin(th)], axis=1), closed=False)


class TestConventions:
    def test_perp_rotates_clockwise(self):
        assert np.allclose(perp(np.array([1.0, 2.0])), [2.0, -1.0])

    def test_horizontal_segment_frame(self):
        tau, nu, kappa = frame(segment(), 1)
        assert np.allclose(tau, [1.0, 0.0])
        assert np.allclose(nu, [0.0, -1.0])
        assert kappa == 0.0

    def test_ccw_circle_curvature_positive_one(self):
        _, nu, kappa = frames(circle(512))
        assert np.allclose(kappa, 1.0, atol=1e-4)
        # normal points outward on a CCW circle
        assert float(nu[0] @ [1.0, 0.0]) > 0.99

    def test_cw_circle_curvature_negative(self):
        _, _, kappa = frames(circle(512, ccw=False))
        assert np.allclose(kappa, -1.0, atol=1e-4)

    def test_endpoint_tangent_second_order(self):
        c = quarter_arc(256)
        tau, _, _ = frame(c, 0)
        # exact tangent at angle 0 on a CCW circle is (0, 1)
        assert np.linalg.norm(tau - [0.0, 1.0]) < 1e-4

    def test_co_normal_points_outward_along_curve(self):
        c = segment()
        assert np.allclose(co_normal(c, 0), [-1.0, 0.0])
        assert np.allclose(co_normal(c, 1), [1.0, 0.0])
        with pytest.raises(ValueError):
            co_normal(circle(), 0)

    def test_coincident_points_rejected(self):
        with pytest.raises(ValueError):
            Curve(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]), closed=False)
        with pytest.raises(DegenerateCurveError):
            Curve(np.array([[0.0, 0.0]]), closed=False)


class TestLengthArea:
    def test_circle_length(self):
        assert circle(1024).length == pytest.approx(2.0 * math.pi, rel=1e-4)

    def test_resample_preserves_trace(self):
        c = quarter_arc(40)
        fine = resample(c, 400)
        assert fine.n == 400
        assert curve_hausdorff(c, fine) < 1e-3
        assert np.allclose(fine.points[0], c.points[0])
        assert np.allclose(fine.points[-1], c.points[-1])

    def test_geodesic_vs_chord_on_right_angle_arc(self):
        c = quarter_arc(512)
        g = geodesic_dist(c, 0, c.n - 1)
        chord = np.linalg.norm(c.points[-1] - c.points[0])
        assert g / chord == pytest.approx((math.pi / 2.0) / math.sqrt(2.0), rel=1e-4)

    def test_chord_arc_constant_near_one_for_flat_curve(self):
        assert chord_arc_constant(segment(64)) == pytest.approx(1.0, abs=1e-9)
        assert chord_arc_constant(quarter_arc()) > 1.0


class TestHausdorff:
    def test_two_points(self):
        assert hausdorff([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5.0)

    def test_window_restriction(self):
        a = [[0.0, 0.0], [10.0, 0.0]]
        b = [[0.0, 1.0], [10.0, 5.0]]
        full = hausdorff(a, b)
        windowed = hausdorff(a, b, window=((0.0, 0.0), 2.0))
        assert full == pytest.approx(5.0)
        assert windowed == pytest.approx(1.0)

    def test_window_one_side_empty_is_inf(self):
        assert hausdorff([[0.0, 0.0]], [[10.0, 0.0]], window=((0.0, 0.0), 1.0)) == math.inf

    def test_segmentwise_distance_has_no_sampling_floor(self):
        coarse = resample(quarter_arc(400), 37)
        fine = resample(quarter_arc(400), 211)
        # residual gap is the coarse polyline's sagitta, not half its spacing
        assert curve_hausdorff(coarse, fine) < 3e-4
        assert hausdorff(coarse.points, fine.points) > 5e-3

    def test_polyline_distance_exact_on_segment(self):
        c = segment()
        d = polyline_distance([[1.0, 0.5], [-1.0, 0.0], [3.0, 0.0]], c)
        assert np.allclose(d, [0.5, 1.0, 1.0])

    @given(
        st.lists(
            st.tuples(
                st.floats(-50, 50, allow_nan=False),
                st.floats(-50, 50, allow_nan=False),
            ),
            min_size=1,
            max_size=12,
        ),
        st.lists(
            st.tuples(
                st.floats(-50, 50, allow_nan=False),
                st.floats(-50, 50, allow_nan=False),
            ),
            min_size=1,
            max_size=12,
        ),
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetric_and_zero_on_self(self, a, b):
        assert hausdorff(a, b) == pytest.approx(hausdorff(b, a))
        assert hausdorff(a, a) == 0.0


class TestTrim:
    def test_removes_endpoint_neighbourhoods(self):
        c = segment(101)
        t = trim(c, 0.25)
        assert t.points[0][0] >= 0.25 - 1e-12
        assert t.points[-1][0] <= 1.75 + 1e-12

    def test_closed_curve_unchanged(self):
        c = circle(64)
        assert trim(c, 0.5).n == c.n

    def test_over_trim_raises(self):
        with pytest.raises(EmptyTrimError):
            trim(segment(11), 1.5)

    @given(st.floats(0.01, 0.9))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_rho(self, rho):
        c = segment(101)
        assert trim(c, rho).length <= trim(c, rho / 2.0).length + 1e-12


class TestSimplicity:
    def test_simple_curves(self):
        assert is_simple(segment(32))
        assert is_simple(circle(64))

    def test_self_crossing_detected(self):
        pts = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, -1.0]])
        assert not is_simple(Curve(pts, closed=False))
