import math

import numpy as np
import pytest

from planarclusters.diffeo import (
    CALIBRATED_TANGENTIAL_RATIO,
    BracketError,
    DiffeoError,
    SpeedError,
    boundary_decompose,
    build_cutoff,
    build_diffeo,
    diffeo_norms,
    extend_open_curve,
)
from planarclusters.extend import DistanceMap
from planarclusters.geom import Curve, frames

MU = 0.2
RHO = MU * MU / 2.0


def arc(a0, a1, r=1.0, n=400):
    th = np.linspace(a0, a1, n)
    return Curve(np.stack([r * np.cos(th), r * np.sin(th)], axis=1), closed=False)


def endpoint_images(target):
    return np.stack([target.points[0], target.points[-1]])


class TestCutoff:
    def test_plateau_shape(self):
        phi = build_cutoff(MU, np.array([[0.0, 0.0]]))
        xs = np.linspace(0.0, 2.0 * MU, 4001)
        pts = np.stack([xs, np.zeros_like(xs)], axis=1)
        v = phi(pts)
        assert np.all(v[xs <= MU / 2.0] == 1.0)
        assert np.all(v[xs >= MU] == 0.0)
        slope = np.abs(np.diff(v) / np.diff(xs)).max()
        assert slope <= 4.0 / MU

    def test_nearest_anchor_wins(self):
        phi = build_cutoff(MU, np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert phi(np.array([[0.99, 0.0]]))[0] == 1.0


class TestBoundaryDecompose:
    def test_identity_data_is_zero(self):
        s0 = arc(0.0, math.pi / 2.0)
        abar, bbar = boundary_decompose(s0, endpoint_images(s0))
        assert np.abs(abar).max() <= 1e-14
        assert np.abs(bbar).max() <= 1e-14

    def test_normal_offset_is_pure_a(self):
        s0 = arc(0.0, math.pi / 2.0)
        _, nu, _ = frames(s0)
        f0 = np.stack([s0.points[0] + 0.01 * nu[0], s0.points[-1] + 0.01 * nu[-1]])
        abar, bbar = boundary_decompose(s0, f0)
        assert np.allclose(abar, 0.01)
        assert np.abs(bbar).max() <= 1e-14


class TestCurveExtension:
    def test_circle_arc_continues_on_its_circle(self):
        c = arc(0.2, 1.4, n=600)
        ext = extend_open_curve(c, 0.5)
        radii = np.linalg.norm(ext.points, axis=1)
        assert np.abs(radii - 1.0).max() < 1e-4
        assert ext.length > c.length + 0.9

    def test_straight_line_stays_straight(self):
        x = np.linspace(0.0, 1.0, 101)
        c = Curve(np.stack([x, np.zeros(101)], axis=1), closed=False)
        ext = extend_open_curve(c, 0.3)
        assert np.abs(ext.points[:, 1]).max() <= 1e-12
        assert ext.points[0, 0] < -0.29
        assert ext.points[-1, 0] > 1.29


class TestBuildDiffeo:
    def test_identity(self):
        s0 = arc(0.0, math.pi / 2.0)
        d = build_diffeo(s0, s0, endpoint_images(s0), mu=MU, rho=RHO)
        assert np.abs(d.image - s0.points).max() == 0.0

    def test_normal_offset_family(self):
        s0 = arc(0.0, math.pi / 2.0)
        for eps in (1e-2, 5e-3, 2.5e-3):
            s = arc(0.0, math.pi / 2.0, r=1.0 + eps)
            d = build_diffeo(s0, s, endpoint_images(s), mu=MU, rho=RHO)
            n = diffeo_norms(d)
            assert n.c0 == pytest.approx(eps, rel=1e-6)
            # radial motion has no tangential component at all
            assert n.tangential_c1 <= 1e-6
            assert d.speed_ratio().min() >= 0.5

    def test_tangential_slide_family(self):
        s0 = arc(0.0, math.pi / 2.0)
        for s in (1e-2, 5e-3, 2.5e-3):
            tgt = arc(s, math.pi / 2.0 + s)
            d = build_diffeo(s0, tgt, endpoint_images(tgt), mu=MU, rho=RHO)
            n = diffeo_norms(d)
            # endpoint slide of arclength s shows up as endpoint_c0 = s
            assert n.endpoint_c0 == pytest.approx(s, rel=1e-3)
            assert n.ratio <= CALIBRATED_TANGENTIAL_RATIO
            # displacement is purely tangential outside the collar: zero
            assert np.abs(d.tangential_part[~d.in_collar]).max() <= 1e-12

    def test_boundary_exactness(self):
        s0 = arc(0.0, math.pi / 2.0)
        tgt = arc(5e-3, math.pi / 2.0 + 5e-3, r=1.004)
        f0 = endpoint_images(tgt)
        d = build_diffeo(s0, tgt, f0, mu=MU, rho=RHO)
        assert np.linalg.norm(d.image[0] - f0[0]) <= 1e-12
        assert np.linalg.norm(d.image[-1] - f0[1]) <= 1e-12

    def test_image_lies_on_target(self):
        s0 = arc(0.0, math.pi / 2.0)
        tgt = arc(0.0, math.pi / 2.0, r=1.005)
        d = build_diffeo(s0, tgt, endpoint_images(tgt), mu=MU, rho=RHO)
        dm = DistanceMap(extend_open_curve(tgt, 4.0 * MU))
        tol_root = 1e-10 * s0.length
        worst = max(abs(dm.value(p, strict=False)) for p in d.image)
        assert worst <= 2.0 * tol_root

    def test_rejects_distant_target(self):
        s0 = arc(0.0, math.pi / 2.0)
        far = arc(0.0, math.pi / 2.0, r=1.2)
        with pytest.raises(DiffeoError):
            build_diffeo(s0, far, endpoint_images(far), mu=MU, rho=RHO)

    def test_rejects_bad_closeness_scale(self):
        s0 = arc(0.0, math.pi / 2.0)
        with pytest.raises(ValueError):
            build_diffeo(s0, s0, endpoint_images(s0), mu=MU, rho=MU * MU)

    def test_table_export(self):
        s0 = arc(0.0, math.pi / 2.0, n=50)
        d = build_diffeo(s0, s0, endpoint_images(s0), mu=MU, rho=RHO)
        table = d.to_table()
        lines = table.strip().splitlines()
        assert lines[0].startswith("#")
        assert len(lines) == 51
        assert "np.float" not in table


class TestNorms:
    def test_identity_norms_vanish(self):
        s0 = arc(0.0, math.pi / 2.0)
        d = build_diffeo(s0, s0, endpoint_images(s0), mu=MU, rho=RHO)
        n = diffeo_norms(d)
        assert n.c0 == 0.0
        assert n.c1 == 0.0
        assert n.c11 == 0.0
        assert math.isnan(n.ratio)

    def test_norm_ordering(self):
        s0 = arc(0.0, math.pi / 2.0)
        tgt = arc(4e-3, math.pi / 2.0 + 4e-3, r=1.003)
        n = diffeo_norms(build_diffeo(s0, tgt, endpoint_images(tgt), mu=MU, rho=RHO))
        assert n.c0 <= n.c1 <= n.c11
