"""Canonical cluster constructions used by the solver, tests and demos."""

from __future__ import annotations

import math

import numpy as np

from .geom import Curve
from .cluster import Interface, PlanarCluster, TriplePoint


def circle_points(center, radius, n, ccw=True, phase=0.0) -> np.ndarray:
    t = np.arange(n) / n * 2 * math.pi
    if not ccw:
        t = -t
    t = t + phase
    return np.column_stack(
        [center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)]
    )


def arc_points(center, radius, phi0, sweep, n) -> np.ndarray:
    """n samples along the circular arc phi0 .. phi0+sweep (signed sweep)."""
    t = phi0 + sweep * np.linspace(0.0, 1.0, n)
    return np.column_stack(
        [center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)]
    )


def disk_cluster(area: float = math.pi, center=(0.0, 0.0), n: int = 256) -> PlanarCluster:
    """Single chamber bounded by a circle.

    The interface is labeled (0, 1); its normal must point into the chamber,
    so the circle is sampled clockwise.
    """
    r = math.sqrt(area / math.pi)
    pts = circle_points(center, r, n, ccw=False)
    return PlanarCluster(1, (Interface(Curve(pts, closed=True), 0, 1),))


def double_bubble_radius(area: float = math.pi) -> float:
    """Lobe radius of the equal-area standard double bubble.

    Each chamber is the circular segment cut by a 240-degree arc:
    area = R^2/2 * (4 pi/3 + sqrt(3)/2).
    """
    return math.sqrt(2.0 * area / (4 * math.pi / 3 + math.sqrt(3) / 2))


def double_bubble_perimeter(area: float = math.pi) -> float:
    """Total network length of the equal-area standard double bubble."""
    r = double_bubble_radius(area)
    return 2.0 * r * (4 * math.pi / 3) + r * math.sqrt(3)


def double_bubble_cluster(area: float = math.pi, n_arc: int = 256) -> PlanarCluster:
    """Exact equal-area standard double bubble as a sampled 2-cluster.

    Chamber 1 is the left lobe, chamber 2 the right one; the middle
    interface is the straight chord between the two triple points at
    (0, +-R sqrt(3)/2).
    """
    r = double_bubble_radius(area)
    h = r * math.sqrt(3) / 2
    a = np.array([0.0, h])     # upper triple point
    b = np.array([0.0, -h])    # lower triple point

    # left lobe, interface (0,1): from b up the left side to a
    # (major 240-degree arc around (-R/2, 0), clockwise sweep)
    left = arc_points((-r / 2, 0.0), r, math.radians(-60), -math.radians(240), n_arc)
    left[0], left[-1] = b, a
    # right lobe, interface (0,2): from a down the right side to b
    right = arc_points((r / 2, 0.0), r, math.radians(120), -math.radians(240), n_arc)
    right[0], right[-1] = a, b
    # middle interface (1,2): straight from b to a (normal points into chamber 2)
    n_mid = max(2, n_arc // 3)
    mid = np.column_stack([np.zeros(n_mid), np.linspace(-h, h, n_mid)])

    ifaces = (
        Interface(Curve(left), 0, 1),
        Interface(Curve(right), 0, 2),
        Interface(Curve(mid), 1, 2),
    )
    tps = (
        TriplePoint(a, ((0, 1), (1, 0), (2, 1))),
        TriplePoint(b, ((0, 0), (1, 1), (2, 0))),
    )
    return PlanarCluster(2, ifaces, tps)


def double_bubble_init(m1: float, m2: float, n_arc: int = 64) -> PlanarCluster:
    """Rough but topologically correct double bubble for given target areas.

    Starts from the equal-area geometry at the mean area and bows the middle
    interface toward the smaller chamber; the solver fixes the rest.
    """
    mean = 0.5 * (m1 + m2)
    base = double_bubble_cluster(mean, n_arc=n_arc)
    if abs(m1 - m2) < 1e-12 * mean:
        return base
    r = double_bubble_radius(mean)
    h = r * math.sqrt(3) / 2
    a, b = np.array([0.0, h]), np.array([0.0, -h])
    # bow the middle chord toward the smaller chamber
    imbalance = (m2 - m1) / (m1 + m2)
    sag = 0.5 * imbalance * h
    n_mid = base.interfaces[2].curve.n
    t = np.linspace(0.0, 1.0, n_mid)
    mid = (1 - t)[:, None] * b + t[:, None] * a
    mid[:, 0] += sag * np.sin(math.pi * t) * (-1.0)
    mid[0], mid[-1] = b, a
    ifaces = (
        base.interfaces[0],
        base.interfaces[1],
        Interface(Curve(mid), 1, 2),
    )
    return PlanarCluster(2, ifaces, base.triple_points)


def steiner_y2(leg: float = 1.0, n: int = 64, center=(0.0, 0.0)) -> PlanarCluster:
    """Truncated Steiner partition: three segments from the center at 120 degrees.

    Modeled as a 3-cluster with one triple point and three free outer
    endpoints; sector i of the partition lies between rays i and i+1.
    """
    center = np.asarray(center, dtype=float)
    angles = [math.radians(90), math.radians(210), math.radians(330)]
    ifaces = []
    incident = []
    for i, ang in enumerate(angles):
        d = np.array([math.cos(ang), math.sin(ang)])
        t = np.linspace(0.0, leg, n)
        pts = center + t[:, None] * d
        # ray i separates sector i (left) from sector i-1 (right)
        h, k = sorted(((i % 3) + 1, ((i - 1) % 3) + 1))
        ifaces.append(Interface(Curve(pts), h, k))
        incident.append((i, 0))
    tp = TriplePoint(center, tuple(incident))
    return PlanarCluster(3, tuple(ifaces), (tp,))
