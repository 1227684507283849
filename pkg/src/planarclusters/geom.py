"""Discrete planar curves: sampling, frames, distances, trimming.

Conventions used throughout the package:

* curves are arc-length-ordered polylines in R^2;
* the perp of a vector is ``(v1, v2)^perp = (v2, -v1)``, so the normal
  ``nu = tau^perp`` points to the *right* of the direction of travel;
* signed curvature is positive for left (counter-clockwise) turns, so a
  CCW-sampled unit circle has curvature +1 and its normal points outward.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree


class DegenerateCurveError(ValueError):
    """Curve shorter than the degeneracy tolerance."""


class EmptyTrimError(ValueError):
    """Trimming removed every sample."""


def perp(v):
    """Rotate by -90 degrees: (v1, v2) -> (v2, -v1)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = v[..., 1]
    out[..., 1] = -v[..., 0]
    return out


@dataclass(frozen=True)
class Curve:
    """Open or closed sampled planar curve.

    points : (M, 2) array, arc-length ordered, consecutive samples distinct.
    closed : implicit wrap from last to first sample when True.
    resolution : target sample spacing; defaults to the median spacing.
    """

    points: np.ndarray
    closed: bool = False
    resolution: float = field(default=0.0)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (M, 2) array")
        if len(pts) < 2:
            raise DegenerateCurveError("curve needs at least 2 samples")
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(seg == 0.0):
            raise ValueError("consecutive samples must be distinct")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)
        if self.resolution <= 0.0:
            object.__setattr__(self, "resolution", float(np.median(seg)))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def segment_lengths(self) -> np.ndarray:
        pts = self.points
        if self.closed:
            nxt = np.roll(pts, -1, axis=0)
        else:
            nxt = pts[1:]
            pts = pts[:-1]
        return np.linalg.norm(nxt - pts, axis=1)

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def arclengths(self) -> np.ndarray:
        """Cumulative arc length at each sample (starts at 0)."""
        seg = self.segment_lengths
        if self.closed:
            seg = seg[:-1] if len(seg) == self.n else seg[: self.n - 1]
        return np.concatenate([[0.0], np.cumsum(seg)])[: self.n]

    @property
    def endpoints(self):
        if self.closed:
            return None
        return self.points[0], self.points[-1]

    def tol_x(self) -> float:
        """Default coincidence tolerance: 1e-9 x curve length."""
        return 1e-9 * self.length

    def reversed(self) -> "Curve":
        return replace(self, points=np.ascontiguousarray(self.points[::-1]))


def resample(c: Curve, m: int) -> Curve:
    """Resample to ``m`` uniform arc-length samples.

    Endpoints of open curves are preserved exactly.
    """
    if c.closed and m < 3:
        raise ValueError("closed curve needs at least 3 samples")
    if not c.closed and m < 2:
        raise ValueError("open curve needs at least 2 samples")
    total = c.length
    if total < 1e-15:
        raise DegenerateCurveError("cannot resample a zero-length curve")
    pts = c.points
    if c.closed:
        pts = np.vstack([pts, pts[:1]])
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    if c.closed:
        target = np.arange(m) * (total / m)
    else:
        target = np.linspace(0.0, total, m)
    x = np.interp(target, s, pts[:, 0])
    y = np.interp(target, s, pts[:, 1])
    new = np.column_stack([x, y])
    if not c.closed:
        new[0] = c.points[0]
        new[-1] = c.points[-1]
    spacing = total / (m if c.closed else m - 1)
    return Curve(new, closed=c.closed, resolution=spacing)


def _circumcurvature(a, b, c) -> float:
    """Signed inverse circumradius of three points; positive = left turn."""
    u = b - a
    v = c - b
    w = c - a
    denom = np.linalg.norm(u) * np.linalg.norm(v) * np.linalg.norm(w)
    if denom == 0.0:
        return 0.0
    return float(2.0 * (u[0] * v[1] - u[1] * v[0]) / denom)


def _one_sided_tangent(p0, p1, p2):
    # second-order forward difference with chord-length spacing
    h1 = np.linalg.norm(p1 - p0)
    h2 = np.linalg.norm(p2 - p1)
    if h1 == 0.0 or h2 == 0.0:
        return p1 - p0
    s = h1 + h2
    return -(2 * h1 + h2) / (h1 * s) * p0 + s / (h1 * h2) * p1 - h1 / (h2 * s) * p2


def frame(c: Curve, i: int):
    """Tangent, normal and signed curvature at sample ``i``.

    Tangent from centered differences (one-sided at open endpoints),
    normal = tangent^perp, curvature = signed inverse circumradius of the
    three surrounding samples (one-sided triple at open endpoints).
    """
    pts = c.points
    m = c.n
    if not -m <= i < m:
        raise IndexError(f"sample index {i} out of range")
    i %= m
    if c.closed:
        prev, nxt = pts[(i - 1) % m], pts[(i + 1) % m]
        kappa = _circumcurvature(prev, pts[i], nxt)
        t = nxt - prev
    else:
        if i == 0:
            t = _one_sided_tangent(pts[0], pts[1], pts[2]) if m >= 3 else pts[1] - pts[0]
            kappa = _circumcurvature(pts[0], pts[1], pts[2]) if m >= 3 else 0.0
        elif i == m - 1:
            t = -_one_sided_tangent(pts[-1], pts[-2], pts[-3]) if m >= 3 else pts[-1] - pts[-2]
            kappa = _circumcurvature(pts[-3], pts[-2], pts[-1]) if m >= 3 else 0.0
        else:
            t = pts[i + 1] - pts[i - 1]
            kappa = _circumcurvature(pts[i - 1], pts[i], pts[i + 1])
    norm = np.linalg.norm(t)
    if norm == 0.0:
        raise DegenerateCurveError("coincident neighbours; cannot build frame")
    tau = t / norm
    return tau, perp(tau), kappa


def frames(c: Curve):
    """Vectorized ``frame`` over all samples -> (tangents, normals, curvatures)."""
    pts = c.points
    m = c.n
    if c.closed:
        t = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
    else:
        t = np.empty_like(pts)
        t[1:-1] = pts[2:] - pts[:-2]
        if m >= 3:
            t[0] = _one_sided_tangent(pts[0], pts[1], pts[2])
            t[-1] = -_one_sided_tangent(pts[-1], pts[-2], pts[-3])
        else:
            t[0] = pts[1] - pts[0]
            t[-1] = pts[-1] - pts[-2]
    tau = t / np.linalg.norm(t, axis=1, keepdims=True)
    nu = perp(tau)
    kappa = np.empty(m)
    if c.closed:
        a = np.roll(pts, 1, axis=0)
        b = pts
        d = np.roll(pts, -1, axis=0)
    else:
        a = pts[np.clip(np.arange(m) - 1, 0, m - 3)]
        b = pts[np.clip(np.arange(m), 1, m - 2)]
        d = pts[np.clip(np.arange(m) + 1, 2, m - 1)]
    u = b - a
    v = d - b
    w = d - a
    denom = (
        np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1) * np.linalg.norm(w, axis=1)
    )
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    np.divide(2.0 * cross, denom, out=kappa, where=denom > 0.0)
    kappa[denom == 0.0] = 0.0
    return tau, nu, kappa


def co_normal(c: Curve, end: int) -> np.ndarray:
    """Outer unit tangent at a boundary sample of an open curve.

    ``end`` is 0 for the first sample, 1 (or -1) for the last; the
    co-normal points out of the curve along it.
    """
    if c.closed:
        raise ValueError("closed curve has no boundary")
    if end in (0,):
        tau, _, _ = frame(c, 0)
        return -tau
    if end in (1, -1):
        tau, _, _ = frame(c, c.n - 1)
        return tau
    raise ValueError("end must be 0 (start) or 1 (end)")


def hausdorff(a, b, window=None) -> float:
    """Hausdorff distance between two sample sets, optionally inside a disk.

    ``window = (center, radius)`` restricts the sup domains (distances are
    still measured to the full opposite set).  Returns ``inf`` when exactly
    one restricted set is empty, 0 when both are.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if window is not None:
        center, radius = np.asarray(window[0], dtype=float), float(window[1])
        a_in = a[np.linalg.norm(a - center, axis=1) <= radius]
        b_in = b[np.linalg.norm(b - center, axis=1) <= radius]
    else:
        a_in, b_in = a, b
    if len(a_in) == 0 and len(b_in) == 0:
        return 0.0
    if len(a_in) == 0 or len(b_in) == 0:
        return float("inf")
    d_ab = cKDTree(b).query(a_in)[0].max()
    d_ba = cKDTree(a).query(b_in)[0].max()
    return float(max(d_ab, d_ba))


def polyline_distance(points, c: Curve) -> np.ndarray:
    """Distance from each query point to the polyline of ``c`` (segments)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    a = c.points
    b = np.roll(a, -1, axis=0) if c.closed else a[1:]
    a = a if c.closed else a[:-1]
    seg = b - a
    ss = np.einsum("ij,ij->i", seg, seg)
    ss[ss == 0.0] = 1.0
    # t has shape (queries, segments)
    t = np.clip(np.einsum("qj,sj->qs", p, seg) - np.einsum("sj,sj->s", a, seg), 0.0, ss) / ss
    foot = a[None, :, :] + t[:, :, None] * seg[None, :, :]
    d = np.linalg.norm(p[:, None, :] - foot, axis=2)
    return d.min(axis=1)


def curve_hausdorff(a: Curve, b: Curve) -> float:
    """Hausdorff distance between two curves measured segment-wise.

    Unlike ``hausdorff`` on raw samples this has no half-spacing floor:
    each vertex of one polyline is projected onto the segments of the
    other, so identical traces at different sample counts give ~0.
    """
    d_ab = polyline_distance(a.points, b).max()
    d_ba = polyline_distance(b.points, a).max()
    return float(max(d_ab, d_ba))


def trim(c: Curve, rho: float) -> Curve:
    """Remove the rho-neighbourhood of the curve's endpoints.

    Closed curves come back unchanged (empty boundary).  For open curves the
    result is the longest contiguous run of samples at Euclidean distance
    >= rho from both endpoints.
    """
    if c.closed or rho <= 0.0:
        return c
    p0, p1 = c.points[0], c.points[-1]
    d0 = np.linalg.norm(c.points - p0, axis=1)
    d1 = np.linalg.norm(c.points - p1, axis=1)
    keep = (d0 >= rho) & (d1 >= rho)
    if not keep.any():
        raise EmptyTrimError(f"trim by rho={rho} leaves no samples")
    # longest contiguous run of kept samples
    idx = np.flatnonzero(keep)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [len(idx) - 1]])
    runs = ends - starts
    k = int(np.argmax(runs))
    lo, hi = idx[starts[k]], idx[ends[k]]
    if hi - lo < 1:
        raise EmptyTrimError(f"trim by rho={rho} leaves fewer than 2 samples")
    return Curve(c.points[lo : hi + 1].copy(), closed=False, resolution=c.resolution)


def geodesic_dist(c: Curve, i: int, j: int) -> float:
    """Arc length between samples i and j (shorter way around if closed)."""
    s = c.arclengths
    d = abs(float(s[j] - s[i]))
    if c.closed:
        d = min(d, c.length - d)
    return d


def chord_arc_constant(c: Curve, max_pairs: int = 200) -> float:
    """Measured sup of geodesic/Euclidean distance over sample pairs.

    Subsamples to at most ``max_pairs`` indices to keep the estimate cheap.
    """
    m = c.n
    idx = np.unique(np.linspace(0, m - 1, min(m, max_pairs)).astype(int))
    pts = c.points[idx]
    s = c.arclengths[idx]
    ds = np.abs(s[:, None] - s[None, :])
    if c.closed:
        ds = np.minimum(ds, c.length - ds)
    eu = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    mask = eu > 0.0
    return float((ds[mask] / eu[mask]).max())


def is_simple(c: Curve, tol: float | None = None) -> bool:
    """Check the polyline for self-intersections (brute force over segments)."""
    if tol is None:
        tol = c.tol_x()
    pts = c.points
    if c.closed:
        pts = np.vstack([pts, pts[:1]])
    a = pts[:-1]
    b = pts[1:]
    nseg = len(a)
    for i in range(nseg - 2):
        j0 = i + 2
        j1 = nseg if not (c.closed and i == 0) else nseg - 1
        if j0 >= j1:
            continue
        if _segment_hits_any(a[i], b[i], a[j0:j1], b[j0:j1], tol):
            return False
    return True


def _segment_hits_any(p, q, a, b, tol) -> bool:
    """True if segment pq properly intersects any of the segments (a[i], b[i])."""
    r = q - p
    s = b - a
    denom = r[0] * s[:, 1] - r[1] * s[:, 0]
    qp = a - p
    t_num = qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]
    u_num = qp[:, 0] * r[1] - qp[:, 1] * r[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        u = u_num / denom
    eps = tol / max(np.linalg.norm(r), tol)
    hit = (np.abs(denom) > 1e-15) & (t > eps) & (t < 1 - eps) & (u > eps) & (u < 1 - eps)
    return bool(hit.any())
