"""Curve-network model of planar N-clusters.

A cluster partitions the plane into N bounded chambers plus the unbounded
exterior chamber 0.  Interfaces are sampled curves labeled with the pair
(h, k), h < k, of chambers they separate; the curve normal (right of the
direction of travel) points from chamber h into chamber k, i.e. chamber h
lies on the left of the traversal.  Triple points record where three open
interfaces meet.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path

from .geom import Curve, frames, co_normal, is_simple


class TopologyError(ValueError):
    """Cluster combinatorics are inconsistent (non-closing chamber, ...)."""


@dataclass(frozen=True)
class Interface:
    """One interface curve separating chambers ``h`` (left) and ``k`` (right)."""

    curve: Curve
    h: int
    k: int

    def __post_init__(self):
        if not 0 <= self.h < self.k:
            raise ValueError(f"need 0 <= h < k, got ({self.h}, {self.k})")


@dataclass(frozen=True)
class TriplePoint:
    """Meeting point of three interface endpoints.

    ``incident`` holds (interface_id, end_flag) pairs; end_flag 0 marks the
    first sample of the interface curve, 1 the last.
    """

    position: np.ndarray
    incident: tuple

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(
            self, "incident", tuple((int(i), int(e)) for i, e in self.incident)
        )


@dataclass(frozen=True)
class PlanarCluster:
    n_chambers: int
    interfaces: tuple
    triple_points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "interfaces", tuple(self.interfaces))
        object.__setattr__(self, "triple_points", tuple(self.triple_points))
        for iface in self.interfaces:
            if iface.k > self.n_chambers:
                raise ValueError(f"chamber label {iface.k} exceeds N={self.n_chambers}")

    @property
    def network_length(self) -> float:
        return sum(i.curve.length for i in self.interfaces)

    def tol_x(self) -> float:
        return 1e-9 * max(self.network_length, 1e-30)

    def all_points(self) -> np.ndarray:
        return np.vstack([i.curve.points for i in self.interfaces])

    def bounding_box(self):
        pts = self.all_points()
        return pts.min(axis=0), pts.max(axis=0)

    def endpoint(self, iface_id: int, end_flag: int) -> np.ndarray:
        pts = self.interfaces[iface_id].curve.points
        return pts[0] if end_flag == 0 else pts[-1]


@dataclass
class Diagnostics:
    """Result of :func:`validate`: a list of violations, empty when valid."""

    violations: list = field(default_factory=list)
    n_triple_points: int = 0
    n_open_interfaces: int = 0
    n_closed_interfaces: int = 0
    n_free_endpoints: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        head = "valid" if self.ok else "invalid"
        lines = [
            f"{head}: {self.n_triple_points} triple points, "
            f"{self.n_open_interfaces} open + {self.n_closed_interfaces} closed "
            f"interfaces, {self.n_free_endpoints} free endpoints"
        ]
        lines += [f"  - {v}" for v in self.violations]
        return "\n".join(lines)


def validate(c: PlanarCluster, check_simple: bool = True) -> Diagnostics:
    """Topology diagnostics for a cluster.

    Interface endpoints may either meet at a triple point or be free
    (truncated networks such as a clipped Steiner Y keep their outer
    endpoints free).  Angle conditions are left to :func:`plateau_check`.
    """
    tol = c.tol_x()
    d = Diagnostics()
    open_ids = [i for i, f in enumerate(c.interfaces) if not f.curve.closed]
    d.n_open_interfaces = len(open_ids)
    d.n_closed_interfaces = len(c.interfaces) - len(open_ids)
    d.n_triple_points = len(c.triple_points)

    used = {}
    for j, tp in enumerate(c.triple_points):
        if len(tp.incident) != 3:
            d.violations.append(
                f"triple point {j}: {len(tp.incident)} incidences (need exactly 3)"
            )
        for iface_id, end in tp.incident:
            if not (0 <= iface_id < len(c.interfaces)) or end not in (0, 1):
                d.violations.append(f"triple point {j}: bad incidence ({iface_id},{end})")
                continue
            if c.interfaces[iface_id].curve.closed:
                d.violations.append(
                    f"triple point {j}: incidence on closed interface {iface_id}"
                )
                continue
            key = (iface_id, end)
            if key in used:
                d.violations.append(
                    f"endpoint {key} claimed by triple points {used[key]} and {j}"
                )
            used[key] = j
            p = c.endpoint(iface_id, end)
            gap = float(np.linalg.norm(p - tp.position))
            if gap > 10 * tol:
                d.violations.append(
                    f"dangling endpoint: interface {iface_id} end {end} misses "
                    f"triple point {j} by {gap:.3g}"
                )

    n_free = sum(
        1 for i in open_ids for end in (0, 1) if (i, end) not in used
    )
    d.n_free_endpoints = n_free

    if n_free == 0 and 2 * d.n_open_interfaces != 3 * d.n_triple_points:
        d.violations.append(
            f"count mismatch: {d.n_open_interfaces} open interfaces vs "
            f"{d.n_triple_points} triple points (need 3:2 ratio)"
        )

    if n_free == 0:
        for h in range(1, c.n_chambers + 1):
            try:
                chamber_rings(c, h)
            except TopologyError as exc:
                d.violations.append(f"chamber {h}: {exc}")

    if check_simple:
        for i, iface in enumerate(c.interfaces):
            if not is_simple(iface.curve):
                d.violations.append(f"interface {i}: self-intersecting curve")
    return d


def chamber_traversals(c: PlanarCluster, h: int):
    """Directed traversals bounding chamber ``h`` (chamber kept on the left).

    Returns a list of (interface_id, forward) pairs: forward traversal for
    interfaces labeled (h, .), reversed for (., h).
    """
    out = []
    for i, iface in enumerate(c.interfaces):
        if iface.h == h:
            out.append((i, True))
        elif iface.k == h:
            out.append((i, False))
    return out


def chamber_rings(c: PlanarCluster, h: int):
    """Ordered closed rings of directed point runs bounding chamber ``h``.

    Raises :class:`TopologyError` when the traversals do not chain into
    closed cycles.
    """
    trav = chamber_traversals(c, h)
    if not trav:
        raise TopologyError(f"chamber {h} has no interfaces")
    tol = max(100 * c.tol_x(), 1e-12)
    rings = []
    open_items = []
    for i, fwd in trav:
        pts = c.interfaces[i].curve.points
        if not fwd:
            pts = pts[::-1]
        if c.interfaces[i].curve.closed:
            rings.append(np.vstack([pts, pts[:1]]))
        else:
            open_items.append(pts)
    remaining = list(range(len(open_items)))
    while remaining:
        chain = [open_items[remaining.pop(0)]]
        start = chain[0][0]
        while True:
            tail = chain[-1][-1]
            if np.linalg.norm(tail - start) <= tol:
                break
            hit = None
            for r in remaining:
                if np.linalg.norm(open_items[r][0] - tail) <= tol:
                    hit = r
                    break
            if hit is None:
                raise TopologyError(
                    f"boundary does not close (loose end at {tail.round(6)})"
                )
            remaining.remove(hit)
            chain.append(open_items[hit])
        rings.append(np.vstack(chain))
    return rings


def perimeter(c: PlanarCluster) -> float:
    """Total network length (each interface counted once)."""
    return c.network_length


def _shoelace(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def areas(c: PlanarCluster) -> np.ndarray:
    """Signed shoelace areas of chambers 1..N (all positive for valid input)."""
    out = np.empty(c.n_chambers)
    for h in range(1, c.n_chambers + 1):
        out[h - 1] = sum(_shoelace(r[:-1]) for r in chamber_rings(c, h))
    return out


def _label_grid(c: PlanarCluster, xs, ys) -> np.ndarray:
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    labels = np.zeros(len(pts), dtype=np.int32)
    for h in range(1, c.n_chambers + 1):
        verts = []
        codes = []
        for ring in chamber_rings(c, h):
            verts.append(ring)
            codes.append(
                [Path.MOVETO] + [Path.LINETO] * (len(ring) - 2) + [Path.CLOSEPOLY]
            )
        path = Path(np.vstack(verts), np.concatenate(codes))
        inside = path.contains_points(pts)
        labels[inside] = h
    return labels


def cluster_delta(e: PlanarCluster, f: PlanarCluster, grid: int = 512) -> float:
    """Symmetric-difference pseudometric (1/2) sum_h |E(h) delta F(h)|.

    Both chamber labelings are rasterized on a shared grid over the joint
    bounding box padded by 10%; mismatched cells count once (which equals
    the half-sum over all chambers, exterior included).
    """
    lo = np.minimum(e.bounding_box()[0], f.bounding_box()[0])
    hi = np.maximum(e.bounding_box()[1], f.bounding_box()[1])
    span = hi - lo
    if np.any(span <= 0):
        span = np.maximum(span, 1e-9)
    lo = lo - 0.1 * span
    hi = hi + 0.1 * span
    xs = lo[0] + (np.arange(grid) + 0.5) * (hi[0] - lo[0]) / grid
    ys = lo[1] + (np.arange(grid) + 0.5) * (hi[1] - lo[1]) / grid
    cell = (hi[0] - lo[0]) / grid * (hi[1] - lo[1]) / grid
    le = _label_grid(e, xs, ys)
    lf = _label_grid(f, xs, ys)
    return float(cell * np.count_nonzero(le != lf))


def _segment_length_in_disk(p, q, center, r) -> np.ndarray:
    """Vectorized length of each segment p[i]-q[i] inside the disk."""
    d = q - p
    a = np.einsum("ij,ij->i", d, d)
    pc = p - center
    b = 2.0 * np.einsum("ij,ij->i", d, pc)
    cc = np.einsum("ij,ij->i", pc, pc) - r * r
    disc = b * b - 4.0 * a * cc
    out = np.zeros(len(p))
    ok = (disc > 0) & (a > 0)
    sq = np.sqrt(disc[ok])
    t0 = np.clip((-b[ok] - sq) / (2 * a[ok]), 0.0, 1.0)
    t1 = np.clip((-b[ok] + sq) / (2 * a[ok]), 0.0, 1.0)
    out[ok] = (t1 - t0) * np.sqrt(a[ok])
    return out


def density_ratio(c: PlanarCluster, x, r: float) -> float:
    """Network length inside the disk B(x, r), divided by r.

    Tends to 2 at regular interface points and to 3 at triple points.
    """
    x = np.asarray(x, dtype=float)
    total = 0.0
    for iface in c.interfaces:
        pts = iface.curve.points
        if iface.curve.closed:
            p, q = pts, np.roll(pts, -1, axis=0)
        else:
            p, q = pts[:-1], pts[1:]
        total += _segment_length_in_disk(p, q, x, r).sum()
    return float(total / r)


@dataclass
class PlateauReport:
    """Per-junction angle deviations and per-interface curvature statistics."""

    angles: list          # per triple point: three pairwise angles (radians)
    max_angle_deviation: float   # max |angle - 2pi/3| over all junctions (radians)
    curvature_mean: np.ndarray   # per interface
    curvature_std: np.ndarray
    curvature_max_abs: np.ndarray
    closed_diameters: dict       # interface id -> diameter (closed interfaces)
    lambda_bound: float
    ok_angles: bool
    ok_curvature: bool
    ok_diameters: bool

    @property
    def ok(self) -> bool:
        return self.ok_angles and self.ok_curvature and self.ok_diameters


def _interior_curvatures(curve: Curve) -> np.ndarray:
    _, _, kappa = frames(curve)
    if curve.closed:
        return kappa
    # one-sided endpoint estimates are noisier; use interior samples
    return kappa[1:-1] if curve.n > 4 else kappa


def plateau_check(
    c: PlanarCluster,
    lambda_bound: float = math.inf,
    tol_angle: float = math.radians(0.5),
    tol_curv: float = 0.01,
) -> PlateauReport:
    """Check the planar Plateau structure of a cluster.

    Per triple point: the three pairwise angles between incident co-normals
    against 120 degrees.  Per interface: constancy of the signed curvature
    (std vs ``tol_curv`` relative to mean magnitude plus a diameter floor)
    and max curvature against ``lambda_bound``.  Closed interfaces must have
    diameter >= 1/(2 lambda_bound).
    """
    angles_all = []
    max_dev = 0.0
    for tp in c.triple_points:
        dirs = []
        for iface_id, end in tp.incident:
            dirs.append(co_normal(c.interfaces[iface_id].curve, end))
        az = np.sort([math.atan2(v[1], v[0]) for v in dirs])
        gaps = np.diff(np.concatenate([az, [az[0] + 2 * math.pi]]))
        angles_all.append(gaps)
        max_dev = max(max_dev, float(np.abs(gaps - 2 * math.pi / 3).max()))

    means, stds, maxabs = [], [], []
    diameters = {}
    for i, iface in enumerate(c.interfaces):
        kap = _interior_curvatures(iface.curve)
        means.append(float(kap.mean()))
        stds.append(float(kap.std()))
        maxabs.append(float(np.abs(kap).max()))
        if iface.curve.closed:
            pts = iface.curve.points
            lo, hi = pts.min(axis=0), pts.max(axis=0)
            diameters[i] = float(np.linalg.norm(hi - lo))

    means = np.asarray(means)
    stds = np.asarray(stds)
    maxabs = np.asarray(maxabs)
    diam_floor = 0.01 / max(_cluster_diameter(c), 1e-30)
    ok_curv = bool(np.all(stds <= tol_curv * (np.abs(means) + diam_floor)))
    ok_diam = all(
        d >= 1.0 / (2.0 * lambda_bound) for d in diameters.values()
    ) if math.isfinite(lambda_bound) else True
    ok_lambda = bool(np.all(maxabs <= lambda_bound + 1e-12))
    return PlateauReport(
        angles=angles_all,
        max_angle_deviation=max_dev,
        curvature_mean=means,
        curvature_std=stds,
        curvature_max_abs=maxabs,
        closed_diameters=diameters,
        lambda_bound=lambda_bound,
        ok_angles=max_dev <= tol_angle,
        ok_curvature=ok_curv and ok_lambda,
        ok_diameters=ok_diam,
    )


def _cluster_diameter(c: PlanarCluster) -> float:
    lo, hi = c.bounding_box()
    return float(np.linalg.norm(hi - lo))


# ---------------------------------------------------------------------------
# cluster file format (JSON text; floats kept at full precision)

def _fmt(x: float) -> float:
    return float(x)


def to_dict(c: PlanarCluster) -> dict:
    return {
        "n_chambers": c.n_chambers,
        "interfaces": [
            {
                "id": i,
                "h": f.h,
                "k": f.k,
                "closed": f.curve.closed,
                "points": [[_fmt(x), _fmt(y)] for x, y in f.curve.points],
            }
            for i, f in enumerate(c.interfaces)
        ],
        "triple_points": [
            {
                "position": [_fmt(tp.position[0]), _fmt(tp.position[1])],
                "incident": [[i, e] for i, e in tp.incident],
            }
            for tp in c.triple_points
        ],
    }


def from_dict(doc: dict) -> PlanarCluster:
    ifaces = [None] * len(doc["interfaces"])
    for entry in doc["interfaces"]:
        curve = Curve(np.asarray(entry["points"], dtype=float), closed=bool(entry["closed"]))
        ifaces[int(entry["id"])] = Interface(curve, int(entry["h"]), int(entry["k"]))
    tps = [
        TriplePoint(np.asarray(t["position"], dtype=float),
                    [(int(i), int(e)) for i, e in t["incident"]])
        for t in doc.get("triple_points", [])
    ]
    return PlanarCluster(int(doc["n_chambers"]), tuple(ifaces), tuple(tps))


def save_cluster(c: PlanarCluster, path) -> None:
    """Write the cluster file (JSON; floats at 17 significant digits)."""
    with open(path, "w") as fh:
        json.dump(to_dict(c), fh, indent=1)
        fh.write("\n")


def load_cluster(path) -> PlanarCluster:
    with open(path) as fh:
        return from_dict(json.load(fh))
