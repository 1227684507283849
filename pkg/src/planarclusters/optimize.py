"""Desk-scale solver for prescribed-area partitioning problems.

Interfaces of a stationary zero-potential cluster are circular arcs or
segments, so the solver parametrizes the network by triple-point positions
plus one signed bulge (sagitta/chord ratio) per open interface and a
center/radius pair per closed interface.  Areas and lengths are evaluated in
closed form; area constraints are handled by an augmented Lagrangian with
quasi-Newton inner steps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .geom import Curve, frames
from .cluster import (
    Interface,
    PlanarCluster,
    TriplePoint,
    areas,
    chamber_traversals,
)


class SolverError(RuntimeError):
    pass


class TopologyCollapseError(SolverError):
    """An arc shrank below the degeneracy threshold."""

    def __init__(self, iface_id, length):
        super().__init__(f"interface {iface_id} collapsed (length {length:.3g})")
        self.iface_id = iface_id


class SingularIncidenceError(SolverError):
    """The length-weighted incidence system has no usable solution."""


@dataclass
class SolveOptions:
    max_outer: int = 80
    inner_iters: int = 20          # quasi-Newton steps per outer iteration
    penalty0: float = 10.0
    penalty_growth: float = 2.0    # applied every outer round (20 inner steps)
    penalty_max: float = 1e9
    tol_vol: float = 1e-7          # relative area residual target
    tol_energy: float = 1e-11      # relative energy stall tolerance
    quad_subdiv: int = 24          # boundary subdivision for potential integrals
    samples_per_interface: int = 256
    seed: int = 0
    log_path: str | None = None


@dataclass
class IterationRow:
    iter: int
    energy: float
    constraint_norm: float
    step_size: float


# ---------------------------------------------------------------------------
# circular-arc primitives (bulge = signed sagitta/chord, positive bulges left)

def _arc_theta(b):
    return 4.0 * np.arctan(2.0 * b)


def arc_length(chord, b):
    """Length of the arc over a chord, as a smooth function of the bulge."""
    t = 2.0 * np.asarray(b, dtype=float)
    small = np.abs(t) < 1e-4
    tt = np.where(small, 1.0, t)
    exact = (1.0 + t * t) * np.arctan(tt) / tt
    series = 1.0 + (2.0 / 3.0) * t * t - (1.0 / 5.0) * t ** 4
    return chord * np.where(small, series, exact)


def arc_segment_area(chord, b):
    """Signed area between arc and chord; positive bulge removes area on the left.

    Returns the *unsigned* circular-segment area times sign(b).
    """
    t = 2.0 * np.asarray(b, dtype=float)
    c2 = np.asarray(chord, dtype=float) ** 2
    small = np.abs(t) < 1e-4
    tt = np.where(small, 1.0, np.abs(t))
    theta = 4.0 * np.arctan(tt)
    r = (1.0 + t * t) / (4.0 * tt)          # radius / chord
    exact = 0.5 * c2 * r * r * (theta - np.sin(theta))
    series = c2 * ((1.0 / 3.0) * np.abs(t) + (1.0 / 15.0) * np.abs(t) ** 3)
    return np.sign(t) * np.where(small, series, exact)


def arc_curvature(chord, b) -> float:
    """Signed curvature of the arc traversed chord-start to chord-end."""
    t = 2.0 * b
    return -4.0 * t / (chord * (1.0 + t * t))


def sample_arc(a, e, b, n) -> np.ndarray:
    """n samples along the arc from a to e with bulge b (endpoints exact)."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    chord = np.linalg.norm(e - a)
    if abs(b) < 1e-12 or chord == 0.0:
        t = np.linspace(0.0, 1.0, n)
        return (1 - t)[:, None] * a + t[:, None] * e
    u = (e - a) / chord
    nl = np.array([-u[1], u[0]])                 # left normal of the chord
    mid = 0.5 * (a + e)
    t2 = 2.0 * b
    r = chord * (1.0 + t2 * t2) / (4.0 * abs(t2))
    sag = b * chord
    center = mid + (sag - math.copysign(r, b)) * nl
    theta = 4.0 * math.atan(2.0 * abs(b))
    phi_a = math.atan2(a[1] - center[1], a[0] - center[0])
    sweep = -math.copysign(theta, b)             # positive bulge -> clockwise arc
    phis = phi_a + sweep * np.linspace(0.0, 1.0, n)
    pts = center + r * np.column_stack([np.cos(phis), np.sin(phis)])
    pts[0], pts[-1] = a, e
    return pts


def fit_bulge(curve: Curve) -> float:
    """Signed sagitta/chord ratio of a sampled open curve."""
    a, e = curve.points[0], curve.points[-1]
    chord = np.linalg.norm(e - a)
    if chord == 0.0:
        return 0.0
    u = (e - a) / chord
    nl = np.array([-u[1], u[0]])
    offs = (curve.points - a) @ nl
    i = int(np.argmax(np.abs(offs)))
    return float(offs[i] / chord)


# ---------------------------------------------------------------------------
# network: topology frozen, geometry packed into a flat variable vector

@dataclass
class ArcNetworkVars:
    """Decoded solver variables for a fixed network topology."""

    nodes: np.ndarray                  # (P, 2) triple-point positions
    bulges: np.ndarray                 # per open interface
    circles: np.ndarray                # (C, 3) center x, center y, radius

    def __post_init__(self):
        if not np.all(np.isfinite(self.bulges)):
            raise ValueError("bulges must be finite")
        if len(self.circles) and np.any(self.circles[:, 2] <= 0.0):
            raise ValueError("circle radii must be positive")


@dataclass
class _Topology:
    n_chambers: int
    open_ifaces: list            # (iface_id, start_node, end_node, h, k)
    closed_ifaces: list          # (iface_id, orient, h, k)
    chambers: list               # per chamber 1..N: list of (slot, kind, forward)
    iface_order: list            # original interface ids in order
    mid_counts: list             # samples per interface in the init cluster


def _extract_topology(init: PlanarCluster):
    tol = max(100 * init.tol_x(), 1e-9)
    node_pos = np.array([tp.position for tp in init.triple_points]).reshape(-1, 2)
    end_to_node = {}
    for j, tp in enumerate(init.triple_points):
        for iface_id, end in tp.incident:
            end_to_node[(iface_id, end)] = j

    open_ifaces, closed_ifaces = [], []
    bulges, circles = [], []
    open_slot, closed_slot = {}, {}
    for i, iface in enumerate(init.interfaces):
        if iface.curve.closed:
            pts = iface.curve.points
            center = pts.mean(axis=0)
            r = float(np.linalg.norm(pts - center, axis=1).mean())
            orient = 1.0 if _polygon_area(pts) > 0 else -1.0
            closed_slot[i] = len(closed_ifaces)
            closed_ifaces.append((i, orient, iface.h, iface.k))
            circles.append([center[0], center[1], r])
        else:
            s = end_to_node.get((i, 0))
            e = end_to_node.get((i, 1))
            if s is None or e is None:
                raise SolverError(
                    f"interface {i} has a free endpoint; solver needs a closed topology"
                )
            p0, p1 = iface.curve.points[0], iface.curve.points[-1]
            if (np.linalg.norm(p0 - node_pos[s]) > 1e3 * tol
                    or np.linalg.norm(p1 - node_pos[e]) > 1e3 * tol):
                raise SolverError(f"interface {i} endpoints do not match triple points")
            open_slot[i] = len(open_ifaces)
            open_ifaces.append((i, s, e, iface.h, iface.k))
            bulges.append(fit_bulge(iface.curve))

    chambers = []
    for h in range(1, init.n_chambers + 1):
        items = []
        for i, fwd in chamber_traversals(init, h):
            if init.interfaces[i].curve.closed:
                items.append((closed_slot[i], "circle", fwd))
            else:
                items.append((open_slot[i], "arc", fwd))
        chambers.append(items)

    topo = _Topology(
        n_chambers=init.n_chambers,
        open_ifaces=open_ifaces,
        closed_ifaces=closed_ifaces,
        chambers=chambers,
        iface_order=[i for i, *_ in open_ifaces] + [i for i, *_ in closed_ifaces],
        mid_counts=[f.curve.n for f in init.interfaces],
    )
    v = ArcNetworkVars(
        nodes=node_pos,
        bulges=np.asarray(bulges, dtype=float),
        circles=np.asarray(circles, dtype=float).reshape(-1, 3),
    )
    return topo, v


def _polygon_area(pts) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _pack(v: ArcNetworkVars) -> np.ndarray:
    return np.concatenate([v.nodes.ravel(), v.bulges, v.circles.ravel()])


def _unpack(x, template: ArcNetworkVars) -> ArcNetworkVars:
    p = template.nodes.size
    b = template.bulges.size
    nodes = x[:p].reshape(-1, 2)
    bulges = x[p : p + b]
    circles = x[p + b :].reshape(-1, 3)
    return ArcNetworkVars(nodes=nodes, bulges=bulges, circles=circles)


def _arc_geometry(topo: _Topology, v: ArcNetworkVars):
    """Per open interface: start point, end point, chord, bulge."""
    if not topo.open_ifaces:
        z = np.zeros((0, 2))
        return z, z, np.zeros(0), np.zeros(0)
    s = np.array([v.nodes[si] for _, si, _, _, _ in topo.open_ifaces])
    e = np.array([v.nodes[ei] for _, _, ei, _, _ in topo.open_ifaces])
    chord = np.linalg.norm(e - s, axis=1)
    return s, e, chord, v.bulges


def _lengths(topo, v):
    s, e, chord, b = _arc_geometry(topo, v)
    open_len = arc_length(chord, b) if len(chord) else np.zeros(0)
    closed_len = 2.0 * math.pi * v.circles[:, 2] if len(v.circles) else np.zeros(0)
    return open_len, closed_len


def _areas(topo, v) -> np.ndarray:
    s, e, chord, b = _arc_geometry(topo, v)
    cross = 0.5 * (s[:, 0] * e[:, 1] - s[:, 1] * e[:, 0]) if len(chord) else np.zeros(0)
    seg = arc_segment_area(chord, b) if len(chord) else np.zeros(0)
    out = np.empty(topo.n_chambers)
    for h0, items in enumerate(topo.chambers):
        total = 0.0
        for slot, kind, fwd in items:
            if kind == "arc":
                total += (cross[slot] - seg[slot]) if fwd else (-cross[slot] + seg[slot])
            else:
                cx, cy, r = v.circles[slot]
                orient = topo.closed_ifaces[slot][1]
                total += (orient if fwd else -orient) * math.pi * r * r
        out[h0] = total
    return out


# degree-4 quadrature on the reference triangle (6 points)
_TRI_W = np.array([0.109951743655322] * 3 + [0.223381589678011] * 3)
_TRI_P = np.array(
    [
        [0.816847572980459, 0.091576213509771],
        [0.091576213509771, 0.816847572980459],
        [0.091576213509771, 0.091576213509771],
        [0.108103018168070, 0.445948490915965],
        [0.445948490915965, 0.108103018168070],
        [0.445948490915965, 0.445948490915965],
    ]
)


def _chamber_integrals(topo, v, g, n_sub) -> np.ndarray:
    """Integral of g over each chamber via signed triangle-fan quadrature.

    Boundary arcs are polygonized with n_sub points; the integral over the
    enclosed region is the signed sum over boundary edges of the integral of
    g on the triangle (origin, p_i, p_{i+1}), which is smooth in the solver
    variables.
    """
    s, e, _, b = _arc_geometry(topo, v)
    arc_polys = [
        sample_arc(s[i], e[i], b[i], n_sub) for i in range(len(topo.open_ifaces))
    ]
    circ_polys = []
    for slot, (iface_id, orient, _, _) in enumerate(topo.closed_ifaces):
        cx, cy, r = v.circles[slot]
        t = np.linspace(0.0, 2 * math.pi, 4 * n_sub + 1) * orient
        circ_polys.append(np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)]))

    out = np.empty(topo.n_chambers)
    for h0, items in enumerate(topo.chambers):
        edges_p, edges_q = [], []
        for slot, kind, fwd in items:
            poly = arc_polys[slot] if kind == "arc" else circ_polys[slot]
            if not fwd:
                poly = poly[::-1]
            edges_p.append(poly[:-1])
            edges_q.append(poly[1:])
        p = np.vstack(edges_p)
        q = np.vstack(edges_q)
        # signed triangle (0, p, q) quadrature
        area2 = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]        # 2 x signed area
        pts = (
            _TRI_P[None, :, 0, None] * p[:, None, :]
            + _TRI_P[None, :, 1, None] * q[:, None, :]
        )
        vals = g(pts.reshape(-1, 2)).reshape(len(p), -1)
        out[h0] = float(0.5 * np.sum(area2[:, None] * _TRI_W[None, :] * vals))
    return out


def _decode(topo: _Topology, v: ArcNetworkVars, init: PlanarCluster,
            samples: int) -> PlanarCluster:
    """Rebuild a sampled PlanarCluster from solver variables."""
    ifaces = [None] * len(init.interfaces)
    for slot, (iface_id, si, ei, h, k) in enumerate(topo.open_ifaces):
        pts = sample_arc(v.nodes[si], v.nodes[ei], float(v.bulges[slot]), samples)
        ifaces[iface_id] = Interface(Curve(pts), h, k)
    for slot, (iface_id, orient, h, k) in enumerate(topo.closed_ifaces):
        cx, cy, r = v.circles[slot]
        t = np.arange(samples) / samples * 2 * math.pi * orient
        pts = np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])
        ifaces[iface_id] = Interface(Curve(pts, closed=True), h, k)
    tps = []
    for j, tp in enumerate(init.triple_points):
        tps.append(TriplePoint(v.nodes[j], tp.incident))
    return PlanarCluster(init.n_chambers, tuple(ifaces), tuple(tps))


def write_iteration_log(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "energy", "constraint_norm", "step_size"])
        for r in rows:
            w.writerow([r.iter, repr(r.energy), repr(r.constraint_norm), repr(r.step_size)])


def _solve(m, init, opts, g=None, delta=0.0):
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0):
        raise ValueError("target areas must be positive")
    if len(m) != init.n_chambers:
        raise ValueError("target area count must match chamber count")
    topo, v0 = _extract_topology(init)
    x0 = _pack(v0)
    scale = np.maximum(m, 1.0)

    def energy(x):
        v = _unpack(x, v0)
        open_len, closed_len = _lengths(topo, v)
        e = float(open_len.sum() + closed_len.sum())
        if g is not None and delta != 0.0:
            e += delta * float(_chamber_integrals(topo, v, g, opts.quad_subdiv).sum())
        return e

    def residual(x):
        return _areas(topo, _unpack(x, v0)) - m

    lam = np.zeros(len(m))
    pen = opts.penalty0
    rows = []
    x = x0.copy()
    e_prev = energy(x)
    h_prev_norm = float(np.abs(residual(x) / scale).max())

    def lagrangian(xx):
        h = residual(xx)
        return energy(xx) - float(lam @ h) + 0.5 * pen * float(h @ h)

    converged = False
    for outer in range(opts.max_outer):
        res = minimize(
            lagrangian,
            x,
            method="BFGS",
            options={"maxiter": opts.inner_iters, "gtol": 1e-12},
        )
        x_new = res.x
        h = residual(x_new)
        e = energy(x_new)
        step = float(np.linalg.norm(x_new - x))
        h_rel = float(np.abs(h / scale).max())
        x = x_new
        rows.append(IterationRow(outer, e, h_rel, step))
        stalled = abs(e - e_prev) <= opts.tol_energy * max(1.0, abs(e_prev))
        if h_rel <= opts.tol_vol and (stalled or step <= 1e-10):
            converged = True
            break
        lam = lam - pen * h
        # Grow the penalty only while it still buys constraint progress;
        # past that point multiplier updates do the remaining work and a
        # larger penalty just amplifies finite-difference gradient noise.
        if h_rel > 0.25 * h_prev_norm:
            pen = min(pen * opts.penalty_growth, opts.penalty_max)
        e_prev, h_prev_norm = e, h_rel

    if not converged:
        h_rel = float(np.abs(residual(x) / scale).max())
        if h_rel > 10 * opts.tol_vol:
            raise SolverError(
                f"no convergence in {opts.max_outer} outer iterations "
                f"(area residual {h_rel:.3g})"
            )

    v = _unpack(x, v0)
    open_len, _ = _lengths(topo, v)
    net = energy(x)
    for slot, ln in enumerate(open_len):
        if ln < 1e-3 * max(net, 1e-12):
            raise TopologyCollapseError(topo.open_ifaces[slot][0], float(ln))

    out = _decode(topo, v, init, opts.samples_per_interface)
    if opts.log_path:
        write_iteration_log(rows, opts.log_path)
    return out, rows


def solve_partition(m, init: PlanarCluster, opts: SolveOptions | None = None) -> PlanarCluster:
    """Locally minimize total interface length at prescribed chamber areas."""
    opts = opts or SolveOptions()
    return _solve(m, init, opts)[0]


def solve_with_potential(m, g, delta: float, init: PlanarCluster,
                         opts: SolveOptions | None = None) -> PlanarCluster:
    """Minimize perimeter + delta * sum_h int_chamber g at prescribed areas.

    ``g`` maps an (n, 2) array of points to n nonnegative values.  With
    delta = 0 the variable trajectory coincides with :func:`solve_partition`.
    """
    opts = opts or SolveOptions()
    if delta == 0.0:
        g = None
    return _solve(m, init, opts, g=g, delta=delta)[0]


def solve_partition_logged(m, init, opts=None, g=None, delta=0.0):
    """Like the solve entry points but also returns the iteration rows."""
    opts = opts or SolveOptions()
    return _solve(m, init, opts, g=g, delta=delta)


# ---------------------------------------------------------------------------
# volume-fixing projection and pressure recovery

def project_volumes(c: PlanarCluster, m, tol_vol: float = 1e-9,
                    max_iter: int = 30) -> PlanarCluster:
    """Restore prescribed areas by uniform normal offsets per interface.

    Newton iteration on the offsets t solving (signed incidence x interface
    length) t = m - areas(c); each interface sample moves by t along its
    normal, and triple points are re-glued at the centroid of their three
    offset endpoints.  Converges to |areas - m| <= tol_vol * max(m, 1).
    """
    m = np.asarray(m, dtype=float)
    if len(m) != c.n_chambers:
        raise ValueError("target area count must match chamber count")
    a = areas(c)
    if np.any(np.abs(a - m) > 0.1 * np.maximum(m, 1e-12) + 1e-12):
        raise ValueError("areas too far from targets for a normal-offset projection")
    scale = np.maximum(np.abs(m), 1.0)
    cur = c
    for _ in range(max_iter):
        a = areas(cur)
        resid = m - a
        if np.all(np.abs(resid) <= tol_vol * scale):
            return cur
        mat = np.zeros((cur.n_chambers, len(cur.interfaces)))
        for i, iface in enumerate(cur.interfaces):
            ln = iface.curve.length
            if iface.h >= 1:
                mat[iface.h - 1, i] += ln
            if iface.k >= 1:
                mat[iface.k - 1, i] -= ln
        t, *_ = np.linalg.lstsq(mat, resid, rcond=None)
        check = mat @ t - resid
        if np.linalg.norm(check) > 1e-6 * (np.linalg.norm(resid) + 1e-30):
            raise SingularIncidenceError(
                "incidence system cannot produce the requested area change"
            )
        cur = _apply_offsets(cur, t)
    raise SolverError(f"volume projection did not converge in {max_iter} iterations")


def _apply_offsets(c: PlanarCluster, t) -> PlanarCluster:
    moved = []
    for i, iface in enumerate(c.interfaces):
        _, nu, _ = frames(iface.curve)
        pts = iface.curve.points + t[i] * nu
        moved.append(pts)
    # re-glue triple points at the centroid of the three moved endpoints
    tps = []
    for tp in c.triple_points:
        ends = []
        for iface_id, end in tp.incident:
            ends.append(moved[iface_id][0 if end == 0 else -1])
        pos = np.mean(ends, axis=0)
        for iface_id, end in tp.incident:
            moved[iface_id][0 if end == 0 else -1] = pos
        tps.append(TriplePoint(pos, tp.incident))
    ifaces = tuple(
        Interface(Curve(pts, closed=f.curve.closed), f.h, f.k)
        for pts, f in zip(moved, c.interfaces)
    )
    return PlanarCluster(c.n_chambers, ifaces, tuple(tps))


@dataclass
class PressureFit:
    pressures: np.ndarray     # lambda_1 .. lambda_N (exterior fixed to 0)
    residual: float           # max |mean curvature - (lambda_h - lambda_k)|


def curvature_multipliers(c: PlanarCluster) -> PressureFit:
    """Least-squares chamber pressures from mean interface curvatures.

    Model: mean signed curvature of interface (h, k) = lambda_h - lambda_k
    with lambda_0 = 0 for the exterior.
    """
    rows = []
    rhs = []
    for iface in c.interfaces:
        _, _, kappa = frames(iface.curve)
        interior = kappa if iface.curve.closed else kappa[1:-1]
        row = np.zeros(c.n_chambers)
        if iface.h >= 1:
            row[iface.h - 1] = 1.0
        if iface.k >= 1:
            row[iface.k - 1] = -1.0
        rows.append(row)
        rhs.append(float(interior.mean()))
    a = np.asarray(rows)
    b = np.asarray(rhs)
    lam, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.abs(a @ lam - b).max())
    return PressureFit(pressures=lam, residual=resid)
