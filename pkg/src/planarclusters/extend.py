"""Order-1 Whitney-type extension, signed distance maps, boundary-data cutoff.

The extension operator is a Shepard blend of first-order Taylor polynomials
with compactly supported singular weights: it interpolates both values and
gradients at the nodes and lets us measure (rather than prove) the norm of
the extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import Curve, frames, perp


class OutOfCollarError(ValueError):
    """Query left the tubular neighbourhood where the projection is unique."""


class CollarWidthError(ValueError):
    """Boundary collars overlap (curve too short for the requested width)."""


@dataclass(frozen=True)
class Jet1:
    """Order-1 jet: values and gradients prescribed on a finite point set."""

    positions: np.ndarray   # (K, 2)
    values: np.ndarray      # (K,)
    gradients: np.ndarray   # (K, 2)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        val = np.atleast_1d(np.asarray(self.values, dtype=float))
        grad = np.atleast_2d(np.asarray(self.gradients, dtype=float))
        if not (len(pos) == len(val) == len(grad)):
            raise ValueError("positions, values, gradients must have equal length")
        if not np.all(np.isfinite(val)) or not np.all(np.isfinite(grad)):
            raise ValueError("jet data must be finite")
        if len(pos) > 1:
            d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
            np.fill_diagonal(d, np.inf)
            if d.min() == 0.0:
                raise ValueError("node positions must be distinct")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "gradients", grad)

    def __len__(self):
        return len(self.positions)


def jet_norm(j: Jet1, alpha: float) -> float:
    """Whitney jet norm of order 1: sup part plus the two Taylor quotients.

    For the value component the quotient divides by |x-y|^(1+alpha), for the
    gradient components by |x-y|^alpha.
    """
    sup = max(float(np.abs(j.values).max()), float(np.abs(j.gradients).max()))
    if len(j) < 2:
        return sup
    pos, val, grad = j.positions, j.values, j.gradients
    diff = pos[None, :, :] - pos[:, None, :]           # y - x
    dist = np.linalg.norm(diff, axis=2)
    iu = np.triu_indices(len(j), k=1)
    d = dist[iu]
    # taylor0[x, y] = val[y] - val[x] - grad[x].(pos[y] - pos[x])
    taylor0 = val[None, :] - val[:, None] - np.einsum("xk,xyk->xy", grad, diff)
    q0 = np.abs(taylor0)[iu] / d ** (1.0 + alpha)
    # the value quotient is not symmetric in (x, y); take both orderings
    q0r = np.abs(taylor0.T)[iu] / d ** (1.0 + alpha)
    g = np.abs(grad[None, :, :] - grad[:, None, :]).max(axis=2)[iu]
    q1 = g / d ** alpha
    quotient = max(float(np.max(q0)), float(np.max(q0r)), float(np.max(q1)))
    return sup + quotient


@dataclass
class ExtensionResult:
    values: np.ndarray
    gradients: np.ndarray
    extrapolated: np.ndarray       # bool mask: query outside all weight supports
    norm_ratio: float              # discrete C^{1,alpha} norm of f / jet norm


def whitney_extend(j: Jet1, alpha: float, queries, support_radius: float | None = None) -> ExtensionResult:
    """Evaluate a smooth blend of the jet's Taylor polynomials.

    f(y) = sum_i w_i(y) [val_i + grad_i.(y - x_i)] with Franke-Little weights
    w_i ~ (1/d_i - 1/R)^2 inside radius R.  Values and gradients are matched
    exactly at the nodes; queries outside every support are flagged and get
    the nearest node's Taylor value.
    """
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    pos, val, grad = j.positions, j.values, j.gradients
    k = len(j)
    if support_radius is None:
        if k == 1:
            support_radius = math.inf
        else:
            d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
            np.fill_diagonal(d, np.inf)
            support_radius = 2.5 * float(d.min(axis=1).max())
    r = support_radius

    diff = q[:, None, :] - pos[None, :, :]             # (Q, K, 2)
    dist = np.linalg.norm(diff, axis=2)                # (Q, K)
    scale = max(float(np.abs(pos).max()), 1.0)
    at_node = dist < 1e-13 * scale

    # Taylor polynomials and their gradients at the queries
    p_iy = val[None, :] + np.einsum("ik,qik->qi", grad, diff)   # (Q, K)

    with np.errstate(divide="ignore", over="ignore"):
        u = np.where(dist < r, 1.0 / dist - (0.0 if math.isinf(r) else 1.0 / r), 0.0)
    u = np.clip(u, 0.0, np.inf)
    w = u * u                                           # (Q, K)
    wsum = w.sum(axis=1)
    extrapolated = wsum == 0.0

    values = np.empty(len(q))
    gradients = np.empty((len(q), 2))
    ok = ~extrapolated & ~at_node.any(axis=1)
    if ok.any():
        wn = w[ok] / wsum[ok, None]
        values[ok] = (wn * p_iy[ok]).sum(axis=1)
        # grad w_i = 2 u_i * (-1/d^2) * (y - x_i)/d
        with np.errstate(divide="ignore", invalid="ignore"):
            gw = (2.0 * u[ok] * (-1.0 / dist[ok] ** 3))[:, :, None] * diff[ok]
        gw = np.where(np.isfinite(gw), gw, 0.0)
        gw_sum = gw.sum(axis=1)
        num = (gw * p_iy[ok][:, :, None]).sum(axis=1) + (w[ok][:, :, None] * grad[None, :, :]).sum(axis=1)
        gradients[ok] = (num - values[ok][:, None] * gw_sum) / wsum[ok, None]

    node_rows, node_cols = np.nonzero(at_node)
    values[node_rows] = val[node_cols]
    gradients[node_rows] = grad[node_cols]

    if extrapolated.any():
        nearest = dist[extrapolated].argmin(axis=1)
        values[extrapolated] = p_iy[extrapolated, nearest]
        gradients[extrapolated] = grad[nearest]

    ratio = _discrete_c1alpha_norm(q, values, gradients, alpha) / max(jet_norm(j, alpha), 1e-300)
    return ExtensionResult(values, gradients, extrapolated, float(ratio))


def _discrete_c1alpha_norm(points, values, gradients, alpha, max_pairs: int = 400) -> float:
    sup = max(float(np.abs(values).max()), float(np.abs(gradients).max()))
    n = len(points)
    if n < 2:
        return sup
    idx = np.unique(np.linspace(0, n - 1, min(n, max_pairs)).astype(int))
    p = points[idx]
    g = gradients[idx]
    d = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=2)
    iu = np.triu_indices(len(idx), k=1)
    dd = d[iu]
    mask = dd > 0
    gq = np.abs(g[:, None, :] - g[None, :, :]).max(axis=2)[iu]
    holder = float((gq[mask] / dd[mask] ** alpha).max()) if mask.any() else 0.0
    return sup + holder


class DistanceMap:
    """Signed distance to a sampled curve, valid inside its normal collar.

    The sign follows the curve normal: d(x + t nu) = t for small t.  Outside
    the collar of half-width ``eps`` (default 0.5 / max curvature) the
    nearest-point projection may be ambiguous and strict evaluation raises
    :class:`OutOfCollarError`.
    """

    def __init__(self, curve: Curve, eps: float | None = None):
        self.curve = curve
        pts = curve.points
        if curve.closed:
            self._a = pts
            self._b = np.roll(pts, -1, axis=0)
        else:
            self._a = pts[:-1]
            self._b = pts[1:]
        self._d = self._b - self._a
        self._len2 = np.einsum("ij,ij->i", self._d, self._d)
        seg_dir = self._d / np.sqrt(self._len2)[:, None]
        self._seg_nu = perp(seg_dir)
        _, _, kappa = frames(curve)
        kmax = float(np.abs(kappa).max())
        if eps is None:
            eps = 0.5 / kmax if kmax > 0 else 0.25 * curve.length
        self.eps = float(eps)

    def _project(self, x):
        x = np.asarray(x, dtype=float)
        t = np.einsum("ij,ij->i", x[None, :] - self._a, self._d) / self._len2
        tc = np.clip(t, 0.0, 1.0)
        proj = self._a + tc[:, None] * self._d
        d2 = np.einsum("ij,ij->i", x[None, :] - proj, x[None, :] - proj)
        i = int(np.argmin(d2))
        return i, t[i], proj[i], math.sqrt(d2[i])

    def value(self, x, strict: bool = True) -> float:
        return self.evaluate(x, strict=strict)[0]

    def gradient(self, x, strict: bool = True) -> np.ndarray:
        return self.evaluate(x, strict=strict)[1]

    def evaluate(self, x, strict: bool = True):
        """Signed distance and its gradient at one query point."""
        x = np.asarray(x, dtype=float)
        i, t_raw, proj, dist = self._project(x)
        if strict:
            if dist >= self.eps:
                raise OutOfCollarError(
                    f"query at distance {dist:.3g} >= collar half-width {self.eps:.3g}"
                )
            if not self.curve.closed:
                nseg = len(self._a)
                past_end = (i == 0 and t_raw < -1e-9) or (i == nseg - 1 and t_raw > 1 + 1e-9)
                if past_end and dist > 1e-12 * self.curve.length:
                    raise OutOfCollarError("projection clamps to a curve endpoint")
        nu = self._seg_nu[i]
        off = x - proj
        if dist <= 1e-13 * max(self.curve.length, 1.0):
            return 0.0, nu.copy()
        sign = 1.0 if float(off @ nu) >= 0.0 else -1.0
        return sign * dist, sign * off / dist


def smooth_step(t):
    """Quintic smoothstep: 0 at t<=0, 1 at t>=1, C^2 across the joins."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def cutoff_profile(t):
    """Decreasing quintic profile chi: chi(0)=1, chi(t)=0 for t>=1.

    Plain smoothstep falloff over [0, 1]; max slope 15/8.
    """
    return 1.0 - smooth_step(t)


def extend_boundary_data(s0: Curve, abar, mu: float) -> np.ndarray:
    """Spread two endpoint values over an open curve with cutoff collars.

    a(x) = abar[0] chi(dist_S(x, p0)/mu) + abar[1] chi(dist_S(x, q0)/mu)
    with geodesic (arc-length) distances; exact at the endpoints and zero
    beyond the mu-collars.
    """
    if s0.closed:
        raise ValueError("boundary data extension needs an open curve")
    if s0.length <= 2.0 * mu:
        raise CollarWidthError(
            f"collars of width {mu} overlap on a curve of length {s0.length:.3g}"
        )
    s = s0.arclengths
    a0, a1 = float(abar[0]), float(abar[1])
    return a0 * cutoff_profile(s / mu) + a1 * cutoff_profile((s0.length - s) / mu)
