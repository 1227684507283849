"""Command-line entry point: solve, check, diffeo, converge, render.

Exit codes: 0 success, 1 domain failure (failed checks, bracket failures),
2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import cluster as cl
from . import optimize as opt
from .diffeo import build_diffeo, diffeo_norms, DiffeoError
from .converge import improved_convergence_report
from .svgplot import render_clusters_svg


@dataclass
class Config:
    tol_x: float = 1e-9
    tol_vol: float = 1e-9
    tol_root: float = 1e-10
    tol_angle_deg: float = 0.5
    grid: int = 512
    seed: int = 0
    mu: float = 0.2
    rho: float | None = None

    def __post_init__(self):
        for name in ("tol_x", "tol_vol", "tol_root", "tol_angle_deg"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rho is None:
            self.rho = self.mu * self.mu / 2.0
        if self.rho >= self.mu * self.mu:
            raise ValueError("config needs mu^2 > rho")


def load_config(path) -> Config:
    with open(path) as fh:
        return Config(**json.load(fh))


class UsageError(Exception):
    pass


def _parse_areas(text: str) -> np.ndarray:
    vals = []
    ns = {"pi": math.pi, "sqrt": math.sqrt}
    for token in text.replace("π", "pi").split(","):
        token = token.strip()
        try:
            vals.append(float(eval(token, {"__builtins__": {}}, ns)))
        except Exception as exc:
            raise UsageError(f"cannot parse area {token!r}: {exc}") from exc
    return np.asarray(vals)


def _potential(name: str):
    if name == "zero":
        return None
    if name.startswith("quadratic"):
        scale = float(name.split(":", 1)[1]) if ":" in name else 1.0
        return lambda p: scale * np.einsum("ij,ij->i", p, p)
    if name.startswith("gaussian"):
        sigma = float(name.split(":", 1)[1]) if ":" in name else 1.0
        return lambda p: np.exp(-np.einsum("ij,ij->i", p, p) / (2 * sigma * sigma))
    raise UsageError(f"unknown potential {name!r} (use zero|quadratic|gaussian)")


def _load(path) -> cl.PlanarCluster:
    try:
        return cl.load_cluster(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed cluster file {path}: {exc}") from exc


def cmd_solve(args, cfg: Config) -> int:
    init = _load(args.init)
    m = _parse_areas(args.areas)
    opts = opt.SolveOptions(seed=args.seed if args.seed is not None else cfg.seed,
                            log_path=args.log)
    g = _potential(args.potential)
    try:
        if g is None or args.delta == 0.0:
            out = opt.solve_partition(m, init, opts)
        else:
            out = opt.solve_with_potential(m, g, args.delta, init, opts)
    except opt.SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return 1
    cl.save_cluster(out, args.out)
    print(f"wrote {args.out} (perimeter {cl.perimeter(out)!r})")
    return 0


def cmd_check(args, cfg: Config) -> int:
    c = _load(args.input)
    diag = cl.validate(c)
    print(diag)
    ok = diag.ok
    report = cl.plateau_check(c, tol_angle=math.radians(cfg.tol_angle_deg))
    print(
        f"max angle deviation: {math.degrees(report.max_angle_deviation):.4f} deg "
        f"(tol {cfg.tol_angle_deg} deg)"
    )
    for i, (mean, std) in enumerate(zip(report.curvature_mean, report.curvature_std)):
        print(f"interface {i}: curvature mean {mean:.6g}, std {std:.3g}")
    if c.triple_points or not diag.n_free_endpoints:
        ok = ok and report.ok_angles and report.ok_curvature
    try:
        fit = opt.curvature_multipliers(c)
        pressures = ", ".join(f"{p:.6g}" for p in fit.pressures)
        print(f"pressures: [{pressures}], residual {fit.residual:.3g}")
    except Exception as exc:  # pressure fit is informational
        print(f"pressure fit unavailable: {exc}")
    if not report.ok_angles:
        worst = math.degrees(report.max_angle_deviation)
        print(f"FAIL: worst junction angle deviation {worst:.3f} deg", file=sys.stderr)
    return 0 if ok else 1


def _single_open_interface(c: cl.PlanarCluster, which: int | None):
    open_ids = [i for i, f in enumerate(c.interfaces) if not f.curve.closed]
    if which is not None:
        return c.interfaces[which].curve
    if len(open_ids) != 1:
        raise UsageError(
            f"file has {len(open_ids)} open interfaces; pass --interface"
        )
    return c.interfaces[open_ids[0]].curve


def cmd_diffeo(args, cfg: Config) -> int:
    src = _single_open_interface(_load(args.source), args.interface)
    tgt = _single_open_interface(_load(args.target), args.interface)
    f0 = np.vstack([tgt.points[0], tgt.points[-1]])
    try:
        dm = build_diffeo(src, tgt, f0, mu=args.mu or cfg.mu,
                          rho=args.rho or cfg.rho)
    except DiffeoError as exc:
        print(f"diffeo construction failed: {exc}", file=sys.stderr)
        return 1
    table = dm.to_table()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    norms = diffeo_norms(dm)
    for key, val in norms.as_dict().items():
        print(f"{key}: {val!r}")
    return 0


def cmd_converge(args, cfg: Config) -> int:
    limit = _load(args.limit)
    seq = [_load(p) for p in args.members]
    report = improved_convergence_report(
        limit, seq, mu=args.mu or cfg.mu, rho=args.rho or cfg.rho
    )
    report.to_csv(args.out)
    print(f"wrote {args.out}")
    if args.svg_dir:
        for p in report.to_svgs(args.svg_dir, seq):
            print(f"wrote {p}")
    failed = [r for r in report.rows if r.status != "ok"]
    for r in failed:
        print(f"warning: row k={r.k} {r.status}", file=sys.stderr)
    ok_rows = [r for r in report.rows if r.status == "ok"]
    if len(ok_rows) >= 2:
        dev = [r.curvature_deviation for r in ok_rows]
        if all(d > 0 for d in dev):
            slopes = np.diff(np.log2(dev))
            print(f"curvature-deviation log2 decrements: "
                  + ", ".join(f"{s:.3f}" for s in slopes))
    return 0


def cmd_render(args, cfg: Config) -> int:
    c = _load(args.input)
    markers = np.array([tp.position for tp in c.triple_points]).reshape(-1, 2)
    render_clusters_svg(args.out, [(c, "#222222", 2.0, None)], marker_points=markers)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="planarclusters",
        description="Planar bubble-cluster toolkit: solve, check, diffeo, converge, render.",
    )
    p.add_argument("--config", help="JSON config file with tolerances")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="minimize perimeter at prescribed areas")
    ps.add_argument("--areas", required=True, help="comma list, e.g. 'pi,pi'")
    ps.add_argument("--init", required=True, help="initial cluster file")
    ps.add_argument("--potential", default="zero",
                    help="zero | quadratic[:scale] | gaussian[:sigma]")
    ps.add_argument("--delta", type=float, default=0.0, help="potential weight")
    ps.add_argument("--out", default="solution.cluster")
    ps.add_argument("--log", default=None, help="iteration log CSV path")
    ps.add_argument("--seed", type=int, default=None)
    ps.set_defaults(fn=cmd_solve)

    pc = sub.add_parser("check", help="validate topology and Plateau structure")
    pc.add_argument("input")
    pc.set_defaults(fn=cmd_check)

    pd = sub.add_parser("diffeo", help="build the almost-normal map between two files")
    pd.add_argument("source")
    pd.add_argument("target")
    pd.add_argument("--interface", type=int, default=None)
    pd.add_argument("--mu", type=float, default=None)
    pd.add_argument("--rho", type=float, default=None)
    pd.add_argument("--out", default=None, help="write the sample table here")
    pd.set_defaults(fn=cmd_diffeo)

    pv = sub.add_parser("converge", help="convergence report of a sequence vs a limit")
    pv.add_argument("--limit", required=True)
    pv.add_argument("--members", nargs="+", required=True)
    pv.add_argument("--mu", type=float, default=None)
    pv.add_argument("--rho", type=float, default=None)
    pv.add_argument("--out", default="report.csv")
    pv.add_argument("--svg-dir", default=None)
    pv.set_defaults(fn=cmd_converge)

    pr = sub.add_parser("render", help="render a cluster file to SVG")
    pr.add_argument("input")
    pr.add_argument("--out", default="cluster.svg")
    pr.set_defaults(fn=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else Config()
    except (OSError, ValueError, TypeError) as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return 2
    try:
        return args.fn(args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
