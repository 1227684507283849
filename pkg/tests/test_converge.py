import math
import os

import numpy as np
import pytest

from planarclusters import canon
from planarclusters.cluster import Interface, PlanarCluster, TriplePoint
from planarclusters.converge import (
    CSV_COLUMNS,
    StructuralMismatchError,
    improved_convergence_report,
    match_structure,
    normal_graph,
)
from planarclusters.geom import Curve
from planarclusters.optimize import solve_partition, solve_with_potential


@pytest.fixture(scope="module")
def exact_db():
    return canon.double_bubble_cluster(math.pi)


@pytest.fixture(scope="module")
def solved_db():
    return solve_partition(
        [math.pi, math.pi], canon.double_bubble_init(math.pi, math.pi)
    )


def shuffled(c: PlanarCluster) -> PlanarCluster:
    order = [2, 0, 1]
    inv = {old: new for new, old in enumerate(order)}
    ifaces = []
    for old in order:
        f = c.interfaces[old]
        ifaces.append(Interface(f.curve.reversed(), f.h, f.k))
    tps = []
    for tp in c.triple_points:
        inc = tuple((inv[i], 1 - e) for i, e in tp.incident)
        tps.append(TriplePoint(tp.position, inc))
    return PlanarCluster(c.n_chambers, ifaces, tps)


class TestMatchStructure:
    def test_self_match(self, exact_db):
        sm = match_structure(exact_db, exact_db)
        assert [j for j, _ in sm.iface_map] == [0, 1, 2]
        assert not any(rev for _, rev in sm.iface_map)
        assert np.abs(sm.point_residuals).max() == 0.0

    def test_matches_through_relabeling_and_reversal(self, exact_db):
        sm = match_structure(exact_db, shuffled(exact_db))
        assert sorted(j for j, _ in sm.iface_map) == [0, 1, 2]
        assert all(rev for _, rev in sm.iface_map)
        assert np.abs(sm.point_residuals).max() <= 1e-12

    def test_matches_solved_cluster(self, exact_db, solved_db):
        sm = match_structure(exact_db, solved_db)
        assert np.abs(sm.point_residuals).max() < 1e-3
        assert np.max(sm.conormal_residuals) < 1e-2

    def test_mismatched_topology_rejected(self, exact_db):
        with pytest.raises(StructuralMismatchError):
            match_structure(exact_db, canon.disk_cluster())


class TestNormalGraph:
    def test_offset_circle(self):
        n = 512
        th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        base = Curve(np.stack([np.cos(th), np.sin(th)], axis=1), closed=True)
        bigger = Curve(1.01 * base.points, closed=True)
        g = normal_graph(base, bigger, rho=0.02)
        assert g.c0 == pytest.approx(0.01, rel=1e-3)
        assert np.std(g.psi) < 1e-5

    def test_open_interface_against_cluster(self, exact_db, solved_db):
        g = normal_graph(
            exact_db.interfaces[0].curve, solved_db, rho=0.02
        )
        assert g.c0 < 1e-3
        assert g.c1 < 1e-2


class TestReport:
    def test_single_member(self, exact_db, solved_db):
        rep = improved_convergence_report(exact_db, [solved_db], mu=0.2)
        row = rep.rows[0]
        assert row.status == "ok"
        assert row.hd_boundary < 1e-3
        assert row.f_c1 < 1e-2
        assert row.curvature_deviation < 1e-4

    def test_bad_member_marks_row(self, exact_db):
        rep = improved_convergence_report(
            exact_db, [canon.disk_cluster()], mu=0.2
        )
        assert rep.rows[0].status.startswith("failed")
        assert math.isnan(rep.rows[0].delta)

    def test_csv_shape_and_determinism(self, exact_db, solved_db, tmp_path):
        rep = improved_convergence_report(exact_db, [solved_db], mu=0.2)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        rep.to_csv(p1)
        rep.to_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()
        header = p1.read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)

    def test_svg_overlays(self, exact_db, solved_db, tmp_path):
        rep = improved_convergence_report(exact_db, [solved_db], mu=0.2)
        paths = rep.to_svgs(tmp_path / "figs", [solved_db])
        assert len(paths) == 1
        assert os.path.exists(paths[0])
        body = open(paths[0]).read()
        assert body.startswith("<svg")
        assert "polyline" in body


class TestPotentialSequence:
    def test_decay_toward_limit(self, exact_db):
        g = lambda p: p[:, 0] ** 2 + p[:, 1] ** 2
        init = canon.double_bubble_init(math.pi, math.pi)
        seq = []
        for k in range(3):
            m = solve_with_potential([math.pi, math.pi], g, 0.02 * 2.0**-k, init)
            seq.append(m)
            init = m
        rep = improved_convergence_report(exact_db, seq, mu=0.2)
        hd = [r.hd_boundary for r in rep.rows]
        fc1 = [r.f_c1 for r in rep.rows]
        assert all(r.status == "ok" for r in rep.rows)
        assert hd[0] > hd[1] > hd[2]
        assert fc1[0] > fc1[1] > fc1[2]
