import json
import math

import pytest

from planarclusters import canon
from planarclusters.cli import main
from planarclusters.cluster import load_cluster, save_cluster, areas


@pytest.fixture()
def init_file(tmp_path):
    p = tmp_path / "init.json"
    save_cluster(canon.double_bubble_init(math.pi, math.pi), p)
    return str(p)


@pytest.fixture()
def exact_file(tmp_path):
    p = tmp_path / "exact.json"
    save_cluster(canon.double_bubble_cluster(math.pi), p)
    return str(p)


class TestSolve:
    def test_solve_writes_cluster_and_log(self, tmp_path, init_file, capsys):
        out = tmp_path / "sol.json"
        log = tmp_path / "log.csv"
        rc = main(
            ["solve", "--areas", "pi,pi", "--init", init_file,
             "--out", str(out), "--log", str(log)]
        )
        assert rc == 0
        sol = load_cluster(out)
        assert areas(sol)[0] == pytest.approx(math.pi, rel=1e-3)
        assert log.read_text().startswith("iter,energy,constraint_norm,step_size")

    def test_area_expressions(self, tmp_path, init_file):
        out = tmp_path / "sol.json"
        rc = main(["solve", "--areas", "3.1,2.9", "--init", init_file, "--out", str(out)])
        assert rc == 0

    def test_bad_areas_is_usage_error(self, init_file):
        assert main(["solve", "--areas", "nope", "--init", init_file]) == 2

    def test_missing_init_is_usage_error(self, tmp_path):
        assert main(["solve", "--areas", "pi", "--init", str(tmp_path / "none.json")]) == 2


class TestCheck:
    def test_valid_cluster(self, exact_file, capsys):
        assert main(["check", exact_file]) == 0
        out = capsys.readouterr().out
        assert "valid" in out
        assert "pressures" in out

    def test_reports_on_truncated_network(self, tmp_path, capsys):
        p = tmp_path / "y2.json"
        save_cluster(canon.steiner_y2(), p)
        assert main(["check", str(p)]) == 0
        assert "free endpoints" in capsys.readouterr().out


class TestDiffeo:
    def test_requires_interface_choice(self, exact_file, init_file):
        assert main(["diffeo", exact_file, init_file]) == 2

    def test_writes_sample_table(self, tmp_path, exact_file, init_file, capsys):
        out = tmp_path / "map.txt"
        rc = main(
            ["diffeo", exact_file, exact_file, "--interface", "0", "--out", str(out)]
        )
        assert rc == 0
        assert out.read_text().splitlines()[0].startswith("#")
        assert "c0:" in capsys.readouterr().out


class TestConverge:
    def test_report_and_figures(self, tmp_path, exact_file, init_file):
        sol = tmp_path / "sol.json"
        main(["solve", "--areas", "pi,pi", "--init", init_file, "--out", str(sol)])
        out = tmp_path / "report.csv"
        figs = tmp_path / "figs"
        rc = main(
            ["converge", "--limit", exact_file, "--members", str(sol),
             "--out", str(out), "--svg-dir", str(figs)]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("k,status,delta")
        assert lines[1].split(",")[1] == "ok"
        assert (figs / "overlay_k0.svg").exists()


class TestRender:
    def test_svg_output(self, tmp_path, exact_file):
        out = tmp_path / "fig.svg"
        assert main(["render", exact_file, "--out", str(out)]) == 0
        assert out.read_text().startswith("<svg")


class TestConfig:
    def test_tolerances_loaded(self, tmp_path, exact_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mu": 0.25, "rho": 0.02}))
        assert main(["--config", str(cfg), "check", exact_file]) == 0

    def test_inconsistent_collar_rejected(self, tmp_path, exact_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mu": 0.1, "rho": 0.02}))
        assert main(["--config", str(cfg), "check", exact_file]) == 2
