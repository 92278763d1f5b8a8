import json

import numpy as np
import pytest

from bohmdirac import cli
from bohmdirac.errors import ScenarioError
from bohmdirac.scenario import build_foliation, load_scenario

from conftest import REPO_ROOT

SCENARIOS = REPO_ROOT / "scenarios"


def write_scenario(tmp_path, name="mini.toml", *, foliation="appendix_f",
                   m=60, seed=3, t0=-2.0, t1=2.0, h=0.05, extra="",
                   window="[[-14.0, 14.0], [-14.0, 14.0]]"):
    text = f"""
title = "mini"
[foliation]
name = "{foliation}"

[wave]
masses = [1.0, 1.0]
[[wave.terms]]
coeff = [0.8, 0.0]
  [[wave.terms.factors]]
  k_center = 0.6
  n_modes = 48
  x_center = -2.2
  [[wave.terms.factors]]
  k_center = -0.4
  n_modes = 48
  x_center = 1.5
[[wave.terms]]
coeff = [0.5, 0.3]
  [[wave.terms.factors]]
  k_center = -0.5
  n_modes = 48
  x_center = -2.3
  [[wave.terms.factors]]
  k_center = 0.7
  n_modes = 48
  x_center = 1.3

[windows]
x = {window}

[ensemble]
m = {m}
seed = {seed}
t0 = {t0}
t1 = {t1}

[integrator]
h = {h}

[worldlines]
initial = [[-2.2, 1.4], [0.6, 1.2]]

[gates]
ks = 0.25
{extra}
"""
    p = tmp_path / name
    p.write_text(text)
    return p


class TestScenarioParsing:
    def test_shipped_scenarios_load(self):
        for name in ("appendix.toml", "flat.toml", "backward.toml"):
            sc = load_scenario(SCENARIOS / name)
            assert sc.wave.n_particles == 2
            assert sc.m > 0

    def test_unknown_foliation(self, tmp_path):
        p = write_scenario(tmp_path, foliation="moebius")
        with pytest.raises(ScenarioError, match="unknown foliation"):
            load_scenario(p)

    def test_window_outside_validity(self, tmp_path):
        p = write_scenario(tmp_path, window="[[-99.0, 99.0], [-14.0, 14.0]]")
        with pytest.raises(ScenarioError, match="outside foliation validity"):
            load_scenario(p)

    def test_t_outside_validity(self, tmp_path):
        p = write_scenario(tmp_path, foliation="backward", t0=-2.0, t1=2.0)
        with pytest.raises(ScenarioError, match="outside foliation validity"):
            load_scenario(p)

    def test_missing_file(self):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario("/nonexistent/path.toml")

    def test_missing_foliation_name(self, tmp_path):
        p = write_scenario(tmp_path)
        p.write_text(p.read_text().replace('name = "appendix_f"\n', ""))
        with pytest.raises(ScenarioError, match="missing 'name'"):
            load_scenario(p)

    def test_custom_tabulated_foliation(self):
        tg = np.linspace(-1, 1, 21).tolist()
        xg = np.linspace(-4, 4, 21).tolist()
        vals = [[t for _ in xg] for t in tg]
        spec = build_foliation({"name": "custom-tabulated", "t_grid": tg,
                                "x_grid": xg, "values": vals})
        assert spec.name == "custom-tabulated"
        assert float(spec.f(0.4, 1.0)) == pytest.approx(0.4, abs=1e-10)


class TestExitCodes:
    def test_validate_pass(self, tmp_path):
        p = write_scenario(tmp_path)
        assert cli.main(["validate", "--scenario", str(p),
                         "--out", str(tmp_path / "o")]) == 0

    def test_validate_superluminal_tabulated(self, tmp_path):
        tg = np.linspace(-1, 1, 9)
        xg = np.linspace(-3, 3, 9)
        rows = ",\n".join("[" + ", ".join(f"{t + 2*x:.6f}" for x in xg) + "]"
                          for t in tg)
        p = write_scenario(tmp_path, extra="")
        text = p.read_text().replace(
            'name = "appendix_f"',
            'name = "custom-tabulated"\n'
            f"t_grid = {list(tg)}\n"
            f"x_grid = {list(xg)}\n"
            f"values = [{rows}]\n").replace(
            "x = [[-14.0, 14.0], [-14.0, 14.0]]",
            "x = [[-2.0, 2.0], [-2.0, 2.0]]").replace(
            "t0 = -2.0", "t0 = -0.5").replace("t1 = 2.0", "t1 = 0.5")
        p.write_text(text)
        assert cli.main(["validate", "--scenario", str(p),
                         "--out", str(tmp_path / "o")]) == 2

    def test_missing_scenario_is_usage_error(self, tmp_path):
        assert cli.main(["validate", "--scenario", str(tmp_path / "nope.toml"),
                         "--out", str(tmp_path / "o")]) == 2

    def test_bad_usage(self):
        assert cli.main(["equivariance"]) == 2
        assert cli.main(["frobnicate", "--scenario", "x"]) == 2

    def test_zero_ensemble_usage_error(self, tmp_path):
        p = write_scenario(tmp_path, m=0)
        assert cli.main(["equivariance", "--scenario", str(p),
                         "--out", str(tmp_path / "o")]) == 2

    def test_equivariance_pass_and_negative_control(self, tmp_path):
        p = write_scenario(tmp_path, m=400, h=0.05)
        out = tmp_path / "run"
        assert cli.main(["equivariance", "--scenario", str(p),
                         "--out", str(out), "--threads", "2"]) == 0
        manifest = json.loads((out / "equivariance_manifest.json").read_text())
        assert manifest["exit_code"] == 0
        assert manifest["gates"]["ks"]["pass"] is True
        out_bad = tmp_path / "run_bad"
        assert cli.main(["equivariance", "--scenario", str(p),
                         "--out", str(out_bad), "--threads", "2",
                         "--debug-velocity-scale", "1.5"]) == 1

    def test_csv_outputs_reproducible(self, tmp_path):
        p = write_scenario(tmp_path, m=150)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert cli.main(["equivariance", "--scenario", str(p), "--out", str(out1)]) == 0
        assert cli.main(["equivariance", "--scenario", str(p), "--out", str(out2)]) == 0
        csv1 = (out1 / "equivariance_report.csv").read_bytes()
        csv2 = (out2 / "equivariance_report.csv").read_bytes()
        assert csv1 == csv2


class TestWorldlinesCommand:
    def test_outputs_and_kinks(self, tmp_path):
        p = write_scenario(tmp_path)
        out = tmp_path / "wl"
        assert cli.main(["worldlines", "--scenario", str(p), "--out", str(out)]) == 0
        csv_text = (out / "worldlines.csv").read_text()
        assert csv_text.splitlines()[0] == "t,k,x0,x1,v0,v1,on_plateau,event"
        assert "kink angle=" in csv_text
        svg = (out / "worldlines.svg").read_text()
        assert svg.startswith("<svg ") and "manifest:sha256=" in svg

    def test_product_state_no_kink_rows(self, tmp_path):
        p = write_scenario(tmp_path)
        text = p.read_text()
        # drop the second term -> product state
        head, _, _ = text.partition("[[wave.terms]]\ncoeff = [0.5, 0.3]")
        p.write_text(head + "\n[windows]" + text.split("[windows]", 1)[1])
        out = tmp_path / "wl"
        assert cli.main(["worldlines", "--scenario", str(p), "--out", str(out)]) == 0
        assert "kink" not in (out / "worldlines.csv").read_text()

    def test_backward_scenario_worldlines(self, tmp_path):
        out = tmp_path / "bw"
        assert cli.main(["worldlines", "--scenario",
                         str(SCENARIOS / "backward.toml"), "--out", str(out)]) == 0
        assert (out / "worldlines.svg").exists()

    def test_ensemble_dump(self, tmp_path):
        p = write_scenario(tmp_path, m=40, extra="[outputs]\ndump_ensemble = true\n")
        out = tmp_path / "dump"
        assert cli.main(["equivariance", "--scenario", str(p), "--out", str(out)]) == 0
        lines = (out / "ensemble.csv").read_text().splitlines()
        assert lines[0] == "t,k,x0,x1"
        assert len(lines) == 1 + 40 * 2

    def test_worldlines_reproducible(self, tmp_path):
        p = write_scenario(tmp_path)
        out1, out2 = tmp_path / "w1", tmp_path / "w2"
        cli.main(["worldlines", "--scenario", str(p), "--out", str(out1)])
        cli.main(["worldlines", "--scenario", str(p), "--out", str(out2)])
        assert (out1 / "worldlines.csv").read_bytes() == \
               (out2 / "worldlines.csv").read_bytes()
        assert (out1 / "worldlines.svg").read_bytes() == \
               (out2 / "worldlines.svg").read_bytes()


class TestPlotsCommand:
    def test_all_figures_written(self, tmp_path):
        p = write_scenario(tmp_path)
        out = tmp_path / "figs"
        assert cli.main(["plots", "--scenario", str(p), "--out", str(out),
                         "--which", "all"]) == 0
        names = {f.name for f in out.iterdir()}
        assert {"plot_g.svg", "plot_f.svg", "plot_foliation.svg",
                "plot_surface_c_x2_-2.svg", "plot_surface_c_x2_+3.svg"} <= names

    def test_g_curve_saturates(self, tmp_path):
        p = write_scenario(tmp_path)
        out = tmp_path / "figs"
        cli.main(["plots", "--scenario", str(p), "--out", str(out), "--which", "g"])
        svg = (out / "plot_g.svg").read_text()
        assert "polyline" in svg

    def test_mesh_csv_schema(self, tmp_path):
        p = write_scenario(tmp_path)
        out = tmp_path / "figs"
        cli.main(["plots", "--scenario", str(p), "--out", str(out),
                  "--which", "surface-c"])
        lines = (out / "surface_c_x2_-2.csv").read_text().splitlines()
        assert lines[0] == "t,x1,x0_1,x0_2"
        assert all(len(line.split(",")) == 4 for line in lines[1:])


class TestManifests:
    def test_manifest_contains_hashes_and_versions(self, tmp_path):
        p = write_scenario(tmp_path)
        out = tmp_path / "o"
        cli.main(["validate", "--scenario", str(p), "--out", str(out)])
        doc = json.loads((out / "validate_manifest.json").read_text())
        assert len(doc["scenario_sha256"]) == 64
        assert len(doc["manifest_sha256"]) == 64
        assert doc["versions"]["bohmdirac"]
        assert doc["exit_code"] == 0
