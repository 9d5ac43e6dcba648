import json

import pytest

from migimpact.cli import FULL_MATRIX_REQUIRED, run


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_indices_two_zone(capsys, fixtures):
    code, out, _ = call(capsys, "indices", "--zones", fixtures / "two_zone_zones.csv",
                        "--flows", fixtures / "two_zone_flows.csv")
    assert code == 0
    rep = json.loads(out)
    assert rep["cmi"] == 7.0 and rep["anmr"] == 3.0
    assert rep["mei"] == pytest.approx(42.857142857142854, rel=1e-15)
    assert rep["rates"][1] == {"zone_id": "B", "nmr_percent": 6.0, "net_persons": 6.0}


def test_indices_marginals_flag(capsys, fixtures):
    code, out, _ = call(capsys, "indices", "--zones", fixtures / "two_zone_zones.csv",
                        "--marginals", fixtures / "two_zone_marginals.csv")
    assert code == 0 and json.loads(out)["cmi"] == 7.0


def test_inmi_rejects_marginals(capsys, fixtures, tmp_path):
    code, _, err = call(capsys, "inmi", "--zones", fixtures / "two_zone_zones.csv",
                        "--flows", fixtures / "two_zone_marginals.csv",
                        "--adjacency", fixtures / "grid_adjacency.csv",
                        "--benchmark", fixtures / "benchmark.json", "--out", tmp_path / "o")
    assert code == 1
    assert FULL_MATRIX_REQUIRED in err
    assert not (tmp_path / "o").exists()


def test_regress_balanced(capsys, fixtures, tmp_path):
    code, out, _ = call(capsys, "regress", "--zones", fixtures / "balanced_zones.csv",
                        "--flows", fixtures / "balanced_flows.csv", "--out", tmp_path)
    assert code == 0
    rep = json.loads(out)
    assert rep["regime"] == "SpatialEquilibrium" and rep["slope"] == 0.0
    assert (tmp_path / "regression.json").read_text() == out


def test_regress_grid_writes_zscores(capsys, fixtures, tmp_path):
    code, out, _ = call(capsys, "regress", "--zones", fixtures / "grid_zones.csv",
                        "--flows", fixtures / "grid_flows.csv", "--variant", "raw", "--out", tmp_path)
    assert code == 0
    assert json.loads(out)["variant"] == "raw"
    lines = (tmp_path / "zscores.csv").read_text().splitlines()
    assert lines[0] == "zone_id,nmr_percent,z,bin" and len(lines) == 37


def test_validate(capsys, fixtures):
    code, out, _ = call(capsys, "validate", "--zones", fixtures / "grid_zones.csv",
                        "--flows", fixtures / "grid_flows.csv", "--adjacency", fixtures / "grid_adjacency.csv")
    rep = json.loads(out)
    assert code == 0 and rep["n_zones"] == 36 and rep["n_edges"] == 60 and rep["flow_variant"] == "FullMatrix"


def test_profile_and_inmi(capsys, fixtures, tmp_path):
    common = ["--zones", fixtures / "grid_zones.csv", "--flows", fixtures / "grid_flows.csv",
              "--adjacency", fixtures / "grid_adjacency.csv", "--samples", 5, "--seed", 3]
    code, out, _ = call(capsys, "profile", *common, "--out", tmp_path)
    assert code == 0
    summary = json.loads(out)
    assert summary["ladder"][-1] == 36 and summary["samples_per_scale"] == 5
    code, out, _ = call(capsys, "inmi", *common, "--benchmark", fixtures / "benchmark.json", "--label", "GRID")
    rep = json.loads(out)
    assert code == 0
    assert rep["inmi"] == rep["C"] * rep["R"]
    assert rep["cmi_slope"] == pytest.approx(summary["cmi_slope"], rel=1e-15)


def test_cluster(capsys, fixtures, tmp_path):
    code, _, _ = call(capsys, "cluster", "--summaries", fixtures / "summaries.csv",
                      "--benchmark", fixtures / "benchmark.json", "--evaluate", "3,4,5", "--out", tmp_path)
    assert code == 0
    rows = (tmp_path / "clusters.csv").read_text().splitlines()
    assert rows[0] == "label,C,R,inmi,cluster"
    clusters = {}
    for r in rows[1:]:
        lab, *_, g = r.split(",")
        clusters.setdefault(lab[:2], set()).add(g)
    assert all(len(v) == 1 for v in clusters.values())
    assert len({next(iter(v)) for v in clusters.values()}) == 4
    assert (tmp_path / "k_diagnostics.csv").read_text().startswith("k,inertia,silhouette\n3,")


def test_timeseries(capsys, fixtures):
    code, out, _ = call(capsys, "timeseries", "--zones", fixtures / "grid_zones.csv", "--variant", "raw",
                        "--year-flows", f"2012={fixtures / 'grid_flows_2.csv'}",
                        "--year-flows", f"2011={fixtures / 'grid_flows.csv'}")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "year,slope,robust_se,p,adj_r2,regime"
    y1, y2 = (float(l.split(",")[1]) for l in lines[1:])
    assert [l.split(",")[0] for l in lines[1:]] == ["2011", "2012"]
    assert y2 == -y1


@pytest.mark.parametrize("argv, needle", [
    (["indices", "--zones", "missing.csv", "--flows", "x.csv"], "--zones"),
    (["indices", "--zones"], "--zones"),
    (["bogus"], "invalid choice"),
    (["cluster", "--summaries", "s.csv", "--benchmark", "b.json", "--k", "0"], "--k"),
])
def test_usage_errors(capsys, argv, needle):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert needle in err


def test_validation_error_cites_file_line_rule(capsys, fixtures, tmp_path):
    bad = tmp_path / "flows.csv"
    bad.write_text("origin,destination,count\nA,B,1\nA,B,2\n")
    code, _, err = call(capsys, "indices", "--zones", fixtures / "two_zone_zones.csv", "--flows", bad,
                        "--out", tmp_path / "out")
    assert code == 1
    assert f"{bad}:3" in err and "unique-pair" in err
    assert not (tmp_path / "out").exists()
