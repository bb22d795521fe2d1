import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ortho_lens.cli import run
from ortho_lens.independence import EmbeddingTable, UndirectedGraph, write_graph
from ortho_lens.io import save_table


def ok(argv):
    code, report = run(argv)
    assert code == 0
    return report["results"]


@pytest.fixture
def planted(tmp_path):
    path = tmp_path / "planted.txt"
    info = ok(["synth", "planted", "--seed", "7", "--table-out", str(path), "--output", str(tmp_path / "s.json")])
    return path, info


@pytest.fixture
def categories(tmp_path):
    table, cats = tmp_path / "cats.txt", tmp_path / "cats.json"
    ok(["synth", "categories", "--seed", "7", "--table-out", str(table), "--categories-out", str(cats),
        "--output", str(tmp_path / "s.json")])
    return table, cats


@pytest.fixture
def path_graph(tmp_path):
    p = tmp_path / "path.graph"
    write_graph(UndirectedGraph.path(3), p)
    return p


def test_planted_members_recovered(planted):
    path, info = planted
    res = ok(["gmb", "--input", str(path), "--target", "target", "--seed", "7", "--dr", "5"])
    assert sorted(res["targets"][0]["members"]) == sorted(info["planted"])
    assert abs(res["targets"][0]["cbar"]) <= 0.02


def test_sweep_median_nonincreasing(planted):
    path, _ = planted
    res = ok(["gmb", "--input", str(path), "--target", "target", "--seed", "7", "--dr", "5", "--sweep-k", "1..10"])
    med = [row["median_best_abs_cbar"] for row in res["sweep"]]
    assert [row["K"] for row in res["sweep"]] == list(range(1, 11))
    assert all(b <= a for a, b in zip(med, med[1:]))


@pytest.mark.parametrize("argv", [
    ["gmb", "--target", "target", "--seed", "3", "--sweep-k", "1..4", "--dr", "5"],
    ["rank", "--target", "target", "--seed", "3"],
    ["mb-exact", "--target", "target", "--max-size", "1", "--guard", "64"],
])
def test_byte_identical_reports(planted, tmp_path, argv):
    path, _ = planted
    outs = []
    out = tmp_path / "r.json"
    for _ in range(2):
        assert run(argv + ["--input", str(path), "--output", str(out)])[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_condition_matrix_deterministic(categories, tmp_path):
    table, cats = categories
    outs = []
    out = tmp_path / "m.json"
    for _ in range(2):
        run(["condition-matrix", "--input", str(table), "--categories", str(cats), "--seed", "5",
             "--null-samples", "500", "--output", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_timing_is_opt_in(planted):
    path, _ = planted
    code, report = run(["rank", "--input", str(path), "--target", "target", "--timing", "--output", "/dev/null"])
    assert code == 0 and report["wall_clock_seconds"] >= 0
    code, report = run(["rank", "--input", str(path), "--target", "target", "--output", "/dev/null"])
    assert "wall_clock_seconds" not in report


def test_exit_codes(planted, tmp_path, capsys):
    path, _ = planted
    assert run(["gmb", "--input", str(path), "--target", "nobody"])[0] == 2
    assert run(["gmb", "--input", str(tmp_path / "missing.txt"), "--target", "x"])[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("a\t1 nan\n")
    assert run(["rank", "--input", str(bad), "--target", "a"])[0] == 2
    assert run(["gmb", "--input", str(path), "--target", "target", "--topk", "21"])[0] == 3
    assert run(["mb-exact", "--input", str(path), "--target", "target"])[0] == 3
    assert "refused" in capsys.readouterr().err


def test_console_script_exit_codes(planted):
    path, _ = planted
    base = [sys.executable, "-m", "ortho_lens.cli"]
    assert subprocess.run(base + ["gmb", "--input", str(path), "--target", "nobody"],
                          capture_output=True).returncode == 2
    assert subprocess.run(base + ["mb-exact", "--input", str(path), "--target", "target"],
                          capture_output=True).returncode == 3
    done = subprocess.run(base + ["rank", "--input", str(path), "--target", "target", "--nr", "1", "--dr", "0"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and json.loads(done.stdout)["command"] == "rank"


def test_text_and_binary_inputs_agree(planted, tmp_path):
    path, _ = planted
    binary = tmp_path / "planted.bin"
    ok(["synth", "planted", "--seed", "7", "--format", "binary", "--table-out", str(binary),
        "--output", str(tmp_path / "s.json")])
    a = ok(["gmb", "--input", str(path), "--target", "target", "--dr", "5"])
    b = ok(["gmb", "--input", str(binary), "--target", "target", "--dr", "5"])
    assert a == b


def test_condition_matrix_diagonal_dominates(categories):
    table, cats = categories
    z = ok(["condition-matrix", "--input", str(table), "--categories", str(cats), "--null-samples", "2000"])["z_matrix"]
    for i, row in enumerate(z):
        assert row[i] > max(x for j, x in enumerate(row) if j != i)


def test_condition_matrix_orthogonal_and_repeated(tmp_path):
    rng = np.random.default_rng(3)
    vecs = np.zeros((9, 6))
    vecs[0, 0] = 1.0  # condition orthogonal to every member
    vecs[1:, 1:] = rng.standard_normal((8, 5))
    t = EmbeddingTable.from_vectors(vecs)
    save_table(t, tmp_path / "t.txt")
    cats = {
        "orth": {"condition": "v0", "members": ["v1", "v2", "v3", "v4"]},
        "copy": {"condition": "v0", "members": ["v1", "v2", "v3", "v4"]},
        "v5": ["v5", "v6", "v7", "v8"],
    }
    (tmp_path / "c.json").write_text(json.dumps(cats))
    res = ok(["condition-matrix", "--input", str(tmp_path / "t.txt"), "--categories", str(tmp_path / "c.json"),
              "--null-samples", "300"])
    assert abs(res["raw_reduction"][0][0]) <= 1e-6
    np.testing.assert_allclose(res["raw_reduction"][0], res["raw_reduction"][1], atol=1e-9)
    # every null pair is orthogonal to the condition too, so the null has no spread
    assert res["null"][0]["std"] <= 1e-12
    assert res["z_matrix"][0] == res["z_matrix"][1]


def test_condition_matrix_missing_label(categories, tmp_path):
    table, _ = categories
    (tmp_path / "c.json").write_text(json.dumps({"cat0": ["cat0_m0", "ghost"]}))
    code, _ = run(["condition-matrix", "--input", str(table), "--categories", str(tmp_path / "c.json")])
    assert code == 2


def test_rank_without_projection_is_raw_order(planted):
    path, _ = planted
    t = ok(["rank", "--input", str(path), "--target", "target", "--nr", "1", "--dr", "0"])["targets"][0]
    assert [x["label"] for x in t["before_projection"]] == [x["label"] for x in t["after_projection"]]


def test_rank_tied_overtakes_decoy(tmp_path):
    wins = 0
    for seed in range(50):
        path = tmp_path / "r.txt"
        ok(["synth", "ranking", "--seed", str(seed), "--table-out", str(path), "--output", str(tmp_path / "s.json")])
        t = ok(["rank", "--input", str(path), "--target", "target", "--nr", "10", "--dr", "10",
                "--seed", str(seed), "--topk", "62"])["targets"][0]
        before = [x["label"] for x in t["before_projection"]]
        after = [x["label"] for x in t["after_projection"]]
        wins += before.index("decoy") < before.index("tied") and after.index("tied") < after.index("decoy")
    assert wins >= 40


def test_angles_trivial_cases(tmp_path):
    t = EmbeddingTable.from_vectors(np.eye(5))
    save_table(t, tmp_path / "e.txt")
    sub = ok(["angles", "--input", str(tmp_path / "e.txt"), "--boundary", "v0,v1", "--reference", "v1",
              "--random-baselines", "5"])
    assert sub["smallest_angle"] == pytest.approx(0.0, abs=1e-12)
    orth = ok(["angles", "--input", str(tmp_path / "e.txt"), "--boundary", "v0,v1", "--reference", "v2,v3",
               "--random-baselines", "5"])
    assert orth["angles"] == pytest.approx([math.pi / 2] * 2, abs=1e-12)


def test_angles_probe_below_baseline(tmp_path):
    path = tmp_path / "a.txt"
    info = ok(["synth", "angles", "--seed", "7", "--table-out", str(path), "--output", str(tmp_path / "s.json")])
    res = ok(["angles", "--input", str(path), "--boundary", ",".join(info["boundary"]),
              "--reference", ",".join(info["reference"])])
    assert res["baseline"]["count"] == 50
    assert res["smallest_angle"] < res["baseline"]["percentile_5"]


def test_mb_exact_report(tmp_path):
    vecs = np.array([[1.0, 0, 0], [1.0, 1, 0], [0, 1.0, 0], [0, 0, 1.0]])
    save_table(EmbeddingTable.from_vectors(vecs), tmp_path / "t.txt")
    res = ok(["mb-exact", "--input", str(tmp_path / "t.txt"), "--target", "v0", "--no-normalize"])["targets"][0]
    assert sorted(map(sorted, res["boundaries"])) == [["v1", "v2"]]
    assert res["projection_spread"] == pytest.approx(0.0, abs=1e-12)


def test_axioms_on_graph_and_dependent_table(tmp_path, path_graph):
    res = ok(["axioms", "--graph", str(path_graph)])
    assert res["exhaustive"] and sum(res["violation_counts"].values()) == 0
    vecs = np.array([[1.0, 0], [1.0, 0], [1.0, 0], [0, 1.0]])
    save_table(EmbeddingTable.from_vectors(vecs), tmp_path / "t.txt")
    res = ok(["axioms", "--input", str(tmp_path / "t.txt"), "--axioms", "A5"])
    assert res["violation_counts"]["A5"] >= 1


def test_ipe_build_check_reduce(tmp_path, path_graph):
    map_path = tmp_path / "map.bin"
    built = ok(["ipe-build", "--graph", str(path_graph), "--epsilon", "0.5", "--map-out", str(map_path)])
    assert built["perfect"]
    np.testing.assert_allclose(built["gram"], [[1.5, -1, 0.5], [-1, 2, -1], [0.5, -1, 1.5]], atol=1e-10)
    assert map_path.read_bytes()[:8] == b"OLNS0001"
    check = ok(["ipe-check", "--graph", str(path_graph), "--input", str(map_path), "--no-normalize"])
    assert check["faithful"] and check["mismatch_count"] == 0 and check["checked"] == 6
    bypass = ok(["ipe-reduce", "--graph", str(path_graph), "--perturbation", "0.5", "--bypass-identity"])
    assert bypass["max_residual_inner_product"] <= 1e-8
    capped = ok(["ipe-reduce", "--graph", str(path_graph), "--perturbation", "0.5", "--cap-k", "12"])
    assert capped["capped"] and capped["best_effort"] and capped["k_used"] == 12


def test_ipe_reduce_from_file_uses_exact_boundaries(tmp_path):
    g = tmp_path / "edgeless.graph"
    write_graph(UndirectedGraph(8), g)
    map_path = tmp_path / "map.bin"
    ok(["ipe-build", "--graph", str(g), "--epsilon", "0.2", "--map-out", str(map_path)])
    res = ok(["ipe-reduce", "--input", str(map_path), "--epsilon", "0.75", "--no-normalize"])
    assert res["boundary_source"] == "exact enumeration"
    assert res["plan"]["k"] == 222 and res["plan"]["epsilon_prime"] == 0.5


def test_ipe_build_rejects_indefinite(path_graph):
    assert run(["ipe-build", "--graph", str(path_graph), "--epsilon", "0.9"])[0] == 2
