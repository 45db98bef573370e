"""End-to-end command-line checks: every subcommand, exit codes,
embedded configs, and byte-level determinism."""

import json

import numpy as np
import pytest

from kerndiv.cli import argv_from_config, main
from kerndiv.dataio import read_samples, toy_paths, write_samples
from kerndiv.divergence import mmd_standard
from kerndiv.kernel import KernelSpec, SampleSet, gram_matrix, median_heuristic


def run(*argv):
    return main([str(a) for a in argv])


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def toy():
    return toy_paths()


class TestDivergenceCmd:
    def test_mmd_matches_library_on_bundled_toy(self, toy, tmp_path):
        out = tmp_path / "r.json"
        assert run("divergence", "--p", toy["p"], "--q", toy["q"],
                   "--measure", "mmd", "--out", out) == 0
        blob = load(out)
        p = read_samples(toy["p"])
        q = read_samples(toy["q"])
        pooled = SampleSet(data=np.vstack([p.data, q.data]))
        spec = KernelSpec(family="gaussian", bandwidth=median_heuristic(pooled))
        expected = mmd_standard(gram_matrix(spec, pooled), p.n, q.n)
        assert blob["measures"]["mmd"]["value"] == expected
        assert blob["bandwidth"] == spec.bandwidth
        assert blob["seed"] == blob["config"]["seed"]

    def test_same_file_both_groups_mmd_is_zero(self, toy, tmp_path):
        out = tmp_path / "r.json"
        assert run("divergence", "--p", toy["p"], "--q", toy["p"],
                   "--measure", "mmd", "--out", out) == 0
        assert load(out)["measures"]["mmd"]["value"] == 0.0

    def test_same_file_projected_measure_reports_degenerate(self, toy, tmp_path, capsys):
        rc = run("divergence", "--p", toy["p"], "--q", toy["p"],
                 "--measure", "kd", "--out", tmp_path / "r.json")
        assert rc == 2
        assert "indistinguishable" in capsys.readouterr().err

    def test_labeled_single_file_equals_two_files(self, toy, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        common = ["--measure", "mmd+bkd", "--out"]
        assert run("divergence", "--data", toy["labeled"], *common, a) == 0
        assert run("divergence", "--p", toy["p"], "--q", toy["q"], *common, b) == 0
        assert load(a)["measures"] == load(b)["measures"]

    def test_intermediate_quantities_present(self, toy, tmp_path):
        out = tmp_path / "r.json"
        assert run("divergence", "--data", toy["labeled"], "--measure", "mmd+bkd",
                   "--out", out) == 0
        blob = load(out)
        proj = blob["projection"]
        assert proj["method"] == "means"
        assert proj["t"] > 0
        for key in ("mu_p", "mu_q", "sigma_p", "sigma_q"):
            assert key in proj
        bkd = blob["measures"]["bkd"]
        assert bkd["details"]["B"] > 0
        assert 0 < bkd["details"]["S"] < 0.5
        assert set(blob["measures"]) == {"mmd", "bkd"}

    def test_malformed_csv_exit_2_with_location(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n3.0,oops\n")
        other = tmp_path / "ok.csv"
        other.write_text("1.0,2.0\n1.5,2.5\n")
        rc = run("divergence", "--p", bad, "--q", other, "--measure", "mmd",
                 "--out", tmp_path / "r.json")
        assert rc == 2
        err = capsys.readouterr().err
        assert "line 2" in err and "column 2" in err

    def test_usage_errors_exit_1(self, toy, tmp_path, capsys):
        # bad measure token
        assert run("divergence", "--p", toy["p"], "--q", toy["q"],
                   "--measure", "frobnitz", "--out", tmp_path / "r.json") == 1
        # missing inputs entirely
        assert run("divergence", "--out", tmp_path / "r.json") == 1
        # --data together with --p
        assert run("divergence", "--data", toy["labeled"], "--p", toy["p"],
                   "--measure", "mmd", "--out", tmp_path / "r.json") == 1
        capsys.readouterr()

    def test_repeat_is_byte_identical(self, toy, tmp_path):
        out = tmp_path / "r.json"
        args = ("divergence", "--data", toy["labeled"], "--measure", "mmd+kd",
                "--concave", "poly:2", "--density", "hist:8", "--out", out)
        assert run(*args) == 0
        first = out.read_bytes()
        assert run(*args) == 0
        assert out.read_bytes() == first


class TestTestCmd:
    def test_combined_nn_schema(self, toy, tmp_path):
        out = tmp_path / "t.json"
        assert run("test", "--data", toy["labeled"], "--measure", "mmd+bkd",
                   "--combiner", "nn", "--iterations", 30, "--alpha", 0.1,
                   "--out", out) == 0
        blob = load(out)
        assert set(blob["statistic"]) == {"MMD", "BKD"}
        assert blob["null_model"]["kind"] == "nn"
        assert blob["decision"] in ("RejectNull", "FailToReject")
        assert blob["alpha"] == 0.1
        assert blob["config"]["iterations"] == 30
        assert blob["seed"] == blob["config"]["seed"]

    def test_single_measure_uses_quantile_threshold(self, toy, tmp_path):
        out = tmp_path / "t.json"
        assert run("test", "--data", toy["labeled"], "--measure", "kd",
                   "--iterations", 25, "--out", out) == 0
        blob = load(out)
        assert blob["null_model"]["kind"] == "quantile"
        assert set(blob["statistic"]) == {"KD"}

    def test_repeat_is_byte_identical(self, toy, tmp_path):
        out = tmp_path / "t.json"
        args = ("test", "--data", toy["labeled"], "--measure", "mmd+kd",
                "--iterations", 20, "--out", out)
        assert run(*args) == 0
        first = out.read_bytes()
        assert run(*args) == 0
        assert out.read_bytes() == first

    def test_rerun_from_embedded_config(self, toy, tmp_path):
        out = tmp_path / "t.json"
        assert run("test", "--data", toy["labeled"], "--measure", "mmd+bkd",
                   "--iterations", 20, "--seed", 321, "--out", out) == 0
        first = out.read_bytes()
        argv = argv_from_config(load(out)["config"])
        assert main(argv) == 0
        assert out.read_bytes() == first


class TestReproduceCmd:
    def test_gauss_table_schema_and_csv(self, tmp_path):
        out, csv_path = tmp_path / "g.json", tmp_path / "g.csv"
        assert run("reproduce", "gauss-table6", "--reps", 2, "--iterations", 10,
                   "--n-per-group", 10, "--dim", 3, "--out", out, "--csv", csv_path) == 0
        blob = load(out)
        assert set(blob["scenarios"]) == {"variance", "mean"}
        labels = {"mmd", "kd", "bkd", "mmd+kd", "mmd+bkd"}
        for scen in blob["scenarios"].values():
            assert set(scen["rates"]) == labels
            for cell in scen["rates"].values():
                assert cell["reject"] + cell["fail"] == 2
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "scenario,measure,type2_percent,reject_percent"
        assert len(lines) == 11

    def test_parallel_run_byte_identical(self, tmp_path):
        # --jobs is an execution detail, not part of the run config, so
        # the emitted report must not depend on it
        out = tmp_path / "g.json"
        base = ("reproduce", "gauss-table6", "--reps", 3, "--iterations", 10,
                "--n-per-group", 10, "--dim", 3, "--out", out)
        assert run(*base, "--jobs", 1) == 0
        first = out.read_bytes()
        assert run(*base, "--jobs", 2) == 0
        assert out.read_bytes() == first

    def test_featsel_smoke(self, tmp_path):
        out, csv_path = tmp_path / "f.json", tmp_path / "f.csv"
        assert run("reproduce", "featsel", "--reps", 1, "--folds", 2,
                   "--n-per-class", 15, "--concave-list", "exp,poly:4",
                   "--scales", "0.1", "--fractions", "0.25",
                   "--out", out, "--csv", csv_path) == 0
        blob = load(out)
        ranks = blob["report"]["average_rank"]
        assert set(ranks) == {"exp", "poly:4"}
        for v in ranks.values():
            assert 1.0 <= v <= 2.0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "method,average_rank"
        assert len(lines) == 3


class TestConcaveCmd:
    def test_poly0_coefficients(self, tmp_path):
        out = tmp_path / "c.json"
        assert run("concave", "poly:0", "--out", out) == 0
        blob = load(out)
        assert blob["name"] == "poly:0"
        assert blob["parameters"]["coefficients"] == [2.0, -2.0]
        assert blob["validation"]["passed"] is True

    def test_poly4_exact_constants(self, tmp_path):
        out = tmp_path / "c.json"
        assert run("concave", "poly:4", "--out", out) == 0
        params = load(out)["parameters"]
        assert params["k1_exact"] == "1/1260"
        assert params["k2_exact"] == "322560/193"

    def test_exp_curve_peaks_at_half(self, tmp_path):
        out = tmp_path / "c.json"
        assert run("concave", "exp", "--grid", 101, "--out", out) == 0
        blob = load(out)
        curve = blob["curve"]
        values = curve["value"]
        assert max(values) == pytest.approx(0.5, abs=1e-9)
        assert values.index(max(values)) == 50
        assert blob["validation"]["passed"] is True

    def test_invalid_kind_exit_1(self, tmp_path, capsys):
        assert run("concave", "frob", "--out", tmp_path / "c.json") == 1
        assert "poly:N" in capsys.readouterr().err


class TestRankFeaturesCmd:
    def test_ranks_separating_feature_first(self, tmp_path):
        rng = np.random.default_rng(5)
        n = 40
        data = rng.standard_normal((n, 3))
        data[: n // 2, 1] += 25.0
        group = np.array(["P"] * (n // 2) + ["Q"] * (n // 2))
        path = tmp_path / "d.csv"
        write_samples(path, SampleSet(data=data, group=group))
        out, csv_path = tmp_path / "r.json", tmp_path / "r.csv"
        assert run("rank-features", "--data", path, "--concave", "poly:4",
                   "--out", out, "--csv", csv_path) == 0
        blob = load(out)
        features = blob["report"]["features"]
        assert features[1]["rank"] == 1
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "feature,risk,rank"
        assert len(lines) == 4

    def test_unlabeled_input_is_data_error(self, tmp_path, capsys):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,4.0\n")
        rc = run("rank-features", "--data", path, "--out", tmp_path / "r.json")
        assert rc == 2
        assert "group" in capsys.readouterr().err
