"""CLI contract: subcommands, exit codes, reproducible outputs."""

import json
from fractions import Fraction

from chaoslab import cli, hermite
from chaoslab.exact import EC
from chaoslab.hermite import BiPoly
from chaoslab.tensor import ComplexKernel, dump_kernel


def run_cli(*argv):
    return cli.main(list(argv))


class TestIdentities:
    def test_passing_run(self, tmp_path, capsys):
        assert run_cli("identities", "--max-degree", "3", "--out", str(tmp_path)) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") >= 10 and "FAIL" not in out
        report = (tmp_path / "identities_report.csv").read_text()
        assert "conversion-roundtrip,pass" in report
        assert (tmp_path / "table_complex_to_real_n2.csv").exists()
        assert (tmp_path / "table_real_to_complex_n3.csv").exists()

    def test_json_format(self, tmp_path):
        assert run_cli("identities", "--max-degree", "2", "--out", str(tmp_path),
                       "--format", "json") == 0
        doc = json.loads((tmp_path / "identities_report.json").read_text())
        assert all(r["status"] == "pass" for r in doc["results"])

    def test_degree_budget(self, tmp_path):
        assert run_cli("identities", "--max-degree", "9", "--out", str(tmp_path)) == 64

    def test_bad_arguments(self, tmp_path):
        assert run_cli("identities", "--out", str(tmp_path)) == 64
        assert run_cli("frobnicate") == 64

    def test_tampered_coefficient_fails_with_name(self, tmp_path, capsys,
                                                  monkeypatch):
        real = hermite.complex_hermite

        def tampered(idx, n=None, rho=Fraction(2)):
            p = real(idx, n, rho)
            if isinstance(idx, int) and (idx, n) == (2, 1):
                return p + BiPoly({(1, 0): 1})  # corrupt one coefficient
            return p

        monkeypatch.setattr("chaoslab.hermite.complex_hermite", tampered)
        code = run_cli("identities", "--max-degree", "3", "--out", str(tmp_path))
        assert code == 2
        captured = capsys.readouterr()
        assert "identity suite failed" in captured.err
        report = (tmp_path / "identities_report.csv").read_text()
        assert ",fail," in report


class TestOracle:
    def test_fourth_absolute_moment(self, tmp_path, capsys):
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(
            {"complex_dim": 1,
             "terms": [{"coeff": "1", "factors": [{"zpow": [2, 2], "var": 0}]}]}))
        assert run_cli("oracle", str(path)) == 0
        assert capsys.readouterr().out.strip() == "8"

    def test_centered_chaos_vanishes(self, tmp_path, capsys):
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(
            {"terms": [{"factors": [{"j": [1, 1], "var": 0}]}]}))
        assert run_cli("oracle", str(path)) == 0
        assert capsys.readouterr().out.strip() == "0"

    def test_conjugated_factor_and_coefficients(self, tmp_path, capsys):
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(
            {"terms": [{"coeff": ["1/2", "0"],
                        "factors": [{"j": [1, 2], "var": 0},
                                    {"j": [1, 2], "var": 0, "conj": True}]}]}))
        assert run_cli("oracle", str(path)) == 0
        assert capsys.readouterr().out.strip() == "8"

    def test_gram_matrix_input(self, tmp_path, capsys):
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(
            {"complex_dim": 2,
             "gram": [["2", "0"], ["0", "2"]],
             "terms": [{"factors": [{"zpow": [1, 0], "var": 0},
                                    {"zpow": [0, 1], "var": 1}]}]}))
        assert run_cli("oracle", str(path)) == 0
        assert capsys.readouterr().out.strip() == "0"

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "expr.json"
        path.write_text("{not json")
        assert run_cli("oracle", str(path)) == 65

    def test_missing_file(self, tmp_path):
        assert run_cli("oracle", str(tmp_path / "nope.json")) == 65

    def test_degree_budget_violation(self, tmp_path):
        path = tmp_path / "expr.json"
        path.write_text(json.dumps(
            {"terms": [{"factors": [{"zpow": [9, 9], "var": 0}]}]}))
        assert run_cli("oracle", str(path)) == 64


BASE_CONFIG = {
    "seed": 7,
    "n_samples": 4000,
    "kernel": {"block": {"m": 1, "n": 2}},
    "k_values": [2, 4],
    "criterion": {"case": "gaussian-offdiag", "sigma2": 2.0, "m": 1, "n": 2},
    "exact_reference": True,
}


class TestExperiment:
    def test_block_run_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(BASE_CONFIG))
        out = tmp_path / "out"
        assert run_cli("experiment", str(cfg), "--out", str(out)) == 0
        lines = (out / "moments.csv").read_text().splitlines()
        assert lines[0] == "k,quantity,estimate,stderr,target,pass"
        assert len(lines) == 1 + 3 * 2  # three quantities, two k values
        doc = json.loads((out / "verdict.json").read_text())
        assert doc["case"] == "gaussian-offdiag"
        assert set(doc["quantities"]) == {"abs2", "sq", "abs4"}
        assert doc["seed"] == 7

    def test_byte_identical_across_worker_counts(self, tmp_path):
        outs = []
        for workers in (1, 3):
            cfg = tmp_path / f"cfg{workers}.json"
            cfg.write_text(json.dumps({**BASE_CONFIG, "workers": workers}))
            out = tmp_path / f"out{workers}"
            assert run_cli("experiment", str(cfg), "--out", str(out)) == 0
            outs.append(((out / "moments.csv").read_bytes(),
                         (out / "verdict.json").read_bytes()))
        assert outs[0] == outs[1]

    def test_exit_zero_even_when_verdict_fails(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        bad = dict(BASE_CONFIG)
        bad["criterion"] = {"case": "gaussian-offdiag", "sigma2": 40.0, "m": 1, "n": 2}
        bad.pop("exact_reference")
        cfg.write_text(json.dumps(bad))
        out = tmp_path / "out"
        assert run_cli("experiment", str(cfg), "--out", str(out)) == 0
        doc = json.loads((out / "verdict.json").read_text())
        assert doc["pass"] is False

    def test_odd_chi2_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            **BASE_CONFIG,
            "criterion": {"case": "chi2-offdiag", "sigma2": 2.0, "m": 1, "n": 2}}))
        assert run_cli("experiment", str(cfg), "--out", str(tmp_path / "o")) == 65

    def test_missing_kernel_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "seed": 1, "n_samples": 200,
            "kernel": {"file": "missing_kernel.txt"},
            "criterion": {"case": "gaussian-offdiag", "sigma2": 1.0}}))
        assert run_cli("experiment", str(cfg), "--out", str(tmp_path / "o")) == 66

    def test_kernel_file_route(self, tmp_path):
        kern = ComplexKernel(1, 1, 2, {((0,), (0,)): EC(1), ((1,), (1,)): EC(1)})
        kpath = tmp_path / "kern.txt"
        kpath.write_text(dump_kernel(kern))
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "seed": 3, "n_samples": 2000,
            "kernel": {"file": "kern.txt", "scale": "1/2"},
            "criterion": {"case": "gaussian-diag", "sigma2": 1.0, "a": 1.0, "b": 0.0,
                          "m": 1, "n": 1}}))
        out = tmp_path / "o"
        assert run_cli("experiment", str(cfg), "--out", str(out)) == 0
        doc = json.loads((out / "verdict.json").read_text())
        assert doc["case"] == "gaussian-degenerate"

    def test_ks_section(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            **BASE_CONFIG, "n_samples": 2000,
            "ks": {"k": 4, "component": "re", "mean": 0, "var": 1}}))
        out = tmp_path / "o"
        assert run_cli("experiment", str(cfg), "--out", str(out)) == 0
        doc = json.loads((out / "verdict.json").read_text())
        assert "ks" in doc and doc["ks"]["k"] == 4

    def test_config_parse_error(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{bad json")
        assert run_cli("experiment", str(cfg), "--out", str(tmp_path / "o")) == 65

    def test_missing_config(self, tmp_path):
        assert run_cli("experiment", str(tmp_path / "none.json"),
                       "--out", str(tmp_path / "o")) == 65

    def test_seed_required_but_env_fallback(self, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        body = {k: v for k, v in BASE_CONFIG.items() if k != "seed"}
        cfg.write_text(json.dumps(body))
        monkeypatch.delenv("CHAOSLAB_SEED", raising=False)
        assert run_cli("experiment", str(cfg), "--out", str(tmp_path / "o1")) == 65
        monkeypatch.setenv("CHAOSLAB_SEED", "7")
        assert run_cli("experiment", str(cfg), "--out", str(tmp_path / "o2")) == 0
        doc = json.loads((tmp_path / "o2" / "verdict.json").read_text())
        assert doc["seed"] == 7

    def test_config_seed_overrides_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CHAOSLAB_SEED", "99")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(BASE_CONFIG))
        out = tmp_path / "o"
        assert run_cli("experiment", str(cfg), "--out", str(out)) == 0
        doc = json.loads((out / "verdict.json").read_text())
        assert doc["seed"] == 7
