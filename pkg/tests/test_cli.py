"""Command-line interface tests: output schema, determinism, exit codes."""

import json
import subprocess
import sys

from risbound.cli import CSV_COLUMNS, main


def run_cli(args):
    return subprocess.run(
        [sys.executable, "-m", "risbound.cli", *args],
        capture_output=True, text=True, timeout=600,
    )


SMALL_SWEEP = [
    "sweep", "--n", "64", "--rate", "0.5", "--snr-db", "40:42:1",
    "--nris", "4", "--method", "chebyshev,closed_form", "--seed", "1",
    "--no-na",
]


class TestSweep:
    def test_csv_schema_and_metadata(self, tmp_path):
        out = tmp_path / "curve.csv"
        code = main(SMALL_SWEEP + ["--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        meta = [l for l in lines if l.startswith("#")]
        assert any("variant_ledger_sha256_16" in l for l in meta)
        assert any('"seed"' in l or "seed" in l for l in meta)
        header = [l for l in lines if not l.startswith("#")][0]
        assert header.split(",") == CSV_COLUMNS
        data = [l for l in lines if not l.startswith("#")][1:]
        assert len(data) == 3  # one n, three snr points
        first = dict(zip(CSV_COLUMNS, data[0].split(",")))
        assert first["n"] == "64"
        assert float(first["bound_closed"]) > 0
        assert float(first["bound_oracle"]) > 0
        assert first["error"] == ""

    def test_json_schema(self, tmp_path):
        out = tmp_path / "curve.json"
        code = main(SMALL_SWEEP + ["--format", "json", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert set(payload) == {"meta", "rows"}
        assert payload["meta"]["tool"] == "risbound"
        assert len(payload["rows"]) == 3
        assert "nan" not in out.read_text().lower()

    def test_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(SMALL_SWEEP + ["--out", str(a)]) == 0
        assert main(SMALL_SWEEP + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_out_of_regime_closed_form_is_marked_not_fatal(self, tmp_path):
        out = tmp_path / "c.csv"
        code = main([
            "sweep", "--n", "64", "--rate", "0.5", "--snr-db", "30:30:1",
            "--nris", "4", "--method", "chebyshev,closed_form", "--no-na",
            "--out", str(out),
        ])
        assert code == 0
        row = [l for l in out.read_text().splitlines() if not l.startswith("#")][1]
        cells = dict(zip(CSV_COLUMNS, row.split(",")))
        assert cells["error"] == "closed_form_out_of_regime"
        assert cells["bound_closed"] == ""
        assert float(cells["bound_oracle"]) > 0

    def test_empty_n_list_is_usage_error(self):
        assert main(["sweep", "--n", "", "--no-na"]) == 2

    def test_bad_snr_spec_is_usage_error(self):
        assert main(["sweep", "--snr-db", "10:20", "--no-na"]) == 2

    def test_config_file_roundtrip(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "channel.nris = 4\n"
            "sweep.snr_db_start = 41  # comment\n"
            "sweep.snr_db_stop = 41\n"
            "sweep.snr_db_step = 1\n"
            "sweep.n_list = 64\n"
            "sweep.include_na = 0\n"
        )
        out = tmp_path / "cfg.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        rows = [l for l in out.read_text().splitlines() if not l.startswith("#")][1:]
        assert len(rows) == 1

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sweep.unknown_key = 3\n")
        assert main(["sweep", "--config", str(cfg)]) == 2


class TestOtherCommands:
    def test_alpha1_command(self, capsys):
        assert main(["alpha1", "--n", "8,64", "--rate", "0.5"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "n,rate,alpha1_rad,residual"
        assert len(out) == 3
        assert abs(float(out[2].split(",")[2]) - 0.8229571463591737) < 1e-10

    def test_alpha1_requires_n(self):
        assert main(["alpha1"]) == 2

    def test_sample_command_exports(self, tmp_path, capsys):
        out = tmp_path / "samples.csv"
        assert main(["sample", "--nris", "2", "--trials", "500", "--seed", "3",
                     "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "mc_mean" in text and "analytic_mean" in text
        assert len(out.read_text().splitlines()) == 500

    def test_validate_fast_passes_and_is_deterministic(self, tmp_path):
        a, b = tmp_path / "r1.txt", tmp_path / "r2.txt"
        assert main(["validate", "--fast", "--seed", "11", "--out", str(a)]) == 0
        assert main(["validate", "--fast", "--seed", "11", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        text = a.read_text()
        assert "formula discrepancy ledger" in text
        assert "variance_interpretation_default = second_moment" in text


class TestSubprocessEntry:
    def test_module_entrypoint(self):
        res = run_cli(["alpha1", "--n", "16", "--rate", "0.25"])
        assert res.returncode == 0
        assert res.stdout.startswith("n,rate,alpha1_rad")
