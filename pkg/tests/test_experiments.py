"""Tests for sweeps, fits, comparisons, and the command-line front end."""

import json
import math

import pytest

from matchsim.cli import main
from matchsim.experiments import (
    CSV_COLUMNS,
    SweepConfig,
    compare_report,
    derive_seed,
    fit_exponent,
    geometric_mean,
    load_rows,
    noise_spec,
    result_from_rows,
    run_sweep,
    statevector_cap_from_env,
)
from matchsim.grover import DEFAULT_STATEVECTOR_CAP, ResourceLimitError


class TestSweepConfig:
    def test_round_trip_through_dict(self):
        config = SweepConfig(
            algorithm="nested",
            n_values=(16, 64),
            trials_per_n=3,
            base_seed=9,
            noise_preset="inv_n",
        )
        assert SweepConfig.from_dict(config.as_dict()) == config

    def test_from_json(self):
        text = json.dumps({"algorithm": "sort_scan", "n_values": [4, 16]})
        config = SweepConfig.from_json(text)
        assert config.algorithm == "sort_scan"
        assert config.n_values == (4, 16)
        assert config.trials_per_n == 1

    def test_rejects_unknown_algorithm(self):
        with pytest.raises(ValueError):
            SweepConfig(algorithm="quantum_walk", n_values=(4,))

    def test_rejects_unsorted_sizes(self):
        with pytest.raises(ValueError):
            SweepConfig(algorithm="nested", n_values=(64, 16))
        with pytest.raises(ValueError):
            SweepConfig(algorithm="nested", n_values=(16, 16))

    def test_rejects_empty_sizes_and_bad_trials(self):
        with pytest.raises(ValueError):
            SweepConfig(algorithm="nested", n_values=())
        with pytest.raises(ValueError):
            SweepConfig(algorithm="nested", n_values=(16,), trials_per_n=0)

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            SweepConfig.from_dict(
                {"algorithm": "nested", "n_values": [4], "shots": 100}
            )

    def test_rejects_bad_preset_and_engine(self):
        with pytest.raises(ValueError):
            SweepConfig(algorithm="nested", n_values=(16,), noise_preset="gaussian")
        with pytest.raises(ValueError):
            SweepConfig(algorithm="nested", n_values=(16,), engine="dense")


class TestSeedDerivation:
    def test_deterministic(self):
        assert derive_seed(5, 64, 3, "instance") == derive_seed(5, 64, 3, "instance")

    def test_streams_are_distinct(self):
        cells = set()
        for base in range(3):
            for n in (16, 64):
                for trial in range(4):
                    for stream in ("instance", "run"):
                        cells.add(derive_seed(base, n, trial, stream))
        assert len(cells) == 3 * 2 * 4 * 2

    def test_fits_in_64_bits(self):
        s = derive_seed(2**63, 65536, 999, "run")
        assert 0 <= s < 2**64


class TestNoisePresets:
    def test_values(self):
        assert noise_spec("none", 100) is None
        assert noise_spec("inv_n", 100).failure_prob == pytest.approx(0.01)
        assert noise_spec("inv_sqrt_n", 100).failure_prob == pytest.approx(0.1)

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            noise_spec("linear", 100)


class TestRunSweep:
    def test_row_grid_is_complete(self):
        config = SweepConfig(algorithm="sort_scan", n_values=(4, 16), trials_per_n=3)
        result = run_sweep(config)
        assert len(result.rows) == 6
        assert [(r.n, r.trial) for r in result.rows] == [
            (4, 0), (4, 1), (4, 2), (16, 0), (16, 1), (16, 2),
        ]

    def test_byte_identical_reruns(self, tmp_path):
        out = tmp_path / "sweep.csv"
        config = SweepConfig(
            algorithm="nested",
            n_values=(16, 64),
            trials_per_n=4,
            base_seed=3,
            output=str(out),
        )
        run_sweep(config)
        first = out.read_bytes()
        first_json = (tmp_path / "sweep.json").read_bytes()
        run_sweep(config)
        assert out.read_bytes() == first
        assert (tmp_path / "sweep.json").read_bytes() == first_json

    def test_csv_header_schema(self):
        config = SweepConfig(algorithm="exhaustive", n_values=(4,))
        text = run_sweep(config).to_csv_text()
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_distinct_trials_use_distinct_instances(self):
        config = SweepConfig(algorithm="sort_scan", n_values=(16,), trials_per_n=5)
        seeds = {row.seed for row in run_sweep(config).rows}
        assert len(seeds) == 5

    def test_classical_rows_always_succeed(self):
        for algo in ("exhaustive", "sort_scan", "two_sort"):
            config = SweepConfig(algorithm=algo, n_values=(4, 16), trials_per_n=3)
            assert all(r.success == 1 for r in run_sweep(config).rows)

    def test_aggregate_shape_and_fit_gate(self):
        config = SweepConfig(algorithm="sort_scan", n_values=(16, 64), trials_per_n=2)
        agg = run_sweep(config).aggregate()
        assert agg["fit"] is None  # fewer than 3 sizes
        assert [e["n"] for e in agg["per_n"]] == [16, 64]
        config3 = SweepConfig(algorithm="sort_scan", n_values=(16, 64, 256))
        agg3 = run_sweep(config3).aggregate()
        assert agg3["fit"] is not None
        # n log n data: raw slope overshoots 1, normalized slope sits on it
        assert agg3["fit"]["slope"] > 1.05
        assert agg3["fit_log_normalized"]["slope"] == pytest.approx(1.0, abs=0.05)

    def test_nested_predicted_success_column(self):
        config = SweepConfig(algorithm="nested", n_values=(256,), trials_per_n=2)
        rows = run_sweep(config).rows
        for row in rows:
            assert 0.9 < row.predicted_success < 1.0

    def test_load_rows_round_trip(self, tmp_path):
        out = tmp_path / "s.csv"
        config = SweepConfig(
            algorithm="nested", n_values=(16, 64), trials_per_n=2, output=str(out)
        )
        result = run_sweep(config)
        assert load_rows(out) == result.rows

    def test_load_rows_rejects_foreign_csv(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            load_rows(bad)

    def test_statevector_cap_violation_names_size(self, monkeypatch):
        monkeypatch.setenv("MATCH_SIM_STATEVECTOR_CAP", "64")
        config = SweepConfig(
            algorithm="naive_grover", n_values=(16,), engine="statevector"
        )
        with pytest.raises(ResourceLimitError) as err:
            run_sweep(config)
        assert "n=16" in str(err.value)

    def test_cap_env_parsing(self, monkeypatch):
        monkeypatch.delenv("MATCH_SIM_STATEVECTOR_CAP", raising=False)
        assert statevector_cap_from_env() == DEFAULT_STATEVECTOR_CAP
        monkeypatch.setenv("MATCH_SIM_STATEVECTOR_CAP", "4096")
        assert statevector_cap_from_env() == 4096
        monkeypatch.setenv("MATCH_SIM_STATEVECTOR_CAP", "many")
        with pytest.raises(ValueError):
            statevector_cap_from_env()

    def test_auto_engine_downgrades_instead_of_failing(self, monkeypatch):
        monkeypatch.setenv("MATCH_SIM_STATEVECTOR_CAP", "64")
        config = SweepConfig(algorithm="naive_grover", n_values=(16,), engine="auto")
        rows = run_sweep(config).rows
        assert len(rows) == 1


class TestFitExponent:
    def test_exact_linear_law(self):
        points = [(n, 7.0 * n) for n in (16, 64, 256, 1024)]
        fit = fit_exponent(points)
        assert fit.slope == pytest.approx(1.0, abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-9)

    def test_exact_three_quarters_law_with_log_factor(self):
        points = [(n, n**0.75 * math.log2(n)) for n in (16, 64, 256, 1024, 4096)]
        fit = fit_exponent(points, log_normalize=True)
        assert fit.slope == pytest.approx(0.75, abs=1e-12)

    def test_log_factor_inflates_unnormalized_slope(self):
        points = [(n, n**0.75 * math.log2(n)) for n in (16, 64, 256, 1024, 4096)]
        raw = fit_exponent(points, log_normalize=False)
        assert raw.slope > 0.80

    def test_recovers_planted_exponent(self):
        for exponent in (0.5, 1.0, 1.37, 2.0):
            points = [(n, 3.0 * n**exponent) for n in (16, 64, 256, 1024)]
            fit = fit_exponent(points)
            assert fit.slope == pytest.approx(exponent, abs=1e-9)

    def test_too_few_sizes_rejected(self):
        with pytest.raises(ValueError):
            fit_exponent([(16, 100.0), (64, 400.0)])
        with pytest.raises(ValueError):
            fit_exponent([(16, 100.0), (16, 110.0), (16, 90.0)])

    def test_geometric_mean(self):
        assert geometric_mean([4.0, 16.0]) == pytest.approx(8.0)
        with pytest.raises(ValueError):
            geometric_mean([])


class TestCompareReport:
    def _sweep(self, algo, sizes, trials=1):
        return run_sweep(SweepConfig(algorithm=algo, n_values=sizes, trials_per_n=trials))

    def test_identical_inputs_give_unit_ratio(self):
        a = self._sweep("sort_scan", (16, 64))
        b = self._sweep("sort_scan", (16, 64))
        table = compare_report([a, b])
        for n in (16, 64):
            assert table.costs[table.labels[0]][n] == table.costs[table.labels[1]][n]
        assert table.labels[1].startswith("sort_scan#")

    def test_mismatched_grids_rejected(self):
        a = self._sweep("sort_scan", (16, 64))
        b = self._sweep("nested", (16, 256))
        with pytest.raises(ValueError):
            compare_report([a, b])
        with pytest.raises(ValueError):
            compare_report([a])

    def test_amplified_beats_exhaustive(self):
        a = self._sweep("exhaustive", (64, 256))
        b = self._sweep("naive_grover", (64, 256))
        table = compare_report([a, b])
        for n in (64, 256):
            assert table.costs["naive_grover"][n] < table.costs["exhaustive"][n]

    def test_crossover_reported(self):
        a = self._sweep("sort_scan", (16, 64, 256))
        b = self._sweep("nested", (16, 64, 256))
        table = compare_report([a, b])
        assert table.crossover_n == 16
        assert "nested beats sort_scan" in table.to_text()

    def test_csv_rendering_has_all_columns(self):
        a = self._sweep("sort_scan", (16, 64))
        b = self._sweep("nested", (16, 64))
        table = compare_report([a, b])
        lines = table.to_csv_text().splitlines()
        assert lines[0] == "n,sort_scan,nested"
        assert len(lines) == 3


class TestCli:
    def test_run_prints_report(self, capsys):
        code = main(["run", "--algorithm", "nested", "--n", "256", "--seed", "1"])
        out = capsys.readouterr().out
        assert code == 0
        doc = json.loads(out)
        assert doc["algorithm"] == "nested"
        assert doc["ledger"]["total_cost"] > 0

    def test_run_with_noise_and_engine_flags(self, capsys):
        code = main(
            [
                "run", "--algorithm", "nested", "--n", "256", "--seed", "2",
                "--noise", "inv_n", "--engine", "analytic", "--uncompute", "2",
            ]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["engine_stats"]["engine_outer"] == "statevector"  # noise forces it

    def test_sweep_writes_requested_outputs(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        config = {
            "algorithm": "sort_scan",
            "n_values": [16, 64],
            "trials_per_n": 2,
            "output": str(out),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        assert main(["sweep", "--config", str(cfg_path)]) == 0
        assert out.exists()
        assert (tmp_path / "rows.json").exists()

    def test_sweep_without_output_prints_aggregate(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"algorithm": "exhaustive", "n_values": [4]}))
        assert main(["sweep", "--config", str(cfg_path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["aggregate"]["per_n"][0]["geomean_cost"] == 32.0

    def test_fit_command(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "algorithm": "nested",
                    "n_values": [16, 64, 256, 1024],
                    "output": str(out),
                }
            )
        )
        assert main(["sweep", "--config", str(cfg_path)]) == 0
        capsys.readouterr()
        assert main(["fit", "--input", str(out), "--log-normalize"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0.6 < doc["slope"] < 0.9

    def test_compare_command(self, tmp_path, capsys):
        paths = []
        for algo in ("sort_scan", "nested"):
            out = tmp_path / f"{algo}.csv"
            cfg = tmp_path / f"{algo}.json"
            cfg.write_text(
                json.dumps(
                    {"algorithm": algo, "n_values": [16, 64], "output": str(out)}
                )
            )
            assert main(["sweep", "--config", str(cfg)]) == 0
            paths.append(str(out))
        capsys.readouterr()
        table_csv = tmp_path / "table.csv"
        assert main(["compare", *paths, "--output", str(table_csv)]) == 0
        text = capsys.readouterr().out
        assert "sort_scan" in text and "nested" in text
        assert table_csv.read_text().splitlines()[0] == "n,sort_scan,nested"

    def test_missing_config_is_exit_two(self, tmp_path, capsys):
        assert main(["sweep", "--config", str(tmp_path / "nope.json")]) == 2

    def test_invalid_config_is_exit_two(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"algorithm": "nope", "n_values": [4]}))
        assert main(["sweep", "--config", str(cfg)]) == 2

    def test_malformed_json_is_exit_two(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        assert main(["sweep", "--config", str(cfg)]) == 2

    def test_resource_limit_is_exit_three(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("MATCH_SIM_STATEVECTOR_CAP", "64")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "algorithm": "naive_grover",
                    "n_values": [16],
                    "engine": "statevector",
                }
            )
        )
        assert main(["sweep", "--config", str(cfg)]) == 3

    def test_compare_with_single_input_is_exit_two(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"algorithm": "sort_scan", "n_values": [16], "output": str(out)})
        )
        assert main(["sweep", "--config", str(cfg)]) == 0
        assert main(["compare", str(out)]) == 2
