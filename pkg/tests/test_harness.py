import hashlib
import math

import numpy as np
import pytest

from snrlab.harness import (CSV_HEADER, CellStats, ConfigError, CsvSchemaError,
                            SweepConfig, SweepResult, aggregate,
                            compare_theory, config_from_toml, config_to_toml,
                            load_config, read_csv, run_sweep, run_trial,
                            write_csv)
from snrlab.tuning import Family, Tuning


def small_config(**overrides):
    # inv_snr >= 2 keeps mu <= 0.5, inside the closed-form enet tuning range
    base = dict(n=40, p=24, k=3, tau=1.0, inv_snr_grid=(2.0, 4.0), trials=4,
                estimators=("ridge", "lasso", "enet", "zero"),
                tuning_mode="PaperFormula", master_seed=11, grid_size=8)
    base.update(overrides)
    return SweepConfig(**base)


def _strip_time(records):
    return [(r.estimator, r.inv_snr, r.trial_id, r.scaled_mse, r.unscaled_mse,
             r.tuning, r.status) for r in records]


class TestRunTrial:
    def test_zero_estimator_scaled_mse_is_one(self):
        cfg = small_config(estimators=("zero",))
        recs = run_trial(cfg, 2.0, 0)
        assert len(recs) == 1
        assert recs[0].scaled_mse == 1.0
        assert recs[0].status == "ok"

    def test_noiseless_ridge_recovery(self):
        cfg = SweepConfig(n=50, p=30, k=3, tau=1.0, inv_snr_grid=(0.0,),
                          trials=1, estimators=("ridge",), master_seed=3)
        recs = run_trial(cfg, 0.0, 0,
                         tunings={"ridge": Tuning(Family.RIDGE, lam=1e-9)})
        assert recs[0].scaled_mse <= 1e-6

    def test_rerun_is_identical(self):
        cfg = small_config()
        a = run_trial(cfg, 2.0, 1)
        b = run_trial(cfg, 2.0, 1)
        assert _strip_time(a) == _strip_time(b)

    def test_regime_mismatch_recorded_not_raised(self):
        # mu = 2 puts the closed-form elastic-net tuning out of range
        cfg = small_config(estimators=("enet",), inv_snr_grid=(0.5,), tau=2.0)
        recs = run_trial(cfg, 0.5, 0)
        assert recs[0].status.startswith("error:")
        assert math.isnan(recs[0].scaled_mse)

    def test_off_grid_point_rejected(self):
        with pytest.raises(ConfigError):
            run_trial(small_config(), 0.123, 0)


class TestRunSweep:
    def test_single_trial_zero_cell(self):
        cfg = SweepConfig(n=20, p=10, k=2, tau=1.0, inv_snr_grid=(1.0,),
                          trials=1, estimators=("zero",), master_seed=5)
        res = run_sweep(cfg)
        cell = res.cells[0]
        assert cell.mean_scaled_mse == 1.0
        assert cell.se_scaled_mse == 0.0
        assert not cell.se_defined
        assert cell.trials == 1

    def test_thread_invariance(self):
        cfg = small_config(tuning_mode="OracleGrid", trials=3)
        a = run_sweep(cfg, threads=1)
        b = run_sweep(cfg, threads=3)
        assert a.cells == b.cells
        assert _strip_time(a.records) == _strip_time(b.records)

    def test_pilot_and_eval_streams_disjoint(self):
        from snrlab.harness import _EVAL_STREAM, _PILOT_STREAM, _make_dataset
        from snrlab.rng import RngStream
        assert _EVAL_STREAM != _PILOT_STREAM
        cfg = small_config()
        root = RngStream(cfg.master_seed)
        ds_eval = _make_dataset(cfg, 1.0, root.child(_EVAL_STREAM, 0, 0))
        ds_pilot = _make_dataset(cfg, 1.0, root.child(_PILOT_STREAM, 0, 0))
        assert not np.array_equal(ds_eval.y, ds_pilot.y)

    def test_aggregation_matches_naive_pass(self):
        cfg = small_config(trials=6)
        res = run_sweep(cfg)
        for cell in res.cells:
            vals = [r.scaled_mse for r in res.records
                    if r.estimator == cell.estimator
                    and r.inv_snr == cell.inv_snr and r.status == "ok"]
            if not vals:
                continue
            mean = sum(vals) / len(vals)
            var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
            se = math.sqrt(var / len(vals))
            assert abs(cell.mean_scaled_mse - mean) <= 1e-12 * max(abs(mean), 1)
            assert abs(cell.se_scaled_mse - se) <= 1e-12 * max(se, 1)

    def test_explicit_family_grids(self):
        cfg = small_config(tuning_mode="OracleGrid", trials=2,
                           estimators=("ridge", "enet"),
                           ridge_grid=(0.5, 5.0), enet_lam_grid=(0.0, 2.0),
                           enet_gamma_grid=(1.0, 10.0))
        res = run_sweep(cfg)
        for fam in res.tunings.values():
            assert fam["ridge"].lam in (0.5, 5.0)
            assert fam["enet"].lam in (0.0, 2.0)
            assert fam["enet"].gamma in (1.0, 10.0)
        with pytest.raises(ConfigError):
            small_config(ridge_grid=(-1.0,)).validate()
        with pytest.raises(ConfigError):
            small_config(enet_gamma_grid=(-2.0,)).validate()

    def test_oracle_mode_uses_oracle_tunings(self):
        cfg = small_config(tuning_mode="OracleGrid", trials=3,
                           estimators=("ridge",))
        res = run_sweep(cfg)
        from snrlab.tuning import Provenance
        assert all(t.provenance is Provenance.ORACLE_GRID
                   for fam in res.tunings.values() for t in fam.values())


class TestConfig:
    def test_round_trip(self):
        cfg = small_config().validate()
        assert config_from_toml(config_to_toml(cfg)) == cfg

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "c.toml"
        cfg = small_config().validate()
        path.write_text(config_to_toml(cfg))
        assert load_config(path) == cfg

    @pytest.mark.parametrize("overrides", [
        dict(inv_snr_grid=()),
        dict(inv_snr_grid=(2.0, 0.5)),
        dict(inv_snr_grid=(0.5, 0.5)),
        dict(inv_snr_grid=(-1.0,)),
        dict(estimators=()),
        dict(estimators=("nope",)),
        dict(tuning_mode="CrossValidation"),
        dict(k=24),
        dict(trials=0),
        dict(pilot_fraction=0.0),
    ])
    def test_validation_rejects(self, overrides):
        with pytest.raises(ConfigError):
            small_config(**overrides).validate()

    def test_bss_feasibility_gate(self):
        bad = small_config(n=200, p=150, k=5, estimators=("best-subset",),
                           bss_budget=1000)
        with pytest.raises(ConfigError):
            bad.validate()
        ok = small_config(estimators=("best-subset",))  # C(24,3) = 2024 < 1e6
        ok.validate()

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            config_from_toml("nonsense = 3\n")


class TestCsv:
    def test_header_only_for_empty_sweep(self, tmp_path):
        res = SweepResult(config=small_config(), cells=(), records=())
        path = tmp_path / "empty.csv"
        write_csv(res, path)
        assert path.read_text() == CSV_HEADER + "\n"

    def test_zero_row_shape(self, tmp_path):
        cfg = SweepConfig(n=20, p=10, k=2, tau=1.0, inv_snr_grid=(1.0,),
                          trials=1, estimators=("zero",), master_seed=7)
        res = run_sweep(cfg)
        path = tmp_path / "zero.csv"
        write_csv(res, path)
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert lines[1] == "zero,1.0,1.0000000000000000,0,1,7"

    def test_byte_determinism(self, tmp_path):
        cfg = small_config(trials=3)
        digests = set()
        for threads in (1, 2):
            for rep in range(2):
                res = run_sweep(cfg, threads=threads)
                path = tmp_path / f"d{threads}{rep}.csv"
                write_csv(res, path)
                digests.add(hashlib.sha256(path.read_bytes()).hexdigest())
        assert len(digests) == 1

    def test_rows_sorted(self, tmp_path):
        cfg = small_config(trials=2)
        res = run_sweep(cfg)
        path = tmp_path / "s.csv"
        write_csv(res, path)
        rows = read_csv(path)
        keys = [(r["estimator"], r["inv_snr"]) for r in rows]
        assert keys == sorted(keys)

    def test_read_round_trip_values(self, tmp_path):
        cfg = small_config(trials=3)
        res = run_sweep(cfg)
        path = tmp_path / "r.csv"
        write_csv(res, path)
        rows = read_csv(path)
        cells = {(c.estimator, c.inv_snr): c for c in res.cells}
        for row in rows:
            cell = cells[(row["estimator"], row["inv_snr"])]
            if math.isnan(cell.mean_scaled_mse):
                assert math.isnan(row["mean_scaled_mse"])
            else:
                assert row["mean_scaled_mse"] == cell.mean_scaled_mse  # 17 digits round-trip

    def test_schema_errors_carry_line_numbers(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n")
        with pytest.raises(CsvSchemaError) as exc:
            read_csv(bad)
        assert ":1:" in str(exc.value)
        bad.write_text(CSV_HEADER + "\nzero,1.0,xx,0,1,7\n")
        with pytest.raises(CsvSchemaError) as exc:
            read_csv(bad)
        assert ":2:" in str(exc.value)


class TestCompareTheory:
    def test_zero_ratio_is_one(self):
        cfg = SweepConfig(n=20, p=10, k=2, tau=1.0, inv_snr_grid=(1.0,),
                          trials=2, estimators=("zero",), master_seed=9)
        report = compare_theory(run_sweep(cfg))
        row = report.rows[0]
        assert row["family_theory"] == 1.0
        assert row["ratio"] == pytest.approx(1.0)
        assert "zero" in report.to_text()

    def test_ridge_rows_use_second_order_curve(self):
        cfg = SweepConfig(n=30, p=20, k=2, tau=0.5, inv_snr_grid=(2.0,),
                          trials=2, estimators=("ridge",), master_seed=10,
                          tuning_mode="PaperFormula")
        report = compare_theory(run_sweep(cfg))
        from snrlab import ParamSpace
        from snrlab.theory import ridge_second_order_risk
        expected = ridge_second_order_risk(20, ParamSpace(k=2, tau=0.5, sigma=1.0)) \
            / (2 * 0.25)
        assert report.rows[0]["family_theory"] == pytest.approx(expected)
