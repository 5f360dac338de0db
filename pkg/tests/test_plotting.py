import hashlib

import pytest

from snrlab.harness import CSV_HEADER, CsvSchemaError, SweepConfig, run_sweep, write_csv
from snrlab.plotting import ESTIMATOR_COLORS, emit_plot
from snrlab.theory import risk_curves


@pytest.fixture
def sweep_csv(tmp_path):
    cfg = SweepConfig(n=30, p=16, k=2, tau=1.0, inv_snr_grid=(0.5, 2.0),
                      trials=3, estimators=("ridge", "lasso", "zero"),
                      tuning_mode="PaperFormula", master_seed=13)
    path = tmp_path / "sweep.csv"
    write_csv(run_sweep(cfg), path)
    return path


def test_one_polyline_per_estimator(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text(CSV_HEADER + "\n"
                    "ridge,0.5,0.9000000000000000,0,2,1\n"
                    "ridge,2.0,0.9500000000000000,0,2,1\n")
    svg = tmp_path / "one.svg"
    emit_plot(path, svg)
    text = svg.read_text()
    assert text.count('class="data"') == 1
    assert text.startswith("<?xml")
    assert "</svg>" in text


def test_colors_follow_fixed_scheme(sweep_csv, tmp_path):
    svg = tmp_path / "colors.svg"
    emit_plot(sweep_csv, svg)
    text = svg.read_text()
    for name in ("ridge", "lasso", "zero"):
        assert f'stroke="{ESTIMATOR_COLORS[name]}"' in text
        assert f">{name}</text>" in text
    assert ESTIMATOR_COLORS == {"ridge": "red", "lasso": "blue", "enet": "green",
                                "best-subset": "purple", "zero": "gray"}


def test_overlays_are_dashed(sweep_csv, tmp_path):
    svg = tmp_path / "ov.svg"
    curves = risk_curves(16, 2, 1.0, [0.5, 2.0])
    emit_plot(sweep_csv, svg, {"overlays": curves})
    text = svg.read_text()
    assert 'class="overlay"' in text
    assert "stroke-dasharray" in text


def test_byte_determinism(sweep_csv, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_plot(sweep_csv, a, {"title": "t"})
    emit_plot(sweep_csv, b, {"title": "t"})
    assert hashlib.sha256(a.read_bytes()).hexdigest() \
        == hashlib.sha256(b.read_bytes()).hexdigest()


def test_values_above_ymax_are_clamped(tmp_path):
    path = tmp_path / "big.csv"
    path.write_text(CSV_HEADER + "\n"
                    "zero,0.5,5.0000000000000000,0,2,1\n"
                    "zero,2.0,0.0000000000000000,0,2,1\n")
    svg = tmp_path / "big.svg"
    emit_plot(path, svg, {"y_max": 1.0})
    text = svg.read_text()
    # clamped top of the y range is y = 28 (the top margin)
    assert "28.00" in text


def test_schema_error_has_line_number(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(CSV_HEADER + "\nridge,0.5\n")
    with pytest.raises(CsvSchemaError) as exc:
        emit_plot(bad, tmp_path / "x.svg")
    assert ":2:" in str(exc.value)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        emit_plot(tmp_path / "missing.csv", tmp_path / "x.svg")
