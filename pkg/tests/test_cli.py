import csv
import io
import json
import math
import subprocess
import sys

import pytest

from zenolab.cli import (
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    SAMPLE_COLUMNS,
    RunConfig,
    UsageError,
    emit,
    run,
)
from zenolab.survival import survival_point

HEADER = "t_s,tau,p,p_exponential,p_powerlaw,p_interference,y_re,y_im,h,eta"


def run_capture(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_constants(capsys):
    code, out, _ = run_capture(capsys, "constants", "--z", "1")
    assert code == EXIT_OK
    rows = {r["name"]: float(r["value"]) for r in table(out)}
    assert rows["zeno_time"] == pytest.approx(3.593e-15, rel=1e-3)
    assert rows["lifetime"] == pytest.approx(1.595e-9, rel=5e-3)
    assert rows["zeno_time_corrected"] == pytest.approx(rows["zeno_time"] / math.sqrt(1.4210), rel=1e-15)


def test_constants_json(capsys):
    code, out, _ = run_capture(capsys, "constants", "--format", "json")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["params"]["z"] == 1
    assert obj["constants"]["chi"] == pytest.approx(6.435e-9, rel=1e-3)


def test_survival_csv(capsys):
    code, out, _ = run_capture(capsys, "survival", "--z", "1", "--tmin", "1e-18", "--tmax", "1e-15",
                               "--points", "500", "--scale", "log", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 501
    for row in table(out):
        parts = float(row["p_exponential"]) + float(row["p_powerlaw"]) + float(row["p_interference"])
        assert abs(float(row["p"]) - parts) < 1e-10


def test_pole_z_scaling(capsys):
    _, out1, _ = run_capture(capsys, "pole", "--z", "1")
    code, out3, _ = run_capture(capsys, "pole", "--z", "3")
    assert code == EXIT_OK
    g1, g3 = float(table(out1)[0]["gamma"]), float(table(out3)[0]["gamma"])
    assert g3 / g1 == pytest.approx(3**4, rel=0.01)


def test_emit_single_sample(hydrogen, hydrogen_pole):
    s = survival_point(1e-16, hydrogen, hydrogen_pole)
    buf = io.StringIO()
    emit([s], "csv", buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2 and lines[0] == HEADER
    assert tuple(lines[0].split(",")) == SAMPLE_COLUMNS


def test_emit_json_roundtrip(hydrogen, hydrogen_pole):
    samples = [survival_point(t, hydrogen, hydrogen_pole) for t in (1e-18, 1e-16, 1e-13)]
    buf = io.StringIO()
    emit(samples, "json", buf, hydrogen)
    obj = json.loads(buf.getvalue())
    assert obj["params"]["chi"] == hydrogen.chi
    for s, row in zip(samples, obj["samples"]):
        assert set(row) == set(SAMPLE_COLUMNS)
        assert row["t_s"] == s.t and row["p"] == s.p and row["eta"] == s.eta
        assert complex(row["y_re"], row["y_im"]) == s.y


def test_emit_rejects_empty():
    with pytest.raises(ValueError):
        emit([], "csv", io.StringIO())


def test_byte_identical_output(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(["survival", "--points", "20", "--format", "json", "--output", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_compare_bromwich(capsys):
    code, out, _ = run_capture(capsys, "compare", "--oracle", "bromwich", "--z", "1",
                               "--tmin", "1e-18", "--tmax", "1e-14")
    assert code == EXIT_OK
    assert float(table(out)[0]["max_abs_error"]) < 1e-6


def test_oracle_discrete(capsys):
    code, out, _ = run_capture(capsys, "oracle", "discrete", "--z", "0", "--chi", "0.05", "--a", "0.3",
                               "--modes", "300", "--tmin", "1", "--tmax", "10", "--points", "3")
    assert code == EXIT_OK
    rows = table(out)
    assert len(rows) == 3 and all(0 <= float(r["p"]) <= 1 for r in rows)


def test_oracle_spectral_json(capsys):
    code, out, _ = run_capture(capsys, "oracle", "spectral", "--z", "0", "--chi", "0.01", "--a", "0.25",
                               "--tmin", "1", "--tmax", "100", "--points", "2", "--format", "json")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["oracle"] == "spectral" and len(obj["samples"]) == 2


def test_selfenergy(capsys):
    code, out, _ = run_capture(capsys, "selfenergy", "--s-re", "1", "--quadrature")
    assert code == EXIT_OK
    row = table(out)[0]
    assert complex(float(row["qbar_re"]), float(row["qbar_im"])) == pytest.approx((32 - 5j * math.pi) / 256)
    assert float(row["quad_re"]) == pytest.approx(float(row["qbar_re"]), abs=1e-10)


def test_selfenergy_domain_error(capsys):
    code, _, err = run_capture(capsys, "selfenergy", "--s-re", "0", "--s-im", "-1")
    assert code == EXIT_USAGE and "cut" in err


def test_spectrum(capsys):
    code, out, _ = run_capture(capsys, "spectrum", "--points", "5")
    assert code == EXIT_OK
    assert all(float(r["w"]) >= 0 for r in table(out))


def test_crossover(capsys):
    code, out, _ = run_capture(capsys, "crossover")
    assert code == EXIT_OK
    row = table(out)[0]
    assert float(row["residual"]) < 1e-10


@pytest.mark.parametrize("argv", [
    ["pole", "--z", "1", "--chi", "0.1"],
    ["pole", "--z", "0", "--chi", "0.01"],
    ["pole", "--z", "0", "--chi", "0.01", "--a", "2"],
    ["pole", "--z", "-1"],
    ["survival", "--points", "1"],
    ["nonsense"],
    ["pole", "--format", "xml"],
])
def test_usage_errors(capsys, argv):
    assert run(argv) == EXIT_USAGE


def test_numeric_failure(capsys):
    code, _, err = run_capture(capsys, "pole", "--z", "0", "--chi", "0.5", "--a", "0.01")
    assert code == EXIT_NUMERIC and "numerical" in err


def test_io_failure(capsys, tmp_path):
    code = run(["pole", "--output", str(tmp_path / "missing" / "out.csv")])
    assert code == EXIT_IO


def test_config_file_and_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# synthetic run\nz = 0\nchi = 0.01\na = 0.25\nformat = json\n")
    code, out, _ = run_capture(capsys, "pole", "--config", str(cfg))
    assert code == EXIT_OK
    assert json.loads(out)["params"]["a"] == 0.25
    monkeypatch.setenv("ZENOLAB_CONFIG", str(cfg))
    code, out, _ = run_capture(capsys, "pole", "--a", "0.3", "--format", "csv")
    assert code == EXIT_OK
    assert out.startswith("s_pole_re")
    assert float(table(out)[0]["s_pole_im"]) == pytest.approx(-0.3, abs=1e-2)


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["pole", "--config", str(bad)]) == EXIT_USAGE
    bad.write_text("just words\n")
    assert run(["pole", "--config", str(bad)]) == EXIT_USAGE
    assert run(["pole", "--config", str(tmp_path / "none.cfg")]) == EXIT_IO


def test_run_config_invariants():
    with pytest.raises(UsageError):
        RunConfig(z=0, overrides={"chi": 0.1})
    with pytest.raises(UsageError):
        RunConfig(z=1, overrides={"a": 0.1})
    with pytest.raises(UsageError):
        RunConfig(z=1, overrides={"m_e": 1.0})
    p = RunConfig(z=1, overrides={"alpha": 7.3e-3}).params()
    assert p.a == 7.3e-3 / 4
    assert RunConfig(z=0, overrides={"chi": 0.1, "a": 0.2}).params().cutoff_lambda == 1.0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "zenolab", "selfenergy", "--s-re", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("s_re,s_im,sheet")
