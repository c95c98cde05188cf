import os
import subprocess
import sys

import numpy as np
import pytest

from sdcs.cli import main
from sdcs.experiments import read_sweep_csv
from sdcs.linalg import read_matrix_text
from sdcs.measurement import Ensemble, sample_matrix
from sdcs.quantizer import QuantizerConfig, sigma_delta_quantize
from sdcs.rip import projected_matrix, ric_exact
from sdcs.rng import RngStream

SRC = os.path.join(os.path.dirname(__file__), os.pardir, "src")


def run_cli(args):
    assert main(args) == 0


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_gen_matrix_matches_library(tmp_path):
    out = tmp_path / "phi.txt"
    run_cli(["gen", "--kind", "matrix", "--ensemble", "rademacher",
             "--m", "6", "--n", "4", "--seed", "3", "--out", str(out)])
    got = read_matrix_text(out.read_text())
    want = sample_matrix(Ensemble("rademacher"), 6, 4, RngStream(3))
    assert np.array_equal(got, want)


def test_gen_signal_respects_floor(tmp_path):
    out = tmp_path / "x.txt"
    run_cli(["gen", "--kind", "signal", "--n", "20", "--s", "4",
             "--floor", "0.5", "--seed", "9", "--out", str(out)])
    x = read_matrix_text(out.read_text()).reshape(-1)
    nz = x[x != 0.0]
    assert nz.size == 4
    assert np.min(np.abs(nz)) >= 0.5


def test_gen_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["gen", "--kind", "matrix", "--ensemble", "gaussian",
            "--m", "5", "--n", "7", "--seed", "12"]
    run_cli(args + ["--out", str(a)])
    run_cli(args + ["--out", str(b)])
    assert read_bytes(a) == read_bytes(b)


def test_quantize_fixture_and_plain_inputs(tmp_path):
    y = np.array([0.4, 0.4, 0.4])
    fixture = tmp_path / "y_fixture.txt"
    fixture.write_text("3 1\n0.4\n0.4\n0.4\n")
    plain = tmp_path / "y_plain.txt"
    plain.write_text("0.4 0.4 0.4\n")
    out1, out2 = tmp_path / "q1.csv", tmp_path / "q2.csv"
    run_cli(["quantize", "--order", "1", "--delta", "1.0",
             "--input", str(fixture), "--out", str(out1)])
    run_cli(["quantize", "--order", "1", "--delta", "1.0",
             "--input", str(plain), "--out", str(out2)])
    assert read_bytes(out1) == read_bytes(out2)
    lines = out1.read_text().splitlines()
    assert lines[0] == "q,u"
    want = sigma_delta_quantize(y, QuantizerConfig(r=1, delta=1.0))
    got_q = [float(ln.split(",")[0]) for ln in lines[1:]]
    got_u = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert np.allclose(got_q, want.q, atol=0)
    assert np.allclose(got_u, want.u, atol=0)


def test_quantize_rejects_order_above_cap(capsys):
    with pytest.raises(SystemExit):
        main(["quantize", "--order", "4", "--delta", "1.0", "--input", "x"])


def test_reconstruct_csv(tmp_path):
    out = tmp_path / "rep.csv"
    args = ["reconstruct", "--ensemble", "gaussian", "--n", "48", "--s", "3",
            "--m", "40", "--order", "2", "--delta", "0.02", "--alpha", "0.7",
            "--seed", "5", "--out", str(out)]
    run_cli(args)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("ensemble,n,s,m,r,delta,alpha,ell,seed,support_correct,")
    assert lines[0].endswith("recovered_support,x_hat_values")
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "gaussian"
    support = [int(i) for i in fields[13].split(";")]
    values = [float(v) for v in fields[14].split(";")]
    assert len(support) == 3 and len(values) == 3
    # repeated invocation is byte-identical
    out2 = tmp_path / "rep2.csv"
    run_cli(args[:-1] + [str(out2)])
    assert read_bytes(out) == read_bytes(out2)


def test_ripscan_exact_matches_library(tmp_path):
    phi = sample_matrix(Ensemble("gaussian"), 30, 8, RngStream(2))
    fixture = tmp_path / "phi.txt"
    from sdcs.linalg import write_matrix_text

    fixture.write_text(write_matrix_text(phi / np.sqrt(30)))
    out = tmp_path / "rip.csv"
    run_cli(["ripscan", "--mode", "exact", "--s", "2",
             "--input", str(fixture), "--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "s,mode,value,supports_checked"
    s, mode, value, checked = lines[1].split(",")
    want = ric_exact(phi / np.sqrt(30), 2)
    assert (int(s), mode, int(checked)) == (2, "exact", 28)
    assert float(value) == pytest.approx(want.value, abs=0.0)


def test_ripscan_projection_and_mc(tmp_path):
    out = tmp_path / "rip.csv"
    args = ["ripscan", "--mode", "mc", "--s", "2", "--trials", "50",
            "--project", "2,6", "--ensemble", "gaussian",
            "--m", "30", "--n", "10", "--seed", "4", "--out", str(out)]
    run_cli(args)
    phi = sample_matrix(Ensemble("gaussian"), 30, 10, RngStream(4).substream("ripscan-matrix"))
    proj = projected_matrix(phi, 2, 6)
    value = float(out.read_text().splitlines()[1].split(",")[2])
    exact = ric_exact(proj, 2).value
    assert value <= exact + 1e-15
    out2 = tmp_path / "rip2.csv"
    run_cli(args[:-1] + [str(out2)])
    assert read_bytes(out) == read_bytes(out2)


def test_sweep_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        "ensemble = gaussian\nn = 48\ns = 3\nr = 1\ndelta = 0.05\n"
        "alpha = 0.7\nm_grid = 24,48\ntrials = 2\nseed = 11\n"
    )
    out1 = tmp_path / "sweep1.csv"
    out2 = tmp_path / "sweep2.csv"
    run_cli(["sweep", "--config", str(cfg), "--out", str(out1)])
    run_cli(["sweep", "--config", str(cfg), "--out", str(out2)])
    assert read_bytes(out1) == read_bytes(out2)
    records = read_sweep_csv(out1.read_text())
    assert len(records) == 4
    # flag override shrinks the grid
    out3 = tmp_path / "sweep3.csv"
    run_cli(["sweep", "--config", str(cfg), "--m-grid", "24", "--out", str(out3)])
    assert len(read_sweep_csv(out3.read_text())) == 2


def test_sweep_requires_parameters(tmp_path):
    with pytest.raises(ValueError, match="missing sweep parameters"):
        main(["sweep", "--n", "10", "--out", str(tmp_path / "x.csv")])


def test_summarize_outputs(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        "ensemble = gaussian\nn = 48\ns = 3\nr = 1\ndelta = 0.05\n"
        "alpha = 0.7\nm_grid = 24,48\ntrials = 2\nseed = 11\n"
    )
    sweep_csv = tmp_path / "sweep.csv"
    run_cli(["sweep", "--config", str(cfg), "--out", str(sweep_csv)])
    report = tmp_path / "report.txt"
    agg = tmp_path / "agg.csv"
    run_cli(["summarize", "--input", str(sweep_csv),
             "--out-text", str(report), "--out-csv", str(agg)])
    assert "log-log slope" in report.read_text()
    assert agg.read_text().splitlines()[0].startswith("m,lambda,trials")


def test_module_entry_point(tmp_path):
    env = dict(os.environ, PYTHONPATH=SRC)
    out = subprocess.run(
        [sys.executable, "-m", "sdcs", "gen", "--kind", "matrix",
         "--m", "2", "--n", "3", "--seed", "1"],
        capture_output=True, text=True, env=env,
    )
    assert out.returncode == 0
    assert out.stdout.splitlines()[0] == "2 3"
