import io
import json

import numpy as np
import pytest

from qdim.cli import main
from qdim.pressure import curve_from_csv


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_dim_json():
    code, text = run("dim", "--p", "0.4,0.35,0.25", "--r", "2", "--depth", "200")
    assert code == 0
    rec = json.loads(text)
    assert {"p", "r", "t0", "chi_r", "p_at_t0", "depth", "tolerance", "diagnostics", "residual"} <= set(rec)
    assert rec["chi_r"] == pytest.approx(0.8563156, abs=1e-6)
    assert "note" not in rec


def test_dim_mirrored_note():
    code, text = run("dim", "--p", "0.3,0.3,0.4", "--depth", "100")
    assert code == 0
    assert json.loads(text)["note"] == "standing-assumption: mirrored"


def test_p_normalization_and_rejection(capsys):
    code, text = run("dim", "--p", "0.4,0.35,0.2500000001", "--depth", "100")
    assert code == 0
    assert sum(json.loads(text)["p"]) == pytest.approx(1.0, abs=1e-15)
    assert run("dim", "--p", "0.4,0.35,0.3")[0] == 2
    assert run("dim", "--p", "0.4,0.6")[0] == 2
    assert run("dim", "--tol", "-1", "--depth", "50")[0] == 2


def test_pressure_csv_single_sign_change():
    code, text = run("pressure", "--p", "0.4,0.35,0.25", "--r", "2", "--t-grid", "0:1.2:0.05", "--depth", "200")
    assert code == 0
    rows = curve_from_csv(text)
    assert len(rows) == 25
    signs = np.sign([r[2] for r in rows])
    assert np.count_nonzero(np.diff(signs)) == 1


def test_pressure_json_lines():
    code, text = run("pressure", "--t-grid", "0:1:0.5", "--depth", "64", "--output", "json")
    assert code == 0
    recs = [json.loads(line) for line in text.splitlines()]
    assert [r["t"] for r in recs] == [0.0, 0.5, 1.0]


def test_byte_identical_output():
    args = ("antichain", "--epsilon", "0.01", "--depth", "100", "--kind", "gamma_E")
    assert run(*args) == run(*args)


def test_antichain_kinds():
    for kind in ("gamma_hat", "gamma_E", "gamma_sigma_tilde"):
        code, text = run("antichain", "--epsilon", "0.01", "--depth", "100", "--kind", kind)
        assert code == 0
        assert json.loads(text)["kind"] == kind
    assert run("antichain", "--epsilon", "0.9", "--depth", "100")[0] == 2


def test_empirical_small():
    code, text = run("empirical", "--depth", "8", "--grid", "8,16,32", "--pressure-depth", "100")
    assert code == 0
    rec = json.loads(text)
    assert rec["abs_gap"] == pytest.approx(abs(rec["slope"] - rec["chi_r"]))
    code, text = run("empirical", "--depth", "8", "--grid", "8,16", "--pressure-depth", "100", "--output", "csv")
    assert text.splitlines()[0] == "n,V,e,n_e_chi"
    assert run("empirical", "--r", "3", "--depth", "8")[0] == 2
    assert run("empirical", "--depth", "5", "--grid", "64")[0] == 2


def test_verify_exit_codes():
    code, text = run("verify", "--only", "hausdorff,stabbing")
    assert code == 0
    assert text.splitlines()[-1].startswith("2/2 checks passed")
    code, text = run("verify", "--only", "inequalities")
    assert code == 1
    assert text.startswith("FAIL explicit-constant-inequalities")


def test_config_file(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# comment\np = 0.4,0.35,0.25\nr = 1\ndepth = 120\n")
    code, text = run("dim", "--config", str(cfg))
    assert code == 0
    rec = json.loads(text)
    assert rec["r"] == 1.0 and rec["depth"] == 120
    bad = tmp_path / "bad.conf"
    bad.write_text("depth\n")
    assert run("dim", "--config", str(bad))[0] == 2
    assert run("dim", "--config", str(tmp_path / "missing.conf"))[0] == 2


def test_usage_errors():
    assert run()[0] == 2
    assert run("nope")[0] == 2
    assert run("pressure", "--t-grid", "1:0:0.1")[0] == 2
