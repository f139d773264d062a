import csv
import io
import subprocess
import sys

import pytest

from liyorke import cli


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_cf_convergents(capsys):
    code, out, err = run(["cf", "--theta", "sqrt2", "--depth", "6"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0] == ["k", "a_k", "p", "q", "signed_err"]
    assert [(int(r[2]), int(r[3])) for r in table[1:]] == [
        (1, 1), (3, 2), (7, 5), (17, 12), (41, 29), (99, 70)]
    assert "convergents=6" in err


def test_pair_writes_series_and_verdict(tmp_path, capsys):
    path = tmp_path / "pair.csv"
    code, out, _ = run(["pair", "--system", "disk-f", "--family", "certified", "--offsets", "0,1",
                        "--horizon", "10000", "-o", str(path)], capsys)
    assert code == 0
    assert "verdict=Pair" in out
    table = rows(path.read_text())
    assert table[0] == ["index", "n", "distance", "is_witness", "witness_kind"]
    kinds = {r[4] for r in table[1:] if r[3] == "1"}
    assert "near_zero" in kinds and "near_half" in kinds
    assert [int(r[0]) for r in table[1:]] == list(range(len(table) - 1))


def test_pair_other_systems(capsys):
    code, _, err = run(["pair", "--system", "plane-g", "--horizon", "100"], capsys)
    assert code == 0 and "verdict=NotPair" in err
    code, _, err = run(["pair", "--system", "disk-f-inv", "--horizon", "100"], capsys)
    assert code == 0 and "verdict=NotPair" in err


def test_conjugacy_summary(capsys):
    code, _, err = run(["conjugacy", "--grid", "100x100", "--rmax", "0.99"], capsys)
    assert code == 0
    fields = dict(kv.split("=") for kv in err.split())
    assert float(fields["max_residual"]) <= 1e-10
    assert float(fields["transport_residual"]) <= 1e-8


def test_scrambled(capsys):
    code, out, err = run(["scrambled", "--count", "3"], capsys)
    assert code == 0 and "Pair=3" in err
    assert len(rows(out)) == 4


def test_operator(capsys):
    code, out, _ = run(["operator", "--blocks", "2", "--n-max", "50"], capsys)
    assert code == 0
    table = rows(out)
    assert table[1][:5] == ["1", "0.025", "43", "44", "88"]


def test_orbit(capsys):
    code, out, _ = run(["orbit", "--system", "plane-g", "--modulus", "1", "--horizon", "2"], capsys)
    assert code == 0
    table = rows(out)
    assert float(table[2][1]) == pytest.approx(2.718281828459045, rel=1e-15)


def test_exit_codes(capsys):
    assert run(["nope"], capsys)[0] == 1
    assert run(["cf", "--bogus", "1"], capsys)[0] == 1
    assert run(["cf", "--depth", "x"], capsys)[0] == 1
    code, _, err = run(["orbit", "--modulus", "2"], capsys)
    assert code == 1 and "liyorke.plane" in err
    code, _, err = run(["cf", "--theta", "0.5", "--error", "0.3"], capsys)
    assert code == 2 and "liyorke.diophantine" in err
    code, _, err = run(["orbit", "--system", "plane-g", "--horizon", "800"], capsys)
    assert code == 3 and "n = 711" in err and "horizon" in err
    code, _, err = run(["orbit", "--horizon", "20000", "--precision", "16"], capsys)
    assert code == 2


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# convergents\ntheta = golden\ndepth = 4\n")
    code, out, _ = run(["cf", "--config", str(cfg)], capsys)
    assert code == 0 and len(rows(out)) == 5
    code, out, _ = run(["cf", "--config", str(cfg), "--depth", "2"], capsys)
    assert len(rows(out)) == 3
    cfg.write_text("thetaa = golden\n")
    code, _, err = run(["cf", "--config", str(cfg)], capsys)
    assert code == 1 and "thetaa" in err
    code, _, _ = run(["cf", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == 1


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.PRECISION_ENV, "16")
    assert run(["orbit", "--horizon", "20000", "--stride", "5000"], capsys)[0] == 2
    monkeypatch.setenv(cli.PRECISION_ENV, "banana")
    assert run(["orbit"], capsys)[0] == 1


def test_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["scrambled", "--family", "random", "--count", "3", "--seed", "9",
                    "--horizon", "2000", "-o", str(p)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "liyorke", "cf", "--depth", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "k,a_k,p,q,signed_err"
