import subprocess
import sys

import pytest

from parainterp.cli import main, parse_indices


def run(*args):
    return subprocess.run([sys.executable, "-m", "parainterp", *args],
                          capture_output=True, text=True, timeout=120)


def call(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gram_quon(capsys):
    code, out, _ = call(capsys, "gram", "--preset", "quon", "--q", "0.5", "--indices", "i1,i2")
    assert code == 0
    assert out.splitlines()[-4:] == ["0,0,1,0", "0,1,0.5,0", "1,0,0.5,0", "1,1,1,0"]


def test_gram_para_identity(capsys):
    code, out, _ = call(capsys, "gram", "--preset", "para", "--epsilon", "1", "--p", "2",
                        "--indices", "i1,i2")
    assert out.splitlines()[-4:] == ["0,0,1,0", "0,1,0,0", "1,0,0,0", "1,1,1,0"]


def test_gram_qfile_matches_oracle(tmp_path, capsys):
    qfile = tmp_path / "q.toml"
    qfile.write_text("q = [[1, 2, 0.3, 0.2], [1, 3, -0.1, 0.4], [2, 3, 0.5, 0.0],"
                     " [1, 1, 0.2, 0.0], [2, 2, -0.3, 0.0], [3, 3, 0.1, 0.0]]\n")
    code, out, _ = call(capsys, "verify", "gram", "--qfile", str(qfile), "--p", "3",
                        "--indices", "i1,i2,i3")
    assert code == 0
    assert "rank=6 dim=6" in out


@pytest.mark.parametrize("word,flags,expected", [
    ("a(i1) a+(i1)", [], "1+0i"),
    ("a(i2) a(i1) a+(i2) a+(i1)", ["--preset", "quon", "--q", "0.3"], "0.29999999999999999+0i"),
    ("b(i1,g1) b+(i1,g2)", [], "0+0i"),
])
def test_vev(capsys, word, flags, expected):
    code, out, _ = call(capsys, "vev", word, *flags)
    assert code == 0 and out.strip() == expected


def test_spectrum_p1_endpoints(capsys):
    code, out, _ = call(capsys, "spectrum", "--preset", "quon", "--indices", "i1,i2",
                        "--grid=-1:1:3")
    assert out == "param,min_eig,rank\n-1,0,1\n0,1,2\n1,0,1\n"


def test_spectrum_p2_nonnegative(capsys):
    code, out, _ = call(capsys, "spectrum", "--p", "2", "--grid=-1:1:11", "--threads", "2")
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert all(float(r[1]) >= -1e-9 for r in rows)


def test_rank_scan_constant(capsys):
    code, out, _ = call(capsys, "rank-scan", "--p", "2", "--indices", "i1,i2", "--grid", "0:1:5")
    assert [line.split(",")[2] for line in out.splitlines()[1:]] == ["2"] * 5


@pytest.mark.parametrize("args,needle", [
    (["expansion", "--p", "2", "--q", "0.5"], "expansion.closed_form PASS"),
    (["trilinear", "--epsilon", "-1", "--p", "2"], "trilinear PASS"),
    (["jw", "--lambda", "0", "--mu", "1"], "jw.green_algebra PASS"),
    (["nonclosure", "--q", "-0.5", "--p", "3", "--particles", "2"], "nonclosure PASS"),
    (["phi", "--q", "0.3", "--p", "3", "--indices", "i1,i2,i1"], "phi PASS"),
])
def test_verify_pass(capsys, args, needle):
    code, out, _ = call(capsys, "verify", *args)
    assert code == 0, out
    assert needle in out
    if args[0] == "expansion":
        coeff = float(out.split("coefficient=")[1].split()[0])
        assert coeff == pytest.approx(0.125, abs=1e-12)


def test_verify_failure_exit_code(capsys):
    code, out, _ = call(capsys, "verify", "trilinear", "--q", "0.5", "--p", "2", "--particles", "2")
    assert code == 2  # sign of the trilinear relation is undefined off the para points
    code, out, _ = call(capsys, "verify", "jw", "--lambda", "0.3", "--mu", "1", "--phi", "0.4")
    assert code == 1 and "jw.green_algebra FAIL" in out


@pytest.mark.parametrize("args,code", [
    (["gram", "--q", "2"], 2),
    (["gram", "--indices", "i1,i2,i3,i4,i5,i6,i7,i8"], 3),
    (["gram", "--indices", "i0"], 2),
    (["vev", "x(i1)"], 2),
    (["gram", "--config", "/nonexistent.toml"], 2),
])
def test_error_codes(capsys, args, code):
    assert call(capsys, *args)[0] == code


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[spec]\nfamily = "green_quon"\norder = 3\nsites = 3\n'
                   'q = [[1, 1, 0.25, 0.0], [1, 2, 0.25, 0.0], [1, 3, 0.25, 0.0],'
                   ' [2, 2, 0.25, 0.0], [2, 3, 0.25, 0.0], [3, 3, 0.25, 0.0]]\n'
                   '[run]\nformat = "toml"\n')
    code, out, _ = call(capsys, "gram", "--config", str(cfg), "--indices", "i1,i2")
    assert code == 0 and out.startswith("[gram]")
    assert "[0, 1, -0.083333333333333329, 0.0]" in out


def test_deterministic_and_roundtrip(tmp_path):
    args = ["gram", "--preset", "green", "--q", "0.37", "--p", "3", "--indices", "i1,i2,i3"]
    first = run(*args)
    second = run(*args)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    csv = tmp_path / "g.csv"
    csv.write_text(first.stdout)
    toml = tmp_path / "g.toml"
    assert run("convert", str(csv), "--format", "toml", "--out", str(toml)).returncode == 0
    back = run("convert", str(toml), "--format", "csv")
    assert back.stdout == first.stdout


def test_parse_indices():
    assert parse_indices("i1, i3,2") == (0, 2, 1)
