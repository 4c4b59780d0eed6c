import json

import pytest

from lstar.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def bdi12(tmp_path, capsys):
    path = tmp_path / "bdi12.json"
    assert run(capsys, "make", "--family", "bdi", "--noncompact", "--p", 1, "--q", 2, "-o", path)[0] == 0
    return path


def test_make_examples(tmp_path, capsys, bdi12):
    assert json.loads(bdi12.read_text())["dim"] == 3
    ai = tmp_path / "ai.json"
    assert run(capsys, "make", "--family", "ai", "--compact", "--n", 2, "-o", ai)[0] == 0
    assert json.loads(ai.read_text())["dim"] == 4


def test_make_invalid_family(capsys):
    code, _, err = run(capsys, "make", "--family", "xyz", "--n", 2)
    assert code == 2 and "unknown family" in err


def test_check_passes_and_reports(capsys, bdi12):
    code, out, _ = run(capsys, "check", bdi12)
    assert code == 0
    rep = json.loads(out)
    assert rep["lstar"]["passed"] and rep["dims"] == [3, 1, 2]


def test_check_flags_broken_gram(tmp_path, capsys, bdi12):
    d = json.loads(bdi12.read_text())
    d["gram"][0][0] += 0.1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, _, err = run(capsys, "check", bad)
    assert code == 1 and "lstar" in err


def test_unreadable_input(tmp_path, capsys):
    assert run(capsys, "check", tmp_path / "missing.json")[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert run(capsys, "check", junk)[0] == 2
    junk.write_text('{"dim": 2}')
    assert run(capsys, "check", junk)[0] == 2


def test_curvature_label(capsys, bdi12):
    code, out, _ = run(capsys, "curvature", bdi12)
    assert code == 0 and json.loads(out)["certificate"]["label"] == "NPCO"


def test_dual_twice_is_identity(tmp_path, capsys, bdi12):
    d1, d2 = tmp_path / "d1.json", tmp_path / "d2.json"
    assert run(capsys, "dual", bdi12, "-o", d1)[0] == 0
    assert run(capsys, "dual", d1, "-o", d2)[0] == 0
    assert d2.read_bytes() == bdi12.read_bytes()
    assert run(capsys, "check", d1)[0] == 0


def test_decompose_and_rank(capsys, bdi12):
    code, out, _ = run(capsys, "decompose", bdi12)
    rep = json.loads(out)
    assert code == 0 and rep["sign_split"]["dims"] == [0, 0, 2]
    code, out, _ = run(capsys, "rank", bdi12)
    assert code == 0 and json.loads(out)["rank"] == 1


def test_reconstruct(tmp_path, capsys, bdi12):
    data = tmp_path / "R.json"
    assert run(capsys, "curvature", bdi12, "--data-out", data)[0] == 0
    rec = tmp_path / "rec.json"
    code, out, _ = run(capsys, "reconstruct", data, "--sign", "npco", "-o", rec)
    assert code == 0 and json.loads(out)["k_dim"] == 1
    assert run(capsys, "check", rec)[0] == 0
    assert run(capsys, "reconstruct", data, "--sign", "nnco")[0] == 2


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "cat0-sweep", "--r", 1, "--alpha", 0.3, "--lambdas", "1e-2,1e-3,1e-4")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 4
    comp = [float(l.split(",")[3]) for l in lines[1:]]
    assert comp == sorted(comp) and len(set(comp)) == 3


def test_exp_demo(capsys):
    code, out, _ = run(capsys, "exp-demo", "--lambdas", "1e-8")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["exp_distance"] >= 0.5 and row["cone_distance"] <= 1e-3


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["reconstruct", "x.json", "--sign", "bogus"])
    assert e.value.code == 2
