import json

import pytest

from gsci.cli import DEFAULT_KS, UsageError, main, read_config, resolve_config


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("cmd", ["lemmas", "radial", "sweep"])
def test_commands_pass(cmd, capsys):
    code, out, _ = run([cmd], capsys)
    assert code == 0
    assert out.rstrip().endswith("passed")


def test_sci_json(capsys):
    code, out, _ = run(["sci", "--fixture", "mobius", "--grid", "128", "--z0", "0.3,0.1", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and doc["failed"] is None
    assert doc["config"]["grid"] == 128
    assert doc["config"]["z0"] == [0.3, 0.1]


def test_sci_exp2v(capsys):
    code, out, _ = run(["sci", "--grid", "128", "--norm", "EXP_2V", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["sci"]["norm"] == "EXP_2V"


def test_broken_pipeline_exit_1(capsys):
    code, _, err = run(["pipeline", "--fixture", "broken", "--grid", "128"], capsys)
    assert code == 1
    assert "hypothesis.source_ordering" in err


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["sci", "--grid", "abc"],
    ["sci", "--grid", "63"],
    ["sci", "--k", "0.5", "--c", "0.1"],
    ["sci", "--fixture", "torus"],
    ["sci", "--norm", "EXP_3W"],
    ["bol", "--z0", "1.5"],
    ["sweep", "--b", "0.5"],
    ["sci", "--config", "/nonexistent/file"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("error:")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngrid = 128\nk = 0.6  # trailing\nlambda = 2\n")
    c = resolve_config(["sci", "--config", str(cfg)])
    assert (c.grid, c.k, c.lam) == (128, (0.6,), 2.0)
    c = resolve_config(["sci", "--config", str(cfg), "--grid", "64"])
    assert c.grid == 64 and c.k == (0.6,)
    # a flag --c replaces a config k
    c = resolve_config(["sci", "--config", str(cfg), "--c", "0.2"])
    assert c.c == 0.2


def test_command_defaults():
    assert resolve_config(["bol"]).grid == 512
    assert resolve_config(["sweep"]).k == DEFAULT_KS
    assert resolve_config(["sweep", "--k", "0.2,0.4"]).k == (0.2, 0.4)


@pytest.mark.parametrize("text", ["grid 128\n", "= 3\n", "colour = red\n", "grid = many\n"])
def test_malformed_config(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    with pytest.raises(UsageError):
        read_config(str(cfg))


def test_sweep_csv_deterministic(tmp_path, capsys):
    outs = []
    for i, workers in enumerate(["1", "1", "4"]):
        path = tmp_path / f"s{i}.csv"
        assert main(["sweep", "--method", "radial", "--nodes", "256", "--format", "csv",
                     "--workers", workers, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1] == outs[2]
    assert outs[0].startswith(b"# gsci sweep csv v1\n")


def test_symmetrize_table(capsys):
    code, out, _ = run(["symmetrize", "--grid", "128", "--format", "csv", "--tol", "0.1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[2] == "r,phi,psi"
    assert len(lines) > 10


def test_out_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    assert main(["lemmas", "--format", "json", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["command"] == "lemmas"
