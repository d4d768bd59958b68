import json
import os

import pytest

from ainfring.cli import main

WIN = ["--pmin", "-3", "--pmax", "3", "--exp", "6"]


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    codes = {
        "geom": run("geom", *WIN, "--out", out),
        "transfer": run("transfer", "--dga", out / "p1.dga", "--max-arity", 4, "--out", out),
        "pert": run("transfer", "--dga", out / "p1.dga", "--max-arity", 4, "--contraction", "perturbed",
                    "--seed", 3, "--name", "pert", "--out", out),
        "formal": run("transfer", "--dga", out / "p1.dga", "--max-arity", 4, "--formal", "--name", "formal",
                      "--out", out),
    }
    return out, codes


def test_pipeline_exit_codes(pipeline):
    out, codes = pipeline
    assert codes == {"geom": 0, "transfer": 0, "pert": 0, "formal": 0}
    assert run("check", out / "canonical.st", "--out", out) == 0
    assert run("check", out / "canonical.tm", "--structure", out / "canonical.st", "--out", out) == 0


def test_classify_certificate_and_distinct(pipeline):
    out, _ = pipeline
    assert run("classify", "--m", out / "canonical.st", "--mprime", out / "pert.st", "--name", "cp",
               "--out", out) == 0
    assert run("check", out / "cp.cert", "--m", out / "canonical.st", "--mprime", out / "pert.st",
               "--out", out) == 0
    assert run("classify", "--m", out / "canonical.st", "--mprime", out / "formal.st", "--name", "cf",
               "--out", out) == 1


def test_massey_command(pipeline, capsys):
    out, _ = pipeline
    assert run("massey", "--dga", out / "p1.dga", "--structure", out / "canonical.st", "--out", out) == 0
    assert "Massey value: -1" in capsys.readouterr().out


def test_missing_required_flag_is_usage_error(tmp_path):
    assert run("geom", "--pmin", "-3", "--pmax", "3", "--out", tmp_path) == 2
    assert run("bogus") == 2


def test_corrupt_input_is_usage_error(pipeline, tmp_path):
    out, _ = pipeline
    text = (out / "canonical.st").read_text().replace("max_arity: 4", "max_arity: 5")
    (tmp_path / "bad.st").write_text(text.replace("sha256: ", "sha256: 0"))
    assert run("check", tmp_path / "bad.st", "--out", tmp_path) == 2


def test_unstable_window_exit_code(tmp_path):
    # outer window equal to the inner one is not a stabilization check
    assert run("hh", "--n", 2, "--q", 1, "--pmin", -2, "--pmax", 2, "--exp", 4,
               "--outer-pmin", -2, "--outer-pmax", 2, "--out", tmp_path) == 3


def test_config_prime_guard(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"field": 3, "window": {"pmin": -2, "pmax": 2, "max_arity": 4}}))
    assert run("--config", cfg, "geom", *WIN, "--out", tmp_path) == 2
    cfg.write_text(json.dumps({"field": 15}))
    assert run("--config", cfg, "geom", *WIN, "--out", tmp_path) == 2
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run("--config", cfg, "geom", *WIN, "--out", tmp_path) == 2


def test_outputs_are_deterministic(tmp_path):
    dirs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert run("geom", *WIN, "--out", d) == 0
        assert run("transfer", "--dga", d / "p1.dga", "--max-arity", 4, "--out", d) == 0
        assert run("hh", "--n", 3, "--q", 1, *WIN, "--out", d) == 0
        dirs.append(d)
    files = sorted(os.listdir(dirs[0]))
    assert files == sorted(os.listdir(dirs[1]))
    for f in files:
        assert (dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes(), f


def test_rational_field_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"field": "QQ"}))
    assert run("--config", cfg, "hh", "--n", 3, "--q", 1, *WIN, "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "HH^3_{0,1} = 1 (stabilized)" in out
    assert "mod" not in out
