"""Command-line harness: specs, outputs, manifests, exit codes, replay."""

import datetime
import hashlib
import json
import os

import numpy as np
import pytest

import cayleyqe as cq
from cayleyqe.cli import main, parse_group_spec


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def file_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# group specs


def test_parse_group_spec_catalog_routes():
    group, gens = parse_group_spec("cyclic:12")
    assert group.order == 12 and gens is None
    group, _ = parse_group_spec("abelian:2,5")
    assert group.order == 10
    group, _ = parse_group_spec("dicyclic:2")
    assert group.order == 8


def test_parse_group_spec_product_folding():
    group, _ = parse_group_spec("product:symmetric:3,symmetric:3")
    assert group.order == 36
    # a parameter without a colon belongs to the previous factor
    group, _ = parse_group_spec("product:abelian:2,2,cyclic:3")
    assert group.order == 12
    assert "Z/2 x Z/2" in group.name


def test_parse_group_spec_file_route(tmp_path):
    g = cq.catalog_group("dihedral", 4)
    path = tmp_path / "d4.json"
    cq.save_group(g, path, gens=cq.genset(g, g.default_gens))
    loaded, gens = parse_group_spec(str(path))
    assert loaded.order == 8
    assert gens is not None and set(gens.elements) == set(g.default_gens)


def test_parse_group_spec_rejects_malformed():
    with pytest.raises(ValueError, match="unknown group spec"):
        parse_group_spec("sporadic:1")
    with pytest.raises(ValueError, match="missing parameters"):
        parse_group_spec("cyclic")
    with pytest.raises(ValueError, match="integers"):
        parse_group_spec("cyclic:x")
    with pytest.raises(ValueError, match="two factors"):
        parse_group_spec("product:cyclic:5")


# ---------------------------------------------------------------------------
# build command


def test_build_writes_reports_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(
        ["build", "--group", "symmetric:3", "--seed", "7", "--trials", "20", "--out", str(out)]
    )
    assert code == 0
    assert "built eigenbasis" in capsys.readouterr().out
    for name in ("manifest.json", "basis.json", "report.csv", "report.json"):
        assert (out / name).exists()
    report = read_json(out / "report.json")
    assert report["order"] == 6
    assert report["seed"] == 7
    assert report["num_functions"] == 20
    assert report["mean_deviation"] <= report["sup_estimate"] + 1e-12
    manifest = read_json(out / "manifest.json")
    assert manifest["version"] == cq.__version__
    assert manifest["command"] == "build"
    assert manifest["config"]["group"] == "symmetric:3"
    assert manifest["seed"] == 7
    datetime.datetime.fromisoformat(manifest["started_at"])  # parseable timestamp
    # csv: header plus one row per test function
    lines = (out / "report.csv").read_text().splitlines()
    assert lines[0] == "function_id,deviation"
    assert len(lines) == 21
    # stored basis reloads against the right group
    basis = cq.load_basis(cq.catalog_group("symmetric", 3), out / "basis.json")
    assert cq.gram_defect(basis) <= 1e-9


def test_build_entropy_seed_is_recorded_and_fresh(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["build", "--group", "cyclic:6", "--trials", "5", "--out", str(out1)]) == 0
    assert main(["build", "--group", "cyclic:6", "--trials", "5", "--out", str(out2)]) == 0
    seed1 = read_json(out1 / "manifest.json")["seed"]
    seed2 = read_json(out2 / "manifest.json")["seed"]
    for seed in (seed1, seed2):
        assert isinstance(seed, int) and 0 <= seed < 2**63
    assert seed1 != seed2


def test_build_product_sup_below_predicted_scale(tmp_path):
    out = tmp_path / "run"
    code = main(
        ["build", "--group", "product:symmetric:3,symmetric:3", "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    report = read_json(out / "report.json")
    assert report["order"] == 36
    assert report["sup_estimate"] < report["predicted_bound"]


def test_build_accepts_explicit_gens(tmp_path):
    out = tmp_path / "run"
    code = main(
        ["build", "--group", "cyclic:6", "--gens", "1,5", "--seed", "0", "--trials", "5", "--out", str(out)]
    )
    assert code == 0
    assert read_json(out / "report.json")["generators"] == [1, 5]


def test_build_file_group_without_gens_requires_flag(tmp_path, capsys):
    table = cq.catalog_group("cyclic", 6)
    raw = cq.group_from_table(table.mul, 0, name="opaque")
    path = tmp_path / "opaque.json"
    cq.save_group(raw, path)  # no stored generating set
    code = main(["build", "--group", str(path), "--out", str(tmp_path / "run")])
    assert code == 2
    err = capsys.readouterr().err
    assert "NotGenerating" in err and "--gens" in err


def test_build_huge_order_is_rejected_cleanly(tmp_path, capsys):
    # Orders beyond the dense-table cap must fail fast with a named
    # validation error, not an out-of-memory crash.
    code = main(
        ["build", "--group", "cyclic:9999999999", "--out", str(tmp_path / "run")]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "error: ParamOutOfRange" in err and "catalog cap" in err


# ---------------------------------------------------------------------------
# concentration command


def test_concentration_second_moment(tmp_path, capsys):
    out = tmp_path / "sm"
    code = main(
        ["concentration", "--preset", "smA-d2", "--trials", "2000", "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    assert "second moment" in capsys.readouterr().out
    result = read_json(out / "result.json")
    assert result["kind"] == "second_moment"
    assert result["exact"] == pytest.approx(1.0 / 3.0)
    assert abs(result["empirical"] - result["exact"]) <= 5 * result["stderr"]


def test_concentration_tail_with_betas(tmp_path):
    out = tmp_path / "tail"
    code = main(
        [
            "concentration", "--preset", "tail-sum2", "--trials", "500",
            "--beta", "2,2.5", "--seed", "3", "--out", str(out),
        ]
    )
    assert code == 0
    result = read_json(out / "result.json")
    betas = [row["beta"] for row in result["rows"] if not row["curiosity"]]
    assert betas == [2.0, 2.5]
    lines = (out / "tail.csv").read_text().splitlines()
    assert lines[0] == "beta,frequency,bound,stderr,curiosity"
    assert len(lines) == 1 + 2 + len(cq.CURIOSITY_BETAS)


def test_concentration_lipschitz(tmp_path):
    out = tmp_path / "lip"
    code = main(
        ["concentration", "--preset", "lip-d2", "--trials", "300", "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    result = read_json(out / "result.json")
    assert result["kind"] == "lipschitz"
    assert result["max_ratio"] <= 1.0 + 1e-8


def test_concentration_error_exit_codes(tmp_path, capsys):
    code = main(["concentration", "--preset", "nope", "--out", str(tmp_path / "x")])
    assert code == 2
    assert "error: ValueError" in capsys.readouterr().err
    code = main(
        ["concentration", "--preset", "tail-sum2", "--beta", "1.5", "--out", str(tmp_path / "y")]
    )
    assert code == 2
    assert "curiosity" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# deloc command


def test_deloc_writes_full_report(tmp_path, capsys):
    out = tmp_path / "deloc"
    code = main(
        [
            "deloc", "--base", "symmetric:3", "--p", "5",
            "--trials", "4", "--seed", "3", "--out", str(out),
        ]
    )
    assert code == 0
    assert "product S_3 x Z/5" in capsys.readouterr().out
    for name in ("manifest.json", "spectrum.json", "spectrum.csv", "ratios.csv", "deloc.json"):
        assert (out / name).exists()
    spectrum = read_json(out / "spectrum.json")
    assert spectrum["order"] == 30
    assert spectrum["kernel_dim"] == 4
    assert len(spectrum["products"]) == 6
    deloc = read_json(out / "deloc.json")
    assert deloc["witness_basis"] == "randomized-eigenbasis"
    assert deloc["m_value"] >= 1.0 - 1e-12
    assert 0.0 <= deloc["lower_witness"] <= 1.0
    assert deloc["collisions"] == 0
    lines = (out / "ratios.csv").read_text().splitlines()
    assert lines[0] == "eigenvalue,multiplicity,ratio_bound"
    assert len(lines) == 1 + len(deloc["entries"])


def test_deloc_error_exit_codes(tmp_path, capsys):
    code = main(["deloc", "--base", "cyclic:2", "--p", "4", "--out", str(tmp_path / "x")])
    assert code == 2
    assert "error: NotPrime" in capsys.readouterr().err
    code = main(
        ["deloc", "--base", "cyclic:8", "--gens", "2,6", "--p", "5", "--out", str(tmp_path / "y")]
    )
    assert code == 2
    assert "error: NotGenerating" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# I/O failures and replay


def test_unwritable_output_exits_three(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    out = blocker / "sub"  # parent is a regular file
    code = main(["build", "--group", "cyclic:4", "--seed", "0", "--trials", "2", "--out", str(out)])
    assert code == 3
    assert "io error" in capsys.readouterr().err


def test_replay_missing_manifest_exits_three(tmp_path, capsys):
    code = main(["replay", str(tmp_path / "absent" / "manifest.json")])
    assert code == 3
    assert "io error" in capsys.readouterr().err


def test_replay_reproduces_outputs_byte_for_byte(tmp_path):
    first = tmp_path / "first"
    code = main(
        ["build", "--group", "dihedral:4", "--seed", "11", "--trials", "16", "--out", str(first)]
    )
    assert code == 0
    second = tmp_path / "second"
    code = main(["replay", str(first / "manifest.json"), "--out", str(second)])
    assert code == 0
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        if name == "manifest.json":
            continue
        assert file_digest(first / name) == file_digest(second / name), name
    # the replay manifest repeats the run parameters
    m1 = read_json(first / "manifest.json")
    m2 = read_json(second / "manifest.json")
    assert m1["command"] == m2["command"]
    assert m1["config"] == m2["config"]
    assert m1["seed"] == m2["seed"]


def test_replay_default_output_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["concentration", "--preset", "smA-d1", "--trials", "50", "--seed", "2", "--out", "run1"]) == 0
    assert main(["replay", os.path.join("run1", "manifest.json")]) == 0
    assert (tmp_path / "run1-replay" / "result.json").exists()
    assert file_digest(tmp_path / "run1" / "result.json") == file_digest(
        tmp_path / "run1-replay" / "result.json"
    )


def test_deloc_replay_round_trip(tmp_path):
    first = tmp_path / "d1"
    code = main(
        ["deloc", "--base", "cyclic:8", "--p", "5", "--trials", "3", "--seed", "9", "--out", str(first)]
    )
    assert code == 0
    second = tmp_path / "d2"
    assert main(["replay", str(first / "manifest.json"), "--out", str(second)]) == 0
    for name in ("spectrum.json", "spectrum.csv", "ratios.csv", "deloc.json"):
        assert file_digest(first / name) == file_digest(second / name), name
