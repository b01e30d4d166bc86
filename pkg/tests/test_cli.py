"""Tests for run bundles (archive CSV + metadata) and the command line."""

import json
import os

import numpy as np
import pytest

from seqtune import CorruptBundleError, archive_lines, load_bundle, save_bundle
from seqtune.cli import main

BOUNDS_CFG = """\
[run]
fun = sphere
lower = -2, -2
upper = 2, 2

[spot]
funEvals = 10
model = forest
seedSPOT = 3

[designControl]
size = 5

[modelControl]
ntree = 10

[optimizerControl]
funEvals = 25
"""


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(BOUNDS_CFG)
    return str(path)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# archive rendering and bundle round-trips


def test_archive_lines_format():
    lines = archive_lines(
        np.array([[0.5, 1.25], [0.1, -3.0]]),
        np.array([2.0, 7.5]),
        [7, None],
        np.array([1, 1]),
    )
    assert lines[0] == "x1,x2,y,seed,replicate"
    assert lines[1] == "0.5,1.25,2.0,7,1"
    assert lines[2] == "0.1,-3.0,7.5,,1"


def test_bundle_round_trip_is_exact(tmp_path):
    x = np.array([[0.1, 1.0 / 3.0], [-1e-17, 123456.789], [0.1, 1.0 / 3.0]])
    y = np.array([[np.pi], [-0.0], [1e300]])
    seeds = [5, None, 6]
    reps = np.array([1, 1, 2])
    where = str(tmp_path / "bundle")
    save_bundle(where, x, y, seeds, reps, {"note": "roundtrip"})
    back = load_bundle(where)
    assert np.array_equal(back["x"], x)
    assert np.array_equal(back["y"], y)
    assert back["seeds"] == seeds
    assert np.array_equal(back["replicates"], reps)
    assert back["meta"]["note"] == "roundtrip"
    assert back["meta"]["count"] == 3
    # saving the loaded data again reproduces the file byte for byte
    again = str(tmp_path / "bundle2")
    save_bundle(again, back["x"], back["y"], back["seeds"], back["replicates"], {})
    assert _read(os.path.join(where, "archive.csv")) == _read(
        os.path.join(again, "archive.csv")
    )


def test_bundle_prefix_lines_are_kept_verbatim(tmp_path):
    where = str(tmp_path / "bundle")
    x = np.array([[0.1], [0.2]])
    y = np.array([1.0, 2.0])
    save_bundle(where, x, y, [None, None], np.array([1, 1]), {})
    first = load_bundle(where)
    x2 = np.vstack([x, [[0.3]]])
    y2 = np.append(y, 3.0)
    save_bundle(
        where,
        x2,
        y2,
        [None] * 3,
        np.array([1, 1, 1]),
        {},
        archive_prefix=first["data_lines"],
    )
    text = _read(os.path.join(where, "archive.csv")).decode()
    lines = text.splitlines()
    assert lines[1:3] == first["data_lines"]
    assert len(lines) == 4


def test_load_rejects_missing_bundle(tmp_path):
    with pytest.raises(CorruptBundleError, match="no bundle directory"):
        load_bundle(str(tmp_path / "nope"))


def test_load_rejects_missing_files(tmp_path):
    os.makedirs(tmp_path / "b")
    with pytest.raises(CorruptBundleError, match="missing its files"):
        load_bundle(str(tmp_path / "b"))


def _write_bundle_files(tmp_path, archive_text, meta_text='{"count": 1}\n'):
    where = tmp_path / "b"
    os.makedirs(where, exist_ok=True)
    (where / "archive.csv").write_text(archive_text)
    (where / "meta.json").write_text(meta_text)
    return str(where)


def test_load_rejects_bad_metadata_json(tmp_path):
    where = _write_bundle_files(tmp_path, "x1,y,seed,replicate\n1.0,2.0,,1\n", "{oops")
    with pytest.raises(CorruptBundleError, match="unreadable metadata"):
        load_bundle(where)


def test_load_rejects_wrong_header(tmp_path):
    where = _write_bundle_files(tmp_path, "a,b,c,d\n1.0,2.0,3.0,4\n")
    with pytest.raises(CorruptBundleError, match="archive header"):
        load_bundle(where)


def test_load_rejects_short_rows(tmp_path):
    where = _write_bundle_files(tmp_path, "x1,y,seed,replicate\n1.0,2.0\n")
    with pytest.raises(CorruptBundleError, match="malformed archive row"):
        load_bundle(where)


def test_load_rejects_non_numeric_cells(tmp_path):
    where = _write_bundle_files(tmp_path, "x1,y,seed,replicate\none,2.0,,1\n")
    with pytest.raises(CorruptBundleError, match="malformed archive row"):
        load_bundle(where)


def test_load_rejects_row_count_mismatch(tmp_path):
    where = _write_bundle_files(
        tmp_path, "x1,y,seed,replicate\n1.0,2.0,,1\n", '{"count": 5}\n'
    )
    with pytest.raises(CorruptBundleError, match="metadata says 5 rows"):
        load_bundle(where)


# ---------------------------------------------------------------------------
# design command


def test_design_command_emits_a_deterministic_csv(cfg_path, tmp_path):
    out1, out2 = str(tmp_path / "d1.csv"), str(tmp_path / "d2.csv")
    assert main(["design", "--config", cfg_path, "--out", out1, "--seed", "4"]) == 0
    assert main(["design", "--config", cfg_path, "--out", out2, "--seed", "4"]) == 0
    assert _read(out1) == _read(out2)
    lines = _read(out1).decode().splitlines()
    assert lines[0] == "x1,x2"
    assert len(lines) == 6
    grid = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    assert np.all(grid >= -2.0) and np.all(grid <= 2.0)


def test_design_seed_changes_the_sample(cfg_path, tmp_path):
    out1, out2 = str(tmp_path / "d1.csv"), str(tmp_path / "d2.csv")
    main(["design", "--config", cfg_path, "--out", out1, "--seed", "4"])
    main(["design", "--config", cfg_path, "--out", out2, "--seed", "5"])
    assert _read(out1) != _read(out2)


# ---------------------------------------------------------------------------
# tune / optimize commands


def test_tune_writes_a_bundle_and_reruns_byte_identical(cfg_path, tmp_path):
    b1, b2 = str(tmp_path / "b1"), str(tmp_path / "b2")
    assert main(["tune", "--config", cfg_path, "--out", b1]) == 0
    assert main(["tune", "--config", cfg_path, "--out", b2]) == 0
    assert _read(os.path.join(b1, "archive.csv")) == _read(
        os.path.join(b2, "archive.csv")
    )
    data = load_bundle(b1)
    assert data["x"].shape == (10, 2)
    meta = data["meta"]
    assert meta["count"] == 10
    assert meta["fun"] == "sphere"
    assert meta["msg"] == "budget exhausted"
    assert meta["ybest"] == data["y"].min()


def test_tune_seed_flag_overrides_the_engine_seed(cfg_path, tmp_path):
    b1, b2 = str(tmp_path / "b1"), str(tmp_path / "b2")
    main(["tune", "--config", cfg_path, "--out", b1, "--seed", "21"])
    main(["tune", "--config", cfg_path, "--out", b2, "--seed", "22"])
    assert _read(os.path.join(b1, "archive.csv")) != _read(
        os.path.join(b2, "archive.csv")
    )


def test_optimize_forces_determinism(tmp_path):
    cfg = tmp_path / "opt.cfg"
    cfg.write_text(
        "[run]\nfun = sphere\nlower = -2, -2\nupper = 2, 2\n\n"
        "[spot]\nfunEvals = 12\nnoise = true\nseedFun = 9\nmodel = forest\n\n"
        "[designControl]\nsize = 6\n\n[modelControl]\nntree = 10\n\n"
        "[optimizerControl]\nfunEvals = 40\n"
    )
    out = str(tmp_path / "bundle")
    assert main(["optimize", "--config", str(cfg), "--out", out]) == 0
    data = load_bundle(out)
    assert data["meta"]["config"]["noise"] is False
    assert data["meta"]["config"]["optimizer"] == "local"
    assert data["seeds"] == [None] * 12


# ---------------------------------------------------------------------------
# continue command


def test_continue_extends_and_keeps_the_prefix_bytes(cfg_path, tmp_path):
    where = str(tmp_path / "bundle")
    main(["tune", "--config", cfg_path, "--out", where])
    before = _read(os.path.join(where, "archive.csv")).decode().splitlines()
    ybest_before = load_bundle(where)["meta"]["ybest"]
    assert main(["continue", "--bundle", where, "--funEvals", "14"]) == 0
    after = _read(os.path.join(where, "archive.csv")).decode().splitlines()
    assert after[: len(before)] == before
    assert len(after) == 15
    meta = load_bundle(where)["meta"]
    assert meta["count"] == 14
    assert meta["ybest"] <= ybest_before


def test_continue_into_a_fresh_directory_keeps_the_source(cfg_path, tmp_path):
    src, dst = str(tmp_path / "src"), str(tmp_path / "dst")
    main(["tune", "--config", cfg_path, "--out", src])
    before = _read(os.path.join(src, "archive.csv"))
    assert main(["continue", "--bundle", src, "--funEvals", "13", "--out", dst]) == 0
    assert _read(os.path.join(src, "archive.csv")) == before
    assert load_bundle(dst)["x"].shape == (13, 2)
    data = _read(os.path.join(dst, "archive.csv")).decode().splitlines()
    assert data[: len(before.decode().splitlines())] == before.decode().splitlines()


def test_continue_to_a_spent_budget_leaves_the_archive_alone(cfg_path, tmp_path):
    where = str(tmp_path / "bundle")
    main(["tune", "--config", cfg_path, "--out", where])
    before = _read(os.path.join(where, "archive.csv"))
    assert main(["continue", "--bundle", where, "--funEvals", "10"]) == 0
    assert _read(os.path.join(where, "archive.csv")) == before


# ---------------------------------------------------------------------------
# rsm-path and surface commands


def test_rsm_path_emits_ten_descending_steps(cfg_path, tmp_path):
    where = str(tmp_path / "bundle")
    main(["tune", "--config", cfg_path, "--out", where])
    out = str(tmp_path / "path.csv")
    assert main(["rsm-path", "--bundle", where, "--out", out]) == 0
    lines = _read(out).decode().splitlines()
    assert lines[0] == "x1,x2,y"
    assert len(lines) == 11
    vals = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    assert np.all(np.isfinite(vals))


def test_surface_grid_covers_the_bounds(cfg_path, tmp_path):
    out = str(tmp_path / "s.csv")
    assert main(["surface", "--config", cfg_path, "--grid", "3", "--out", out]) == 0
    lines = _read(out).decode().splitlines()
    assert lines[0] == "x1,x2,y"
    assert len(lines) == 10
    grid = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    assert grid[:, 0].min() == -2.0 and grid[:, 0].max() == 2.0
    assert grid[:, 1].min() == -2.0 and grid[:, 1].max() == 2.0
    # the objective itself is evaluated: corners of the sphere give 8
    corner = grid[(grid[:, 0] == 2.0) & (grid[:, 1] == 2.0)]
    assert corner[0, 2] == 8.0


def test_surface_from_a_bundle_uses_the_fitted_model(cfg_path, tmp_path):
    where = str(tmp_path / "bundle")
    main(["tune", "--config", cfg_path, "--out", where])
    out = str(tmp_path / "s.csv")
    assert main(["surface", "--bundle", where, "--grid", "4", "--out", out]) == 0
    lines = _read(out).decode().splitlines()
    assert len(lines) == 17
    vals = np.array([float(ln.split(",")[2]) for ln in lines[1:]])
    assert np.all(np.isfinite(vals))


def test_surface_requires_exactly_one_source(cfg_path, tmp_path, capsys):
    assert main(["surface"]) == 2
    where = str(tmp_path / "bundle")
    main(["tune", "--config", cfg_path, "--out", where])
    capsys.readouterr()
    assert main(["surface", "--bundle", where, "--config", cfg_path]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_surface_validates_grid_and_dims(cfg_path):
    assert main(["surface", "--config", cfg_path, "--grid", "1"]) == 2
    assert main(["surface", "--config", cfg_path, "--dims", "1,1"]) == 2
    assert main(["surface", "--config", cfg_path, "--dims", "0,2"]) == 2
    assert main(["surface", "--config", cfg_path, "--dims", "a,b"]) == 2


# ---------------------------------------------------------------------------
# exit codes


def _cfg(tmp_path, text):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    return str(path)


def test_unusable_configs_exit_2(tmp_path, capsys):
    missing_run = _cfg(tmp_path, "[spot]\nfunEvals = 5\n")
    assert main(["design", "--config", missing_run, "--out", "/dev/null"]) == 2
    assert "config error" in capsys.readouterr().err

    unknown_key = _cfg(
        tmp_path, "[run]\nfun = sphere\nlower = 0\nupper = 1\n[spot]\nbogus = 1\n"
    )
    assert main(["design", "--config", unknown_key, "--out", "/dev/null"]) == 2
    assert "bogus" in capsys.readouterr().err

    mismatched = _cfg(tmp_path, "[run]\nfun = sphere\nlower = 0, 0\nupper = 1\n")
    assert main(["design", "--config", mismatched, "--out", "/dev/null"]) == 2

    unknown_fun = _cfg(tmp_path, "[run]\nfun = mystery\nlower = 0\nupper = 1\n")
    out = str(tmp_path / "b")
    assert main(["tune", "--config", unknown_fun, "--out", out]) == 2
    assert "unknown objective" in capsys.readouterr().err

    unknown_model = _cfg(
        tmp_path,
        "[run]\nfun = sphere\nlower = 0, 0\nupper = 1, 1\n[spot]\nmodel = spline\n",
    )
    assert main(["tune", "--config", unknown_model, "--out", out]) == 2

    unparsable = _cfg(tmp_path, "run]\nfun = sphere\n")
    assert main(["design", "--config", unparsable, "--out", "/dev/null"]) == 2

    nonexistent = str(tmp_path / "missing.cfg")
    assert main(["design", "--config", nonexistent, "--out", "/dev/null"]) == 2


def test_infeasible_budget_exits_3(tmp_path, capsys):
    cfg = _cfg(
        tmp_path,
        "[run]\nfun = sphere\nlower = 0, 0\nupper = 1, 1\n"
        "[spot]\nfunEvals = 5\n[designControl]\nsize = 10\n",
    )
    assert main(["tune", "--config", cfg, "--out", str(tmp_path / "b")]) == 3
    assert "budget error" in capsys.readouterr().err


def test_corrupt_bundles_exit_4(tmp_path, capsys):
    missing = str(tmp_path / "nothing")
    assert main(["continue", "--bundle", missing, "--funEvals", "9"]) == 4
    assert "bundle error" in capsys.readouterr().err
    assert main(["rsm-path", "--bundle", missing]) == 4
    assert main(["surface", "--bundle", missing]) == 4


def test_metadata_contains_the_resolved_config(cfg_path, tmp_path):
    where = str(tmp_path / "bundle")
    main(["tune", "--config", cfg_path, "--out", where])
    meta = json.loads(_read(os.path.join(where, "meta.json")))
    assert meta["config"]["funEvals"] == 10
    assert meta["config"]["model"] == "forest"
    assert meta["lower"] == [-2.0, -2.0]
    assert meta["upper"] == [2.0, 2.0]
    assert "created" in meta and "finished" in meta
