import csv
import hashlib
import json
import os

import pytest

from sbfilc.cli import main, parse_sweep
from sbfilc.config import PRESETS, load_config, merge, parse_config
from sbfilc.errors import ConfigError

SMALL_SBF = """
method: sbf
trials: 4
basis: {kind: fir, n_theta_total: 20, preview: 3}
sparsity: 3
schedule:
  - {profile: slow, first: 1, last: 2}
  - {profile: fast, first: 3, last: 4}
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------- config
def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg.N == 500 and cfg.n_trials == 20 and cfg.method == "no"
    assert cfg.switch_trials == [11]
    assert cfg.noise_std == pytest.approx(1e-7)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    cfg = load_config(preset=name)
    assert cfg.method == {"E1": "sbf", "E2": "bf", "E3": "no_fir", "E4": "no"}[name]
    assert load_config(preset=f"{name}-{cfg.method}").method == cfg.method


def test_minimal_valid_config():
    cfg = parse_config(SMALL_SBF)
    assert cfg.n_basis == 20 and cfg.n_sparse == 3 and cfg.switch_trials == [3]


@pytest.mark.parametrize("text, key", [
    ("trials: 0\nschedule: [{profile: slow, first: 1, last: 1}]", "trials"),
    ("schedule: [{profile: slow, first: 1, last: 12}, {profile: fast, first: 10, last: 20}]",
     "schedule"),
    ("method: no_fir\nbasis: {n_theta_total: 20, preview: 20}", "basis"),
    ("method: no_fir\nbasis: {n_theta_total: 20, preview: 25}", "basis"),
    ("method: sbf\nsparsity: 0", "sparsity"),
    ("method: sbf\nsparsity: 201", "sparsity"),
    ("noise: {std: -1.0}", "noise.std"),
    ("noise: {relative: -1.0}", "noise.relative"),
    ("weights: {e: 0.0}", "weights.e"),
    ("weights: {e: [1.0, 2.0]}", "weights.e"),
    ("trial_length: 3.5", "trial_length"),
    ("bogus: 1", "bogus"),
    ("basis: {kind: fir, width: 3}", "basis.width"),
    ("profiles: {slow: {displacement: 0.1}}", "profiles.slow.max_acceleration"),
    ("schedule: [{profile: slow, first: 1}]", "schedule[0].last"),
    ("plant: {num: [1.0], den: [0.0, 1.0]}", "plant"),
    ("controller: null", "controller"),
    ("method: bogus", "method"),
])
def test_invalid_documents_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.path == key
    assert key in str(info.value)


def test_profile_that_does_not_fit_is_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config("trial_length: 50")
    assert info.value.path.startswith("profiles.")


def test_merge_replaces_profiles_wholesale():
    out = merge({"profiles": {"a": 1, "b": 2}, "basis": {"x": 1, "y": 2}},
                {"profiles": {"c": 3}, "basis": {"y": 5}})
    assert out == {"profiles": {"c": 3}, "basis": {"x": 1, "y": 5}}


def test_parse_sweep():
    assert list(parse_sweep("n_theta=1..12")) == list(range(1, 13))
    for bad in ("n_theta=0..3", "n_theta=4..2", "k=1..3", "n_theta=1-3"):
        with pytest.raises(ConfigError):
            parse_sweep(bad)


# ---------------------------------------------------------------- CLI
def test_cli_run_preset_outputs(tmp_path):
    out = tmp_path / "e4"
    assert main(["run", "--preset", "E4", "--out", str(out)]) == 0
    files = sorted(os.listdir(out))
    assert files == ["feedforward_final.csv", "manifest.json", "summary.csv", "trials.csv"]
    trials = read_csv(out / "trials.csv")
    assert trials[0] == ["j", "reference", "error_norm", "n_nonzero", "update_time_s"]
    assert len(trials) == 21
    assert len(read_csv(out / "feedforward_final.csv")) == 501
    summary = read_csv(out / "summary.csv")
    assert summary[1][:3] == ["no", "500", "11"]


def test_values_have_seventeen_significant_digits(tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--preset", "E4", "--out", str(out)]) == 0
    rows = read_csv(out / "trials.csv")[1:]
    mantissa = rows[0][2].split("e")[0].replace(".", "").replace("-", "").lstrip("0")
    assert len(mantissa) <= 17
    for row in rows:
        assert float(row[2]) == float(format(float(row[2]), ".17g"))


def test_manifest_checksums(tmp_path):
    out = tmp_path / "m"
    assert main(["run", "--preset", "E4", "--out", str(out), "--seed", "3"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["config"]["method"] == "no"
    assert set(manifest["files"]) == {"trials.csv", "feedforward_final.csv", "summary.csv"}
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest


def test_reruns_are_byte_identical(tmp_path):
    cfg = write(tmp_path, SMALL_SBF)
    for d in ("a", "b"):
        assert main(["run", cfg, "--out", str(tmp_path / d), "--seed", "5"]) == 0
    for name in ("trials.csv", "feedforward_final.csv", "support.csv", "summary.csv",
                 "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sbf_writes_support(tmp_path):
    cfg = write(tmp_path, SMALL_SBF)
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "support.csv")
    assert rows[0] == ["j", "reference", "size", "columns"]
    assert all(int(r[2]) <= 3 for r in rows[1:])


def test_sweep_outputs(tmp_path):
    cfg = write(tmp_path, SMALL_SBF)
    out = tmp_path / "s"
    assert main(["run", cfg, "--out", str(out), "--sweep", "n_theta=1..3"]) == 0
    sweep = read_csv(out / "sweep.csv")
    assert sweep[0] == ["n_theta", "terminal_error_norm"]
    assert [r[0] for r in sweep[1:]] == ["1", "2", "3"]
    assert len(read_csv(out / "trials.csv")) == 1 + 3 * 4
    assert len(read_csv(out / "summary.csv")) == 1 + 3


def test_parallel_sweep_matches_serial(tmp_path):
    cfg = write(tmp_path, SMALL_SBF)
    assert main(["run", cfg, "--out", str(tmp_path / "a"), "--sweep", "n_theta=1..3"]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "b"), "--sweep", "n_theta=1..3",
                 "--jobs", "2"]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == \
        (tmp_path / "b" / "sweep.csv").read_bytes()


@pytest.mark.parametrize("argv", [
    ["run", "--out", "X"],
    ["run", "--preset", "E4", "--out", "X", "--sweep", "n_theta=1..3"],
    ["run", "--preset", "E1", "--out", "X", "--sweep", "n_theta=1..999"],
    ["run", "--preset", "E1", "--out", "X", "--sweep", "nonsense"],
])
def test_cli_config_errors_exit_2(tmp_path, argv, capsys):
    argv = [str(tmp_path / "o") if a == "X" else a for a in argv]
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_cli_bad_config_file_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "method: bogus\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "method" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml"), "--out", str(tmp_path / "o")]) == 2
    bad = write(tmp_path, "a: [1, 2\n", "bad.yaml")
    assert main(["run", bad, "--out", str(tmp_path / "o")]) == 2


def test_cli_solver_failure_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, "method: no_fir\nallow_pseudo_inverse: false\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "trial 1" in capsys.readouterr().err


def test_cli_unwritable_output_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--preset", "E4", "--out", str(blocker / "sub")]) == 4


def test_show_preset(capsys):
    assert main(["show-preset", "E1"]) == 0
    assert "method: sbf" in capsys.readouterr().out
