import json
import subprocess
import sys

import pytest

from coherence_diffusion.cli import main

SMALL = {"kind": "ZeroEmissionZone", "steps": 6, "replicates": 2, "seed": 3,
         "campaign": {"every": 3},
         "population": {"n": 30, "profiles": "calibrated", "seed": 8}}


@pytest.fixture
def cfg_files(tmp_path):
    paths = {}
    for name, kind in (("ref", "Reference"), ("zez", "ZeroEmissionZone")):
        data = dict(SMALL, name=name, kind=kind)
        if kind == "Reference":
            data.pop("campaign")
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        paths[name] = p
    return paths


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_run_is_byte_identical(tmp_path, cfg_files):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--scenario", str(cfg_files["ref"]), "--seed", "42",
                     "--out", str(out)]) == 0
    assert _files(a) == _files(b)
    assert set(_files(a)) == {"ref.series.csv", "ref.averaged.csv",
                              "ref.manifest.json"}
    man = json.loads((a / "ref.manifest.json").read_text())
    assert man["seed"] == 42 and len(man["config_sha256"]) == 64
    assert "version" in man


def test_parallel_flag_does_not_change_results(tmp_path, cfg_files):
    main(["run", "--scenario", str(cfg_files["zez"]), "--out", str(tmp_path / "a")])
    main(["run", "--scenario", str(cfg_files["zez"]), "--out", str(tmp_path / "b"),
          "--parallel-replicates", "2"])
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_sweep_writes_five_rows(tmp_path, cfg_files):
    assert main(["sweep", "--scenario", str(cfg_files["zez"]), "--mu",
                 "empirical,0.25,0.5,0.75,1.0", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "zez.sweep.csv").read_text().splitlines()
    assert lines[0] == "setting,replicate,ev_share"
    assert [l.split(",")[0] for l in lines[1:]] == [
        "empirical", "0.25", "0.5", "0.75", "1.0"]


def test_compare_files(tmp_path, cfg_files):
    for name in ("ref", "zez"):
        main(["run", "--scenario", str(cfg_files[name]), "--out", str(tmp_path)])
    assert main(["compare", str(tmp_path / "ref.averaged.csv"),
                 str(tmp_path / "zez.averaged.csv"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "compare.csv").read_text().splitlines()
    assert lines[0] == "scenario,step,group,ev_delta_pp"
    assert len(lines) - 1 == 6 * len({l.split(",")[2] for l in lines[1:]})


def test_generate_and_run_from_file(tmp_path, cfg_files):
    assert main(["generate", "--n", "30", "--seed", "8", "--out",
                 str(tmp_path / "g")]) == 0
    pop = tmp_path / "g" / "population.json"
    assert pop.is_file() and (tmp_path / "g" / "edges.txt").is_file()
    assert main(["run", "--scenario", str(cfg_files["ref"]), "--population",
                 str(pop), "--out", str(tmp_path / "r1")]) == 0
    # the generator spec in the config builds the same population
    assert main(["run", "--scenario", str(cfg_files["ref"]),
                 "--out", str(tmp_path / "r2")]) == 0
    assert (tmp_path / "r1" / "ref.series.csv").read_bytes() == \
        (tmp_path / "r2" / "ref.series.csv").read_bytes()


def test_calibrate_writes_profiles(tmp_path, capsys):
    assert main(["calibrate", "--n", "80", "--budget", "3", "--seed", "1",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "calibration.json").read_text())
    assert report["iterations"] <= 3
    assert (tmp_path / "profiles.json").is_file()
    if not report["converged"]:
        assert "warning: calibration" in capsys.readouterr().err


def test_validate_tables(tmp_path, capsys):
    assert main(["validate-tables"]) == 0
    out = capsys.readouterr().out
    assert "+8.30" in out and "-0.85" in out
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kind": "Reference", "influence": {
        "pi": [[8.3, 7.3, 4.0, -4.1, -3.0], [-0.3, -0.6, -1.3, -0.3, -9.0]]}}))
    assert main(["validate-tables", "--scenario", str(p)]) == 1
    assert "override pi[1][4]: -2.0 -> -9.0" in capsys.readouterr().out


@pytest.mark.parametrize("argv, kind, code", [
    (["run", "--scenario", "nope.json"], "config", 2),
    (["run", "--scenario"], "usage", 2),
    (["frobnicate"], "usage", 2),
    (["validate-tables", "--bogus"], "usage", 2),
    (["compare", "a.csv"], "usage", 2),
    (["compare", "a.csv", "b.csv"], "missing-file", 1),
])
def test_errors_are_one_line(argv, kind, code, capsys):
    assert main(argv) == code
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith(f"error: {kind}: ")


def test_env_var_sets_output_dir(tmp_path, cfg_files, monkeypatch):
    monkeypatch.setenv("COHERENCE_DIFFUSION_OUT", str(tmp_path / "env"))
    assert main(["run", "--scenario", str(cfg_files["ref"])]) == 0
    assert (tmp_path / "env" / "ref.averaged.csv").is_file()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "coherence_diffusion",
                        "validate-tables"], capture_output=True, text=True)
    assert r.returncode == 0 and "alpha" in r.stdout
