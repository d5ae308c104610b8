from __future__ import annotations

import copy
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from packetscatter import __version__, cli, units
from packetscatter import config as cfgmod
from packetscatter import wigner as wg

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def load(name):
    return json.loads((CONFIGS / name).read_text())


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_shipped_configs_are_valid():
    for path in sorted(CONFIGS.glob("*.json")):
        assert cli.validate_file(path) == (0, []), path.name


def test_validate_negative_sigma_names_path(tmp_path, capsys):
    cfg = load("minimal_constant.json")
    cfg["particles"]["packet1"]["sigma"] = -0.001
    code = cli.main(["validate", str(write(tmp_path, cfg))])
    lines = capsys.readouterr().out.strip().splitlines()
    assert code == 1
    assert len(lines) == 1 and lines[0].startswith("particles.packet1.sigma:")


def test_validate_vortex_dim(tmp_path):
    cfg = load("minimal_constant.json")
    cfg["particles"]["packet1"] = {"kind": "vortex", "dim": 1, "sigma": 0.001, "ell": 1}
    code, problems = cli.validate_file(write(tmp_path, cfg))
    assert code == 1
    assert any("vortex requires dim=2" in p for p in problems)


def test_validate_lists_every_violation(tmp_path):
    cfg = load("minimal_constant.json")
    del cfg["seed"]
    cfg["observables"]["colour"] = "red"
    cfg["particles"]["m2"] = 0
    _, problems = cli.validate_file(write(tmp_path, cfg))
    text = "\n".join(problems)
    assert "'seed' is a required property" in text
    assert "colour" in text
    assert "particles.m2" in text
    assert len(problems) >= 3


def test_missing_mass_exits_one_without_outputs(tmp_path):
    cfg = load("minimal_constant.json")
    del cfg["particles"]["m1"]
    out = tmp_path / "out"
    assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == 1
    assert not out.exists() or not any(out.iterdir())


def test_unreadable_and_malformed_files(tmp_path):
    assert cli.validate_file(tmp_path / "nope.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, problems = cli.validate_file(bad)
    assert code == 1 and "invalid JSON" in problems[0]


def test_minimal_config_gives_zero_ratios(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["--threads", "1", "run", str(CONFIGS / "minimal_constant.json"),
                     "--out", str(out)]) == 0
    lines = (out / "asymmetry.csv").read_text().splitlines()
    assert lines[0] == ",".join(cli.ASYMMETRY_COLUMNS)
    assert len(lines) == 1 + 8
    for row in lines[1:]:
        assert float(row.split(",")[3]) == 0.0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "ok"
    assert rep["config_sha256"] == cfgmod.config_hash(load("minimal_constant.json"))
    assert abs(rep["correction"]["asymmetry"]["1.0"]["A"]) < 1e-12


def test_cat_negativity_recomputed_from_csv(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["--threads", "1", "run", str(CONFIGS / "cat_wigner.json"),
                     "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    offline = wg.negativity_volume(wg.read_csv(out / "wigner_cat.csv"))
    assert abs(offline - rep["wigner"]["cat"]["negativity_volume"]) < 1e-9
    assert rep["wigner"]["cat"]["negativity_volume"] > 0.01
    scan = rep["negativity_scan"]["negativity"]
    assert all(b >= a - 1e-12 for a, b in zip(scan, scan[1:]))
    assert rep["atom_scale"]["A"] > rep["atom_scale"]["A_point_scale"]


def test_outputs_identical_across_threads(tmp_path):
    cfg = load("cat_wigner.json")
    path = write(tmp_path, cfg)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["--threads", "1", "run", str(path), "--out", str(a)]) == 0
    assert cli.main(["--threads", "3", "run", str(path), "--out", str(b)]) == 0
    for name in ("asymmetry.csv", "wigner_cat.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_numerical_failure_exits_two_with_diagnostic(tmp_path):
    cfg = load("cat_wigner.json")
    # a position window narrower than the cat itself
    cfg["observables"]["wigner"][0]["r_range"] = [-3000.0, 3000.0]
    del cfg["observables"]["negativity_scan"]
    out = tmp_path / "out"
    assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == 2
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "numerical_failure"
    assert rep["error"] in ("GridTooCoarse", "AliasingDetected")
    assert rep["diagnostic"]
    assert sorted(os.listdir(out)) == ["report.json"]


def test_unit_systems_give_the_same_physics(tmp_path):
    nm = load("electron_log_phase.json")
    del nm["observables"]["sigma_p_sweep"]
    del nm["observables"]["oracle"]
    nat = copy.deepcopy(nm)
    nat["units"] = "natural"
    nat["particles"]["m1"] = nat["particles"]["m2"] = 0.51099895
    sx = units.nm_to_natural(0.1)
    nat["particles"]["packet1"]["sigma_x"] = sx
    nat["particles"]["packet2"]["sigma_x"] = sx
    nat["collision"]["beam_momentum"] = 0.6334
    nat["collision"]["impact"] = [sx]
    res = []
    for name, cfg in (("a", nm), ("b", nat)):
        out = tmp_path / name
        assert cli.main(["--threads", "1", "run", str(write(tmp_path, cfg, name + ".json")),
                         "--out", str(out)]) == 0
        res.append(json.loads((out / "report.json").read_text())["correction"]["asymmetry"])
    for key in res[0]:
        assert res[1][key]["A"] == pytest.approx(res[0][key]["A"], rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 1e6))
def test_unit_round_trip(value):
    u = cfgmod.Units("nm-keV")
    assert u.e_back(u.e(value)) == pytest.approx(value, rel=1e-12)
    assert u.x_back(u.x(value)) == pytest.approx(value, rel=1e-12)
    assert u.e([value, 2 * value])[1] == pytest.approx(2 * value * 1e-3, rel=1e-15)


def test_hash_is_stable_and_order_free():
    cfg = load("electron_log_phase.json")
    shuffled = json.loads(json.dumps(cfg, sort_keys=True))
    assert cfgmod.config_hash(cfg) == cfgmod.config_hash(shuffled)
    changed = copy.deepcopy(cfg)
    changed["seed"] += 1
    assert cfgmod.config_hash(changed) != cfgmod.config_hash(cfg)


def test_version_flag():
    proc = subprocess.run([sys.executable, "-m", "packetscatter", "--version"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == f"packetscatter {__version__}"
