import csv
import json
import math
import os

import numpy as np
import pytest

from sqclock import allan_deviation, octave_taus, run_clock
from sqclock.cli import main
from sqclock.config import build_clock_run, load_config
from sqclock.report import read_record


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, rows


def run_cli(*argv):
    return main(list(argv))


def outputs(out_dir, skip=("manifest.json",)):
    names = sorted(os.listdir(out_dir))
    return [n for n in names if n not in skip and not n.endswith(".png")]


# -------------------------------------------------------------------- commands


def test_fringe_command(base_config, write_config, tmp_path):
    out = str(tmp_path / "fringe_out")
    assert run_cli("fringe", "--config", write_config(base_config), "--out", out) == 0
    header, rows = read_rows(os.path.join(out, "fringe.csv"))
    assert header == ["delta_rad_s", "probability"]
    deltas = np.array([r[0] for r in rows])
    probs = np.array([r[1] for r in rows])
    # maximum sits at zero detuning with p = 1 for the loss-free fringe
    assert probs[np.argmin(np.abs(deltas))] == pytest.approx(1.0, abs=1e-9)
    assert probs.max() <= 1.0 + 1e-12
    # symmetric grid gives a symmetric fringe
    assert np.allclose(probs, probs[::-1], atol=1e-9)
    assert os.path.exists(os.path.join(out, "fringe.png"))
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert {f["name"] for f in manifest["files"]} == {"fringe.csv", "fringe.png"}


def test_fringe_with_squeezed_reservoir_loses_contrast(
    base_config, write_config, tmp_path
):
    ideal_out = str(tmp_path / "ideal")
    run_cli("fringe", "--config", write_config(base_config), "--out", ideal_out)
    base_config["reservoir"] = {"n_photon": 1.0, "m_mag": math.sqrt(2.0)}
    damped_out = str(tmp_path / "damped")
    assert (
        run_cli(
            "fringe",
            "--config",
            write_config(base_config, "damped.yaml"),
            "--out",
            damped_out,
        )
        == 0
    )
    _, ideal_rows = read_rows(os.path.join(ideal_out, "fringe.csv"))
    _, damped_rows = read_rows(os.path.join(damped_out, "fringe.csv"))
    ideal = np.array([r[1] for r in ideal_rows])
    damped = np.array([r[1] for r in damped_rows])
    assert ideal.max() - ideal.min() == pytest.approx(1.0, abs=1e-9)
    assert damped.max() - damped.min() < 0.5


def test_spectrum_command(base_config, write_config, tmp_path):
    out = str(tmp_path / "spec_out")
    assert run_cli("spectrum", "--config", write_config(base_config), "--out", out) == 0
    header, rows = read_rows(os.path.join(out, "spectrum.csv"))
    assert header == ["omega_0_rad_s", "phi_minus_rad", "spectrum"]
    by_phi = {}
    for omega, phi, s in rows:
        by_phi.setdefault(round(phi, 12), []).append((omega, s))
    phis = sorted(by_phi)
    quarter = [p for p in phis if abs(p - math.pi / 4) < 1e-9][0]
    # the pi/4 phase column vanishes identically
    assert all(abs(s) < 1e-15 for _, s in by_phi[quarter])
    # opposite quadratures flip sign
    zero_row = dict(by_phi[0.0])
    half_row = dict(by_phi[[p for p in phis if abs(p - math.pi / 2) < 1e-9][0]])
    for omega, s in zero_row.items():
        assert s <= 0.0
        assert half_row[omega] == pytest.approx(-s, rel=1e-12)
    # Lorentzian half value at the width parameter (f_width = 1)
    assert zero_row[1.0] == pytest.approx(0.5 * zero_row[0.0], rel=1e-12)


def test_snr_command(base_config, write_config, tmp_path):
    out = str(tmp_path / "snr_out")
    assert run_cli("snr", "--config", write_config(base_config), "--out", out) == 0
    header, rows = read_rows(os.path.join(out, "snr.csv"))
    assert header == ["xi", "snr_coherent", "snr_squeezed", "improvement"]
    assert rows[0][0] == 0.0
    assert rows[0][3] == pytest.approx(1.0, abs=1e-12)
    ratios = [r[3] for r in rows]
    # xi * S < 0 on this sweep, so squeezed detection always wins and the
    # improvement grows monotonically with the coupling
    assert all(r > 1.0 for r in ratios[1:])
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert all(r[2] / r[1] == pytest.approx(r[3], rel=1e-12) for r in rows)


def test_snr_sweep_outside_validity_exits_3(base_config, write_config, tmp_path):
    base_config["snr"]["stop"] = 2.0  # xi S reaches -1.5
    out = str(tmp_path / "snr_bad")
    code = run_cli("snr", "--config", write_config(base_config), "--out", out)
    assert code == 3


def test_clock_command_roundtrip(base_config, write_config, tmp_path):
    out = str(tmp_path / "clock_out")
    path = write_config(base_config)
    assert run_cli("clock", "--config", path, "--out", out) == 0
    record_path = os.path.join(out, "clock_record.csv")
    header, rows = read_rows(record_path)
    assert header == ["index", "time_s", "y_fractional"]
    assert len(rows) == 200
    sidecar = json.load(open(os.path.join(out, "clock_record.json")))
    assert sidecar["tau0"] == 2.0
    assert sidecar["metadata"]["seed"] == 12345
    assert sidecar["metadata"]["skipped_pairs"] == 0
    assert sidecar["config"]["command"] == "clock"

    # re-reading the CSV reproduces the in-process run bit for bit
    run = build_clock_run(load_config(path))
    record = run_clock(run.config, run.n_cycles)
    reread = read_record(record_path)
    assert np.array_equal(reread.samples, record.samples)
    assert reread.tau0 == record.tau0


def test_clock_compare_mode(base_config, write_config, tmp_path):
    base_config["clock"]["detection_mode"] = "squeezed"
    out = str(tmp_path / "cmp_out")
    code = run_cli(
        "clock", "--config", write_config(base_config), "--out", out, "--compare"
    )
    assert code == 0
    _, coh = read_rows(os.path.join(out, "clock_coherent.csv"))
    _, sq = read_rows(os.path.join(out, "clock_squeezed.csv"))
    assert len(coh) == len(sq) == 200
    coh_meta = json.load(open(os.path.join(out, "clock_coherent.json")))["metadata"]
    sq_meta = json.load(open(os.path.join(out, "clock_squeezed.json")))["metadata"]
    assert coh_meta["noise_scale"] == 1.0
    assert sq_meta["noise_scale"] == pytest.approx(0.5)
    assert os.path.exists(os.path.join(out, "clock_compare.png"))


def test_allan_command_matches_in_process_analysis(base_config, write_config, tmp_path):
    clock_out = str(tmp_path / "rec_out")
    path = write_config(base_config)
    assert run_cli("clock", "--config", path, "--out", clock_out) == 0
    allan_out = str(tmp_path / "allan_out")
    code = run_cli(
        "allan",
        "--config",
        path,
        "--record",
        os.path.join(clock_out, "clock_record.csv"),
        "--out",
        allan_out,
    )
    assert code == 0
    header, rows = read_rows(os.path.join(allan_out, "allan.csv"))
    assert header == ["tau_s", "sigma", "n_pairs", "sigma_predicted"]

    run = build_clock_run(load_config(path))
    record = run_clock(run.config, run.n_cycles)
    curve = allan_deviation(record, octave_taus(record))
    assert np.array_equal(np.array([r[0] for r in rows]), curve.taus)
    assert np.array_equal(np.array([r[1] for r in rows]), curve.sigmas)

    summary = json.load(open(os.path.join(allan_out, "allan_summary.json")))
    assert summary["fit"] is not None
    assert -0.8 < summary["fit"]["exponent"] < -0.2
    assert summary["snr_bridge"] == pytest.approx(math.sqrt(2e6))


def test_allan_runs_the_clock_without_record(base_config, write_config, tmp_path):
    out = str(tmp_path / "allan_direct")
    assert run_cli("allan", "--config", write_config(base_config), "--out", out) == 0
    assert os.path.exists(os.path.join(out, "allan.csv"))
    assert os.path.exists(os.path.join(out, "allan.png"))


def test_allan_explicit_multipliers(base_config, write_config, tmp_path):
    base_config["allan"]["taus"] = [1, 2, 4]
    out = str(tmp_path / "allan_m")
    assert run_cli("allan", "--config", write_config(base_config), "--out", out) == 0
    _, rows = read_rows(os.path.join(out, "allan.csv"))
    assert [r[0] for r in rows] == [2.0, 4.0, 8.0]


# --------------------------------------------------------------- cli behaviour


def test_every_command_is_deterministic(base_config, write_config, tmp_path):
    base_config["clock"]["n_cycles"] = 60
    path = write_config(base_config)
    for command in ("fringe", "spectrum", "snr", "clock", "allan"):
        out_a = str(tmp_path / f"{command}_a")
        out_b = str(tmp_path / f"{command}_b")
        assert run_cli(command, "--config", path, "--out", out_a) == 0
        assert run_cli(command, "--config", path, "--out", out_b) == 0
        names = outputs(out_a)
        assert names == outputs(out_b)
        for name in names:
            with open(os.path.join(out_a, name), "rb") as fh:
                blob_a = fh.read()
            with open(os.path.join(out_b, name), "rb") as fh:
                blob_b = fh.read()
            assert blob_a == blob_b, f"{command}/{name} differs between runs"


def test_seed_flag_overrides_config(base_config, write_config, tmp_path):
    path = write_config(base_config)
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    assert run_cli("clock", "--config", path, "--out", out_a, "--seed", "7") == 0
    assert run_cli("clock", "--config", path, "--out", out_b) == 0
    rec_a = read_record(os.path.join(out_a, "clock_record.csv"))
    rec_b = read_record(os.path.join(out_b, "clock_record.csv"))
    assert rec_a.metadata["seed"] == 7
    assert not np.array_equal(rec_a.samples, rec_b.samples)
    manifest = json.load(open(os.path.join(out_a, "manifest.json")))
    assert manifest["seed"] == 7


def test_json_format(base_config, write_config, tmp_path):
    out = str(tmp_path / "json_out")
    code = run_cli(
        "fringe",
        "--config",
        write_config(base_config),
        "--out",
        out,
        "--format",
        "json",
        "--no-plot",
    )
    assert code == 0
    payload = json.load(open(os.path.join(out, "fringe.json")))
    assert payload["columns"] == ["delta_rad_s", "probability"]
    assert len(payload["rows"]) == 201
    assert not os.path.exists(os.path.join(out, "fringe.csv"))
    assert not os.path.exists(os.path.join(out, "fringe.png"))


def test_json_record_roundtrip(base_config, write_config, tmp_path):
    out = str(tmp_path / "json_clock")
    path = write_config(base_config)
    assert run_cli(
        "clock", "--config", path, "--out", out, "--format", "json", "--no-plot"
    ) == 0
    record = read_record(os.path.join(out, "clock_record.json"))
    run = build_clock_run(load_config(path))
    expected = run_clock(run.config, run.n_cycles)
    assert np.array_equal(record.samples, expected.samples)


def test_config_error_exit_code(base_config, write_config, tmp_path):
    base_config["ramsey"]["typo_key"] = 1.0
    code = run_cli(
        "fringe", "--config", write_config(base_config), "--out", str(tmp_path / "x")
    )
    assert code == 2
    assert run_cli("fringe", "--config", "/does/not/exist.yaml") == 2


def test_manifest_lists_real_files_with_checksums(base_config, write_config, tmp_path):
    out = str(tmp_path / "man_out")
    assert run_cli("spectrum", "--config", write_config(base_config), "--out", out) == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["command"] == "spectrum"
    assert manifest["duration_s"] > 0.0
    import hashlib

    for entry in manifest["files"]:
        path = os.path.join(out, entry["name"])
        assert os.path.exists(path)
        with open(path, "rb") as fh:
            blob = fh.read()
        assert len(blob) == entry["bytes"]
        assert hashlib.sha256(blob).hexdigest() == entry["sha256"]
