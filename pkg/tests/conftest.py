import copy
import math

import pytest
import yaml

# One config that exercises every section; the detection calibration puts
# xi * S = -0.75 at the clock's atom rate of 1e6 atoms/s.
FULL_CONFIG = {
    "atom": {"gamma": 1.0, "detuning": 0.0},
    "reservoir": {"n_photon": 0.0, "m_mag": 0.0, "m_phase": 0.0},
    "ramsey": {"pulse_area": math.pi / 2, "free_time": 0.5, "mode": "fountain"},
    "detection": {
        "xi": 1.0,
        "c_scale": 7.5e-7,
        "phi_minus": 0.0,
        "omega_0": 0.0,
        "f_width": 1.0,
    },
    "response": {"delta_vac": 1.0},
    "budget": {"alpha": 1.0, "t_meas": 1.0, "beta": 1.0, "a_amp": 10.0, "bandwidth": 1.0},
    "lo_noise": {"white_fm": 0.0, "flicker_fm": 0.0, "initial_offset": 0.0},
    "line": {"nu": 9192631770.0, "delta_nu": 1.0},
    "clock": {
        "geometry": "fountain",
        "atoms_per_cycle": 1000000,
        "cycle_time": 1.0,
        "detection_mode": "coherent",
        "servo_gain": 1.0,
        "modulation_depth": "auto",
        "seed": 12345,
        "n_cycles": 400,
    },
    "fringe": {"points": 201},
    "spectrum": {
        "omega_min": 0.0,
        "omega_max": 5.0,
        "omega_points": 6,
        "phi_points": 5,
        "atom_flux": 1.0,
    },
    "snr": {"sweep": "xi", "start": 0.0, "stop": 1.0, "points": 5, "atom_flux": 1e6},
    "allan": {"taus": "octave"},
}


@pytest.fixture
def base_config():
    return copy.deepcopy(FULL_CONFIG)


@pytest.fixture
def write_config(tmp_path):
    def _write(cfg, name="run.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        return str(path)

    return _write
