"""Delimited and JSON output with round-trip float formatting, plus the run
manifest.  Numbers are written as shortest round-trip decimal text so a file
read back reproduces the in-process values bit for bit."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .clock import FrequencyRecord
from .errors import ConfigError
from .stability import StabilityCurve


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str, header: list[str], rows) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def write_json(path: str, payload) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_series(path_base: str, header: list[str], rows, fmt: str) -> str:
    """Write a data series as <base>.csv or <base>.json per --format."""
    rows = [list(r) for r in rows]
    if fmt == "json":
        return write_json(
            path_base + ".json",
            {"columns": header, "rows": [[_jsonable(v) for v in r] for r in rows]},
        )
    return write_csv(path_base + ".csv", header, rows)


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def record_payload(record: FrequencyRecord, config_echo: dict | None = None) -> dict:
    payload = {
        "tau0": record.tau0,
        "metadata": {k: _jsonable(v) for k, v in record.metadata.items()},
        "samples": [float(y) for y in record.samples],
    }
    if config_echo is not None:
        payload["config"] = config_echo
    return payload


def write_record(
    out_dir: str,
    name: str,
    record: FrequencyRecord,
    fmt: str,
    config_echo: dict | None = None,
) -> list[str]:
    """Write a frequency record as CSV + JSON sidecar, or as one JSON file.

    The CSV columns are index, time_s, y_fractional; the sidecar carries
    tau0, the run metadata (seed, skipped pairs, ...) and the config echo.
    """
    base = os.path.join(out_dir, name)
    if fmt == "json":
        return [write_json(base + ".json", record_payload(record, config_echo))]
    rows = [
        (i, i * record.tau0, y) for i, y in enumerate(record.samples)
    ]
    csv_path = write_csv(base + ".csv", ["index", "time_s", "y_fractional"], rows)
    sidecar = record_payload(record, config_echo)
    del sidecar["samples"]
    json_path = write_json(base + ".json", sidecar)
    return [csv_path, json_path]


def read_record(path: str) -> FrequencyRecord:
    """Re-read a frequency record written by write_record (CSV or JSON)."""
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        try:
            return FrequencyRecord(
                payload["tau0"],
                np.array(payload["samples"], dtype=float),
                payload.get("metadata", {}),
            )
        except KeyError as exc:
            raise ConfigError(f"record file {path} lacks key {exc.args[0]!r}") from None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
    except (OSError, StopIteration):
        raise ConfigError(f"cannot read record file: {path}") from None
    if header[:3] != ["index", "time_s", "y_fractional"]:
        raise ConfigError(f"{path} is not a frequency-record CSV (header {header})")
    samples = np.array([float(r[2]) for r in rows])
    times = [float(r[1]) for r in rows]
    sidecar = os.path.splitext(path)[0] + ".json"
    metadata: dict = {}
    tau0 = None
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        tau0 = payload.get("tau0")
        metadata = payload.get("metadata", {})
    if tau0 is None:
        if len(times) < 2:
            raise ConfigError(f"{path} has no sidecar and too few rows to infer tau0")
        tau0 = times[1] - times[0]
    return FrequencyRecord(tau0, samples, metadata)


def write_curve(
    out_dir: str,
    name: str,
    curve: StabilityCurve,
    fmt: str,
    predicted: np.ndarray | None = None,
) -> str:
    header = ["tau_s", "sigma", "n_pairs"]
    columns = [curve.taus, curve.sigmas, curve.n_pairs]
    if predicted is not None:
        header.append("sigma_predicted")
        columns.append(predicted)
    rows = list(zip(*columns))
    return write_series(os.path.join(out_dir, name), header, rows, fmt)


@dataclass
class RunManifest:
    """What a command run produced: config snapshot identity and artifacts."""

    command: str
    config_path: str
    config_sha256: str
    seed: int | None
    out_dir: str
    files: list = field(default_factory=list)
    duration_s: float = 0.0

    def add(self, path: str) -> None:
        with open(path, "rb") as fh:
            blob = fh.read()
        self.files.append(
            {
                "name": os.path.basename(path),
                "bytes": len(blob),
                "sha256": hashlib.sha256(blob).hexdigest(),
            }
        )

    def write(self, started: float) -> str:
        self.duration_s = time.perf_counter() - started
        payload = {
            "command": self.command,
            "config_path": self.config_path,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "files": self.files,
            "duration_s": self.duration_s,
        }
        return write_json(os.path.join(self.out_dir, "manifest.json"), payload)


def snapshot_digest(snapshot: dict) -> str:
    """SHA-256 of the canonical JSON form of a resolved config snapshot."""
    blob = json.dumps(snapshot, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
