"""File formats for the command-line workflow.

CSV ingestion is header-driven and strict: ragged rows and non-numeric cells
are rejected with line/column diagnostics.  Checkpoints are a small
self-describing binary: magic bytes, a format version, a JSON header, and a
float64 little-endian payload holding (beta, gamma, theta) plus the exposure
standardization vectors.  Every output directory gets exactly one
manifest.json recording the command, config, seeds, input digests, and
timings.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
import time
from pathlib import Path

import numpy as np

from .. import __version__, neural_link
from ..data import Dataset
from ..errors import CheckpointError, DataError
from ..model import ModelParams
from ..neural_link import MlpSpec

CHECKPOINT_MAGIC = b"PLSI"
CHECKPOINT_VERSION = 1
INTERCEPT_NAME = "(intercept)"


# ---------------------------------------------------------------- CSV input

def load_columns(path: str | Path, delimiter: str = ",") -> tuple[list[str], dict[str, np.ndarray]]:
    """Read a delimited file into named float64 columns."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise DataError(f"{path}: duplicate column names {dupes}")
        raw: list[list[str]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: ragged row ({len(row)} fields, header has {len(header)})"
                )
            raw.append(row)
    if not raw:
        raise DataError(f"{path}: no data rows")
    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        values = np.empty(len(raw))
        for i, row in enumerate(raw):
            cell = row[j].strip()
            try:
                values[i] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}:{i + 2}: column {name!r}: non-numeric value {cell!r}"
                ) from None
        columns[name] = values
    return header, columns


def _pick(columns: dict[str, np.ndarray], names: list[str], path) -> np.ndarray:
    missing = [n for n in names if n not in columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}; available: {list(columns)}")
    return np.column_stack([columns[n] for n in names])


def build_dataset(
    path: str | Path,
    columns: dict[str, np.ndarray],
    family: str,
    exposures: list[str],
    covariates: list[str],
    outcome: str | None = None,
    time_col: str | None = None,
    event_col: str | None = None,
    weights_col: str | None = None,
    add_intercept: bool = True,
) -> tuple[Dataset, list[str]]:
    """Assemble a Dataset from named columns; returns it with covariate labels.

    An intercept column is prepended for non-cox families unless disabled
    (cox absorbs any constant into the baseline hazard).
    """
    x = _pick(columns, exposures, path)
    z = _pick(columns, covariates, path) if covariates else np.empty((x.shape[0], 0))
    z_names = list(covariates)
    if add_intercept and family != "cox":
        z = np.column_stack([np.ones(x.shape[0]), z])
        z_names = [INTERCEPT_NAME] + z_names
    if z.shape[1] == 0:
        raise DataError("model needs at least one covariate column (or the intercept)")
    kw = {}
    if family == "cox":
        if not time_col or not event_col:
            raise DataError("cox outcomes need --time and --event columns")
        kw["time"] = _pick(columns, [time_col], path)[:, 0]
        kw["event"] = _pick(columns, [event_col], path)[:, 0]
    else:
        if not outcome:
            raise DataError(f"{family} outcomes need an --outcome column")
        kw["y"] = _pick(columns, [outcome], path)[:, 0]
    if weights_col:
        kw["weights"] = _pick(columns, [weights_col], path)[:, 0]
    data = Dataset(family=family, x=x, z=z, **kw)
    data.validate()
    return data, z_names


def standardize_exposures(x: np.ndarray, names: list[str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero-mean/unit-variance columns; returns (standardized, means, sds)."""
    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    flat = np.flatnonzero(sd == 0)
    if flat.size:
        raise DataError(f"cannot standardize constant exposure column {names[flat[0]]!r}")
    return (x - mean) / sd, mean, sd


# ------------------------------------------------------------- checkpoints

def write_checkpoint(
    path: str | Path,
    params: ModelParams,
    family: str,
    exposure_names: list[str],
    covariate_names: list[str],
    outcome_meta: dict,
    standardize: dict | None,
) -> None:
    """Binary checkpoint: magic | version | header length | JSON header | f64 payload."""
    p, q = params.p, params.q
    payload_parts = [params.beta, params.gamma, params.theta]
    offsets = {"beta": [0, p], "gamma": [p, p + q], "theta": [p + q, p + q + params.theta.size]}
    if standardize is not None:
        start = offsets["theta"][1]
        offsets["x_mean"] = [start, start + p]
        offsets["x_sd"] = [start + p, start + 2 * p]
        payload_parts += [np.asarray(standardize["mean"]), np.asarray(standardize["sd"])]
    payload = np.concatenate(payload_parts).astype("<f8")
    header = {
        "format_version": CHECKPOINT_VERSION,
        "tool_version": __version__,
        "family": family,
        "mlp": {"hidden": list(params.mlp.hidden), "activation": params.mlp.activation},
        "p": p,
        "q": q,
        "exposure_names": exposure_names,
        "covariate_names": covariate_names,
        "outcome": outcome_meta,
        "standardized": standardize is not None,
        "offsets": offsets,
        "theta_layout": neural_link.layout(params.mlp),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(payload.tobytes())


def read_checkpoint(path: str | Path) -> tuple[ModelParams, dict]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic bytes)")
    version, hlen = struct.unpack_from("<II", raw, 4)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    try:
        header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header ({exc})") from exc
    payload = np.frombuffer(raw[12 + hlen :], dtype="<f8")
    off = header["offsets"]
    expected = max(end for _s, end in off.values())
    if payload.size != expected:
        raise CheckpointError(
            f"{path}: payload has {payload.size} floats, header promises {expected}"
        )
    spec = MlpSpec(hidden=tuple(header["mlp"]["hidden"]), activation=header["mlp"]["activation"])
    params = ModelParams(
        beta=payload[off["beta"][0] : off["beta"][1]].copy(),
        gamma=payload[off["gamma"][0] : off["gamma"][1]].copy(),
        theta=payload[off["theta"][0] : off["theta"][1]].copy(),
        mlp=spec,
    )
    return params, header


def checkpoint_standardization(header: dict, payload_path: str | Path) -> tuple[np.ndarray, np.ndarray] | None:
    """(mean, sd) stored in a checkpoint, or None when fitted unstandardized."""
    if not header.get("standardized"):
        return None
    raw = Path(payload_path).read_bytes()
    hlen = struct.unpack_from("<II", raw, 4)[1]
    payload = np.frombuffer(raw[12 + hlen :], dtype="<f8")
    off = header["offsets"]
    mean = payload[off["x_mean"][0] : off["x_mean"][1]].copy()
    sd = payload[off["x_sd"][0] : off["x_sd"][1]].copy()
    return mean, sd


# ----------------------------------------------------------------- tables

def write_delimited(path: str | Path, fieldnames: list[str], rows: list[dict]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text)


# ---------------------------------------------------------------- manifest

def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(
    outdir: str | Path,
    command: str,
    config: dict,
    seeds: dict,
    inputs: list[str | Path],
    outputs: list[str],
    started: float,
) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "inputs": [
            {"path": str(p), "sha256": sha256_file(p)} for p in inputs if Path(p).exists()
        ],
        "outputs": sorted(outputs),
        "tool_version": __version__,
        "elapsed_seconds": round(time.time() - started, 3),
    }
    path = Path(outdir) / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
