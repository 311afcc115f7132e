"""Artifact writers: sampled fields, CSV tables, JSON reports and the run manifest.

All writers are deterministic: fixed key order, fixed float formatting and
no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError
from .wavepacket import GaussianPacket, Grid2D

HEADER = struct.Struct("<qqdddd")  # ny, nx, dx, dy, x0, y0


def write_field(path, values: np.ndarray, grid: Grid2D) -> Path:
    """Binary dump: little-endian header then interleaved real/imag doubles, row-major ``[iy, ix]``."""
    path = Path(path)
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != tuple(grid.shape):
        raise InputError(f"field shape {values.shape} does not match grid {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(grid.shape[0], grid.shape[1], *grid.spacing, *grid.origin))
        fh.write(np.ascontiguousarray(values).astype("<c16").tobytes())
    return path


def read_field(path) -> tuple[np.ndarray, Grid2D]:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise InputError(f"{path}: truncated header")
    ny, nx, dx, dy, x0, y0 = HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<c16", offset=HEADER.size)
    if body.size != ny * nx:
        raise InputError(f"{path}: expected {ny * nx} samples, found {body.size}")
    return body.reshape(ny, nx).astype(np.complex128), Grid2D((x0, y0), (dx, dy), (int(ny), int(nx)))


def packet_json(packet: GaussianPacket) -> dict:
    return {"x0": list(packet.x0), "xi0": list(packet.xi0), "hbar": packet.hbar, "t": packet.t}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, rows: list[dict], columns: list[str] | None = None) -> Path:
    path = Path(path)
    columns = columns or (list(rows[0].keys()) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(_jsonable(config), sort_keys=True).encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    version: str
    steps: list[dict] = field(default_factory=list)
    outputs: dict[str, str] = field(default_factory=dict)

    def step(self, name: str, status: str, detail: str = "") -> None:
        self.steps.append({"step": name, "status": status, "detail": detail})

    def record(self, path: Path, root: Path) -> None:
        self.outputs[str(Path(path).relative_to(root))] = sha256(path)

    def to_json(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "version": self.version,
            "steps": self.steps,
            "outputs": dict(sorted(self.outputs.items())),
        }

    def write(self, root) -> Path:
        return write_json(Path(root) / "manifest.json", self.to_json())
