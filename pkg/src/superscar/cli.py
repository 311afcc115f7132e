"""Command-line harness: ``superscar <command> --config cfg.json --out dir``.

Commands write plot-ready CSV and JSON files plus ``manifest.json`` listing
every output with its SHA-256.  Per-quasienergy work is spread over a thread
pool and collected in input order, so outputs are byte-identical between runs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .cylinders import (
    DirectionSequence,
    approximating_sequence,
    detect_cylinder,
    energy_constant,
    periodic_directions,
    spectrum_rows,
)
from .errors import EnergyOutOfRange, CylinderTooNarrow, InputError, SearchExhausted, SuperscarError
from .momentum import (
    images_quasimode,
    make_observable,
    momentum_density,
    orbit_measure,
    pair,
    symmetrized_density,
)
from .polygon import (
    RationalPolygon,
    equilateral,
    polygon_from_json,
    right_isoceles,
    surface_to_json,
    triangle_from_angles,
    unfold,
    unit_square,
)
from .quasimode import DEFAULT_C_T, build, evaluate_torus_grid, rectangular_periods, schedule
from .spectral import fit_exponent, sweep_point
from .wavepacket import Grid2D

NAMED_POLYGONS = {"square": unit_square, "right-isoceles": right_isoceles, "equilateral": equilateral}
SKIPPABLE = (EnergyOutOfRange, CylinderTooNarrow, SearchExhausted)


@dataclass
class ExperimentConfig:
    """Everything a run needs; round-trips through ``to_dict``/``from_dict``."""

    polygon: object = "square"
    xi0_angle: float = math.atan(math.sqrt(2))
    eps: float = 0.1
    c_T: float = DEFAULT_C_T
    c: float | None = None
    lambdas: list[float] = field(default_factory=lambda: [1e4])
    cylinder: list[float] | None = None  # fixed host direction; default follows the approximating sequence
    k_max: int = 5
    length_bound: float = 10.0
    window: str = "bump"
    mode: str = "norm"
    field_grid: int = 0  # >0 dumps the sampled quasimode on an n x n grid (flat tori only)
    images_grid: int = 256
    density_spacing: float | None = None
    observable: dict = field(default_factory=lambda: {"kind": "cosine", "vector": [1.0, 0.5]})
    out: str = "superscar_out"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known - {"log10_lambda"})
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        if "log10_lambda" in data:
            lo, hi, n = data.pop("log10_lambda")
            data["lambdas"] = [float(v) for v in np.logspace(lo, hi, int(n))]
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if not 0 < self.eps < 0.5:
            raise InputError("eps must lie in (0, 1/2)")
        if not self.c_T > 0:
            raise InputError("c_T must be positive")
        if self.c is not None and not self.c > 0:
            raise InputError("c must be positive")
        if not self.lambdas or any(not lam > 0 for lam in self.lambdas):
            raise InputError("lambdas must be a non-empty list of positive numbers")
        if self.mode not in ("norm", "width"):
            raise InputError("mode must be 'norm' or 'width'")
        if self.k_max < 1 or self.length_bound <= 0 or self.images_grid < 2 or self.field_grid < 0:
            raise InputError("k_max, length_bound and grid sizes must be positive")
        if self.observable.get("kind") not in ("constant", "linear", "cosine"):
            raise InputError("observable kind must be constant, linear or cosine")

    @property
    def energy_c(self) -> float:
        return energy_constant(self.c_T, self.eps) if self.c is None else self.c

    @property
    def xi0(self) -> np.ndarray:
        return np.array([math.cos(self.xi0_angle), math.sin(self.xi0_angle)])


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def make_polygon(spec, base: Path = Path(".")) -> RationalPolygon:
    if isinstance(spec, str):
        if spec not in NAMED_POLYGONS:
            raise InputError(f"unknown polygon {spec!r}; named polygons: {', '.join(NAMED_POLYGONS)}")
        return NAMED_POLYGONS[spec]()
    if isinstance(spec, dict) and "file" in spec:
        path = Path(spec["file"])
        path = path if path.is_absolute() else base / path
        return make_polygon(json.loads(path.read_text()), base)
    if isinstance(spec, dict) and "triangle" in spec:
        return triangle_from_angles([tuple(a) for a in spec["triangle"]])
    if isinstance(spec, dict) and "angles" in spec:
        return polygon_from_json(spec)
    raise InputError("polygon must be a name, {'file': ...}, {'triangle': [...]} or {'angles': ..., 'edge_lengths': ...}")


def make_symbol(spec: dict):
    kind = spec["kind"]
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        return lambda xi: np.full(np.asarray(xi).shape[:-1], value)
    v = np.asarray(spec.get("vector", [1.0, 0.0]), dtype=float)
    if kind == "linear":
        return lambda xi: np.asarray(xi) @ v
    return lambda xi: np.cos(np.asarray(xi) @ v)


def thread_count(flag: int | None) -> int:
    env = os.environ.get("SUPERSCAR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InputError(f"SUPERSCAR_THREADS must be an integer, got {env!r}") from exc
    return max(1, flag or 1)


class Run:
    """Output directory, manifest and the shared surface/sequence for one command."""

    def __init__(self, cfg: ExperimentConfig, out: Path, threads: int, base: Path):
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.manifest = io.RunManifest(io.config_hash(cfg.to_dict()), __version__)
        out.mkdir(parents=True, exist_ok=True)
        self.surface = unfold(make_polygon(cfg.polygon, base))
        self._sequence: DirectionSequence | None = None
        self._fixed = None

    def emit(self, path: Path) -> Path:
        self.manifest.record(path, self.out)
        return path

    def sequence(self) -> DirectionSequence:
        if self._sequence is None:
            cfg = self.cfg
            self._sequence = approximating_sequence(self.surface, cfg.xi0, cfg.k_max, cfg.energy_c, cfg.eps)
        return self._sequence

    def cylinder_for(self, lam: float):
        cfg = self.cfg
        if cfg.cylinder is not None:
            if self._fixed is None:
                d = np.asarray(cfg.cylinder, dtype=float)
                self._fixed = detect_cylinder(self.surface, d, label=f"({cfg.cylinder[0]:g},{cfg.cylinder[1]:g})")
            return self._fixed
        return self.sequence().entry_for(lam).cylinder

    def schedule(self, lam: float):
        return schedule(lam, self.cfg.eps, self.cfg.c_T, self.cylinder_for(lam), self.cfg.c)

    def map(self, fn, items):
        if self.threads == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))

    def finish(self) -> None:
        io.write_json(self.out / "config.json", self.cfg.to_dict())
        self.emit(self.out / "config.json")
        self.manifest.write(self.out)


# -- commands ------------------------------------------------------------------
def cmd_unfold(run: Run) -> str:
    s = run.surface
    run.emit(io.write_json(run.out / "surface.json", surface_to_json(s)))
    summary = f"genus {s.genus}, {len(s.cone_points)} cone points, area {s.area:.12g}, {len(s.group)} charts"
    (run.out / "summary.txt").write_text(summary + "\n")
    run.emit(run.out / "summary.txt")
    run.manifest.step("unfold", "ok", summary)
    return summary


def cmd_cylinders(run: Run) -> str:
    spec = periodic_directions(run.surface, run.cfg.length_bound)
    run.emit(io.write_csv(run.out / "spectrum.csv", spectrum_rows(spec), ["label", "angle", "length", "width"]))
    run.manifest.step("spectrum", "ok", f"{len(spec.entries)} cylinders up to length {run.cfg.length_bound:g}")
    seq = run.sequence()
    run.emit(io.write_json(run.out / "sequence.json", seq.to_json()))
    run.manifest.step("sequence", "ok", f"{len(seq.entries)} entries")
    return f"{len(spec.entries)} cylinders up to length {run.cfg.length_bound:g}; sequence {[e.cylinder.label for e in seq.entries]}"


def _prevalidate(run: Run):
    return [run.schedule(lam) for lam in run.cfg.lambdas]


def cmd_build(run: Run) -> str:
    schedules = _prevalidate(run)
    qms = run.map(lambda s: build(s, run.cfg.window), schedules)
    for i, qm in enumerate(qms):
        run.emit(io.write_json(run.out / f"quasimode_{i:03d}.json", qm.to_json()))
        if run.cfg.field_grid:
            if rectangular_periods(run.surface) is None:
                raise InputError("field dumps need a rectangular flat torus")
            grid, values = evaluate_torus_grid(qm, run.cfg.field_grid)
            g = Grid2D((float(grid.x[0]), float(grid.y[0])), (float(grid.x[1] - grid.x[0]), float(grid.y[1] - grid.y[0])), values.shape)
            run.emit(io.write_field(run.out / f"quasimode_{i:03d}.field", values, g))
            side = {"packet": io.packet_json(qm.packet), "schedule": qm.schedule.to_json(), "core": list(grid.core)}
            run.emit(io.write_json(run.out / f"quasimode_{i:03d}.field.json", side))
        run.manifest.step(f"build {qm.schedule.lam:g}", "ok", f"{qm.nodes.size} nodes on {qm.cylinder.label}")
    return f"built {len(qms)} quasimodes"


def cmd_scaling(run: Run, mode: str | None = None) -> str:
    mode = mode or run.cfg.mode

    def one(lam):
        try:
            return sweep_point(run.schedule(lam), run.cfg.window), ""
        except SKIPPABLE as exc:
            return None, f"{type(exc).__name__}: {exc}"

    run.cylinder_for(run.cfg.lambdas[0]) if run.cfg.cylinder is not None else run.sequence()  # warm caches before threading
    rows, points = [], []
    for lam, (row, why) in zip(run.cfg.lambdas, run.map(one, run.cfg.lambdas)):
        if row is None:
            warnings.warn(f"lambda {lam:g} skipped: {why}", stacklevel=2)
            rows.append({"lambda": lam, "status": "skipped", "note": why})
            run.manifest.step(f"sweep {lam:g}", "skipped", why)
            continue
        rows.append({**row.as_dict(), "status": "ok", "note": ""})
        run.manifest.step(f"sweep {lam:g}", "ok")
        points.append((row.hbar, row.norm2) if mode == "norm" else (row.lam, row.width))
    cols = ["lambda", "hbar", "T", "norm2", "defect_norm2", "width", "prediction", "j2_correction", "cylinder", "status", "note"]
    run.emit(io.write_csv(run.out / f"sweep_{mode}.csv", rows, cols))
    fit = fit_exponent(points)
    expected = 2.25 + run.cfg.eps / 2 if mode == "norm" else 0.375 + run.cfg.eps / 4
    report = {"mode": mode, "variable": "hbar" if mode == "norm" else "lambda", "expected_slope": expected, **fit.to_json()}
    run.emit(io.write_json(run.out / f"fit_{mode}.json", report))
    run.manifest.step(f"fit {mode}", "ok", f"slope {fit.slope:.6g}")
    return f"{mode} slope {fit.slope:.4f} (expected {expected:.4f})"


def cmd_measure(run: Run) -> str:
    schedules = _prevalidate(run)
    cfg = run.cfg
    symbol = make_symbol(cfg.observable)
    orbit = orbit_measure(cfg.xi0, run.surface.group)
    atomic = orbit.pairing(symbol)

    def one(sch):
        qm = build(sch, cfg.window)
        d = momentum_density(qm, eps=cfg.eps, spacing=cfg.density_spacing)
        return d, pair(symmetrized_density(d, run.surface.group), symbol)

    entries = []
    for i, (sch, (d, measured)) in enumerate(zip(schedules, run.map(one, schedules))):
        rows = [{"xi_x": a, "xi_y": b, "value": v} for a, b, v in d.to_rows()]
        run.emit(io.write_csv(run.out / f"density_{i:03d}.csv", rows, ["xi_x", "xi_y", "value"]))
        run.emit(io.write_json(run.out / f"density_{i:03d}.json", {**d.metadata(), "lambda": sch.lam}))
        entries.append({"lambda": sch.lam, "hbar": sch.hbar, "cylinder": sch.cylinder.label,
                        "measured_pairing": measured, "gap": abs(measured - atomic)})
        run.manifest.step(f"measure {sch.lam:g}", "ok", f"mass {d.total_mass:.10f}")
    lip = make_observable(symbol).lipschitz
    report = {**orbit.to_json(), "observable": cfg.observable, "lipschitz": lip, "atomic_pairing": atomic, "runs": entries}
    run.emit(io.write_json(run.out / "orbit.json", report))
    return "gaps " + ", ".join(f"{e['gap']:.3g}" for e in entries)


def cmd_images(run: Run) -> str:
    schedules = _prevalidate(run)
    states = run.map(lambda s: images_quasimode(build(s, run.cfg.window), run.cfg.images_grid), schedules)
    rows = []
    for sch, st in zip(schedules, states):
        rows.append({"lambda": sch.lam, "hbar": sch.hbar, "cylinder": sch.cylinder.label, "norm2_polygon": st.norm2,
                     "norm2_surface": st.surface_norm2, "cross": st.cross, "relative_cross": abs(st.cross) / st.surface_norm2})
        run.manifest.step(f"images {sch.lam:g}", "ok")
    run.emit(io.write_csv(run.out / "images.csv", rows, list(rows[0])))
    summary = {"points": len(rows)}
    if len(rows) >= 3:
        try:
            fit = fit_exponent([(r["hbar"], r["relative_cross"]) for r in rows], min_points=3, min_decades=0.5)
            summary["cross_fit"] = fit.to_json()
        except SuperscarError as exc:
            summary["cross_fit_error"] = str(exc)
    run.emit(io.write_json(run.out / "images.json", summary))
    return "relative cross terms " + ", ".join(f"{r['relative_cross']:.3g}" for r in rows)


COMMANDS = {
    "unfold": cmd_unfold,
    "cylinders": cmd_cylinders,
    "build": cmd_build,
    "scaling": cmd_scaling,
    "measure": cmd_measure,
    "images": cmd_images,
}


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="superscar", description="Superscar quasimodes on rational polygons.")
    p.add_argument("--version", action="version", version=f"superscar {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON experiment config (defaults are used when omitted)")
        s.add_argument("--out", help="output directory (overrides the config)")
        s.add_argument("--threads", type=int, default=None, help="worker threads; SUPERSCAR_THREADS overrides")
        if name == "scaling":
            s.add_argument("--mode", choices=["norm", "width"], default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    run = None
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.out)
        base = Path(args.config).parent if args.config else Path(".")
        run = Run(cfg, out, thread_count(args.threads), base)
        fn = COMMANDS[args.command]
        message = fn(run, args.mode) if args.command == "scaling" else fn(run)
        run.finish()
    except SuperscarError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if run is not None:
            run.manifest.step(args.command, "failed", f"{type(exc).__name__}: {exc}")
            run.manifest.write(run.out)
        return exc.exit_code
    print(message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
