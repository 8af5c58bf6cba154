"""File formats: JSON measures, couplings, evolutions and trajectory
measures; raw density snapshots with JSON sidecars; CSV time series."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .curves import TrajectoryMeasure
from .errors import MeasureError
from .measures import Evolution, SliceMeasure
from .wave.propagation import GridSpec, gaussian_mode
from .wave.state import DensitySnapshot

__all__ = [
    "read_json",
    "write_json",
    "dumps",
    "load_measure",
    "load_evolution",
    "load_curves",
    "write_density",
    "read_density",
    "read_density_dir",
    "write_series",
    "load_modes",
    "load_coefficients",
]


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"{path}: not valid JSON ({exc})") from exc


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")


def load_measure(path, *, exact: bool = False) -> SliceMeasure:
    return SliceMeasure.from_dict(read_json(path), exact=exact)


def load_evolution(path, *, exact: bool = False) -> Evolution:
    return Evolution.from_dict(read_json(path), exact=exact)


def load_curves(path, *, exact: bool = False) -> TrajectoryMeasure:
    return TrajectoryMeasure.from_dict(read_json(path), exact=exact)


def write_density(snap: DensitySnapshot, directory, index: int) -> Path:
    """Write ``density_XXXX.bin`` (little-endian float64, C order) and its
    ``.json`` header; returns the binary path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"density_{index:04d}"
    data = np.ascontiguousarray(snap.density, dtype="<f8")
    (d / f"{stem}.bin").write_bytes(data.tobytes())
    header = {
        "file": f"{stem}.bin",
        "dims": list(data.shape),
        "dtype": "<f8",
        "order": "C",
        "time": snap.time,
        "spacing": snap.spacing,
        "origin": snap.origin,
        "n": snap.n,
        "N": snap.N,
        "c": snap.c,
        "axes": "axis j*n+k is coordinate k of particle j",
    }
    write_json(header, d / f"{stem}.json")
    return d / f"{stem}.bin"


def read_density(header_path) -> DensitySnapshot:
    header_path = Path(header_path)
    h = read_json(header_path)
    raw = np.fromfile(header_path.with_name(h["file"]), dtype=h["dtype"])
    if raw.size != int(np.prod(h["dims"])):
        raise MeasureError(f"{h['file']}: size does not match header dims {h['dims']}")
    return DensitySnapshot(h["time"], raw.reshape(h["dims"]), None, h["spacing"], h["origin"],
                           h["n"], h["N"], h.get("c", 1.0))


def read_density_dir(directory) -> list[DensitySnapshot]:
    headers = sorted(Path(directory).glob("density_*.json"))
    if not headers:
        raise MeasureError(f"no density snapshots in {directory}")
    snaps = [read_density(p) for p in headers]
    return sorted(snaps, key=lambda s: s.time)


def write_series(rows: list[dict], path, columns: list[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})


def _complex_list(values) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            re, im = v
            out.append(complex(re, im))
        else:
            out.append(complex(v))
    return np.array(out, dtype=complex)


def load_modes(path, species: str, grid: GridSpec) -> list:
    """Gaussian packets from ``{"modes": [{"spinor", "center", "width", "k0"}]}``.

    Complex spinor entries are written as ``[re, im]`` pairs.
    """
    d = read_json(path)
    if d.get("species", species) != species:
        raise MeasureError(f"modes file is for {d['species']}, run is for {species}")
    modes = []
    for m in d["modes"]:
        modes.append(gaussian_mode(species, grid, _complex_list(m["spinor"]),
                                   center=m.get("center", (0.0, 0.0, 0.0)),
                                   width=float(m.get("width", 0.85)),
                                   k0=m.get("k0", (0.0, 0.0, 0.0))))
    if not modes:
        raise MeasureError("modes file lists no modes")
    return modes


def load_coefficients(path) -> np.ndarray:
    """Tensor from ``{"shape": [...], "real": [...], "imag": [...]}`` (C order)."""
    d = read_json(path)
    shape = tuple(int(s) for s in d["shape"])
    re = np.asarray(d["real"], dtype=float)
    im = np.asarray(d.get("imag", np.zeros_like(re)), dtype=float)
    if re.size != int(np.prod(shape)) or im.size != re.size:
        raise MeasureError(f"coefficient data does not match shape {shape}")
    return (re + 1j * im).reshape(shape)
