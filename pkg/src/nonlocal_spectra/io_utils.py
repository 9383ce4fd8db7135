"""File formats: CSV tables, flat binary fields, JSON sidecars, manifests.

CSV numeric cells use repr(), the shortest representation that round-trips
a 64-bit float, so identical runs produce byte-identical files.
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np


def fmt(x):
    """Shortest round-trip representation of a float (or pass-through str/int)."""
    if isinstance(x, (np.floating, float)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, payload):
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def config_hash(config):
    """Stable hash of a JSON-serializable configuration."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_manifest(path, config, seed, extra=None):
    import scipy

    from . import __version__
    payload = {
        "config": config,
        "config_sha256": config_hash(config),
        "seed": seed,
        "versions": {"nonlocal_spectra": __version__,
                     "numpy": np.__version__,
                     "scipy": scipy.__version__},
    }
    if extra:
        payload.update(extra)
    return write_json(path, payload)


# --- Field binary format: little-endian float64, row-major, JSON header ---

def write_field(path_base, field):
    """Write <base>.bin (raw values) and <base>.json (grid header)."""
    base = Path(path_base)
    values = np.ascontiguousarray(field.values, dtype="<f8")
    base.with_suffix(".bin").write_bytes(values.tobytes(order="C"))
    header = {"d": field.grid.d, "n": field.grid.n, "L": field.grid.L,
              "dtype": "<f8", "order": "C"}
    write_json(base.with_suffix(".json"), header)
    return base.with_suffix(".bin"), base.with_suffix(".json")


def read_field(path_base):
    from .spectral_core import Field, Grid

    base = Path(path_base)
    header = json.loads(base.with_suffix(".json").read_text())
    grid = Grid(d=header["d"], n=header["n"], L=header["L"])
    raw = base.with_suffix(".bin").read_bytes()
    expected = grid.n ** grid.d
    if len(raw) != 8 * expected:
        raise ValueError(f"field payload has {len(raw)} bytes, expected "
                         f"{8 * expected}")
    values = np.frombuffer(raw, dtype="<f8").reshape((grid.n,) * grid.d).copy()
    return Field(grid=grid, values=values)


def write_potential(path_base, potential):
    """PotentialField -> Field binary + provenance JSON (kind, a, v, eps, ...)."""
    base = Path(path_base)
    paths = write_field(base, potential.field)
    header = json.loads(base.with_suffix(".json").read_text())
    header["provenance"] = {k: v for k, v in potential.meta.items()}
    write_json(base.with_suffix(".json"), header)
    return paths


def read_potential(path_base):
    from .potentials import PotentialField

    base = Path(path_base)
    field = read_field(base)
    header = json.loads(base.with_suffix(".json").read_text())
    return PotentialField(field=field, meta=header.get("provenance", {}))


def write_kernel_table(table, path_base):
    """KernelTable -> CSV `r,value,error_estimate` + JSON sidecar."""
    base = Path(path_base)
    rows = zip(table.radii, table.values, table.error_estimates)
    csv_path = write_csv(base.with_suffix(".csv"),
                         ["r", "value", "error_estimate"], rows)
    sidecar = {"kernel_id": table.kernel_id, "d": table.dimension}
    sidecar.update({k: v for k, v in table.params.items()})
    json_path = write_json(base.with_suffix(".json"), sidecar)
    return csv_path, json_path


def radial_profile(field, bin_width=None):
    """Shell-average a field: returns (radii, mean values) over |x| bins."""
    grid = field.grid
    axes = [grid.axis()] * grid.d
    mesh = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(m * m for m in mesh))
    width = bin_width if bin_width is not None else grid.h
    idx = np.floor(r.ravel() / width + 0.5).astype(int)
    sums = np.bincount(idx, weights=field.values.ravel())
    counts = np.bincount(idx)
    radii = np.arange(len(sums)) * width
    keep = counts > 0
    return radii[keep], sums[keep] / counts[keep]


def write_radial_profile(field, path, bin_width=None):
    radii, values = radial_profile(field, bin_width)
    return write_csv(path, ["r", "phi(r)"], zip(radii, values))
