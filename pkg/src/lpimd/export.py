"""Field export: legacy ASCII VTK, CSV tables and JSON summaries."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .geometry import QUAD4, TRI3, Mesh

VTK_CELL_TYPES = {TRI3: 5, QUAD4: 9}


def fmt(x) -> str:
    """Shortest round-trip text of a float, shared by every exporter."""
    return repr(float(x))


def export_vtk(mesh: Mesh, fields: Mapping[str, np.ndarray], path, title: str = "lpimd fields"):
    """Write node-based scalar fields on the mesh as VTK legacy ASCII 3.0."""
    n = mesh.num_nodes
    arrays = {}
    for name, values in fields.items():
        values = np.asarray(values, dtype=float).ravel()
        if values.size != n:
            raise ValueError(f"field {name!r} has {values.size} values, mesh has {n} nodes")
        if not name or any(c.isspace() for c in name):
            raise ValueError(f"field name {name!r} must be non-empty without whitespace")
        arrays[name] = values
    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double"]
    lines += [f"{fmt(x)} {fmt(y)} 0.0" for x, y in mesh.points]
    size = sum(len(e.nodes) + 1 for e in mesh.elements)
    lines.append(f"CELLS {mesh.num_elements} {size}")
    lines += [" ".join(map(str, (len(e.nodes), *e.nodes))) for e in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.num_elements}")
    lines += [str(VTK_CELL_TYPES[e.kind]) for e in mesh.elements]
    if arrays:
        lines.append(f"POINT_DATA {n}")
        for name, values in arrays.items():
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [fmt(v) for v in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk_point_data(path) -> dict[str, np.ndarray]:
    """Scalar point arrays of a file written by :func:`export_vtk`."""
    lines = Path(path).read_text().splitlines()
    out, i = {}, 0
    n = None
    while i < len(lines):
        parts = lines[i].split()
        if parts[:1] == ["POINT_DATA"]:
            n = int(parts[1])
        elif parts[:1] == ["SCALARS"] and n is not None:
            out[parts[1]] = np.array([float(v) for v in lines[i + 2:i + 2 + n]])
            i += 1 + n
        i += 1
    return out


def export_csv(path, columns: Mapping[str, np.ndarray]):
    """RFC-4180 CSV with one column per entry."""
    names = list(columns)
    data = [np.asarray(columns[k]).ravel() for k in names]
    if len({len(d) for d in data}) > 1:
        raise ValueError("all CSV columns must have the same length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([v if isinstance(v, (str, int, np.integer, bool, np.bool_)) else fmt(v)
                        for v in row])


def read_csv(path) -> dict[str, list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return {name: [r[j] for r in rows[1:]] for j, name in enumerate(rows[0])}


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_json(path, data: dict):
    Path(path).write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def write_result_bundle(model, result, out_dir) -> dict[str, Path]:
    """Summary JSON, nodal VTK/CSV and quadrature-point CSV of one solve."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{result.method}_p{'inf' if math.isinf(result.p) else format(result.p, 'g')}"
    mod = result.moduli
    T = result.T.reshape(-1, 3)
    nodal = {"k": model.nodal_average(mod.k), "mu": model.nodal_average(mod.mu),
             "E": model.nodal_average(mod.E), "nu": model.nodal_average(mod.nu),
             "s11": T[:, 0], "s22": T[:, 1], "s12": T[:, 2]}
    paths = {"summary": out / f"{stem}_summary.json", "vtk": out / f"{stem}.vtk",
             "nodes": out / f"{stem}_nodes.csv", "points": out / f"{stem}_points.csv"}
    write_json(paths["summary"], result.summary())
    export_vtk(model.mesh, nodal, paths["vtk"], title=f"{result.method} p={result.p}")
    export_csv(paths["nodes"], {"node": np.arange(model.mesh.num_nodes),
                                "x": model.mesh.points[:, 0], "y": model.mesh.points[:, 1],
                                **nodal})
    q = model.quad
    export_csv(paths["points"], {"element": q.element, "x": q.xy[:, 0], "y": q.xy[:, 1],
                                 "weight": q.wdet, "k": mod.k, "mu": mod.mu, "E": mod.E,
                                 "nu": mod.nu, "void": mod.void.astype(int),
                                 "s11": result.tau[:, 0], "s22": result.tau[:, 1],
                                 "s12": result.tau[:, 2]})
    return paths
