"""2D meshes for the benchmark domains: generation, tagging and text I/O.

A :class:`Mesh` is immutable. Nodes are stored as an ``(N, 2)`` coordinate
array, elements as a tuple of :class:`Element` records. Boundary groups refer
to element edges by ``(element id, local edge index)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import Delaunay

TRI3 = "tri3"
QUAD4 = "quad4"
KINDS = (TRI3, QUAD4)

LOCAL_EDGES = {
    TRI3: ((0, 1), (1, 2), (2, 0)),
    QUAD4: ((0, 1), (1, 2), (2, 3), (3, 0)),
}

SUPPORT = "support"
TRACTION = "traction"


class MeshError(ValueError):
    """Invalid mesh data or a violated mesh invariant."""


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Element:
    kind: str
    nodes: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MeshError(f"unknown element kind {self.kind!r}")
        expected = 3 if self.kind == TRI3 else 4
        if len(self.nodes) != expected:
            raise MeshError(f"{self.kind} needs {expected} nodes, got {len(self.nodes)}")

    def edge_nodes(self, local: int) -> tuple[int, int]:
        a, b = LOCAL_EDGES[self.kind][local]
        return self.nodes[a], self.nodes[b]


@dataclass(frozen=True)
class BoundaryGroup:
    tag: str
    edges: tuple[tuple[int, int], ...]
    role: str = TRACTION
    traction: tuple[float, float] | None = None

    def __post_init__(self):
        if self.role not in (SUPPORT, TRACTION):
            raise MeshError(f"group {self.tag!r}: unknown role {self.role!r}")
        if self.role == SUPPORT and self.traction is not None:
            raise MeshError(f"support group {self.tag!r} carries a traction vector")


def _polygon_area(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _det_jacobian_corners(kind: str, xy: np.ndarray) -> np.ndarray:
    """det J at the element corners (sufficient for positivity everywhere)."""
    if kind == TRI3:
        d1, d2 = xy[1] - xy[0], xy[2] - xy[0]
        return np.array([d1[0] * d2[1] - d1[1] * d2[0]])
    # bilinear map: det J is affine on the master square, corners suffice
    out = np.empty(4)
    for i in range(4):
        a = xy[(i + 1) % 4] - xy[i]
        b = xy[(i - 1) % 4] - xy[i]
        out[i] = a[0] * b[1] - a[1] * b[0]
    return out


@dataclass(frozen=True, eq=False)
class Mesh:
    points: np.ndarray
    elements: tuple[Element, ...]
    groups: tuple[BoundaryGroup, ...] = ()
    area: float = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise MeshError("points must be an (N, 2) array")
        if not np.all(np.isfinite(pts)):
            bad = int(np.argwhere(~np.isfinite(pts))[0, 0])
            raise MeshError(f"node {bad}: non-finite coordinate")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "groups", tuple(self.groups))

        n = len(pts)
        total = 0.0
        for eid, el in enumerate(self.elements):
            if len(set(el.nodes)) != len(el.nodes):
                raise MeshError(f"element {eid}: repeated node")
            if min(el.nodes) < 0 or max(el.nodes) >= n:
                raise MeshError(f"element {eid}: node id out of range")
            xy = pts[list(el.nodes)]
            if np.any(_det_jacobian_corners(el.kind, xy) <= 0.0):
                raise MeshError(f"element {eid}: non-positive Jacobian (inverted or degenerate)")
            total += _polygon_area(xy)
        object.__setattr__(self, "area", total)

        counts = self._edge_counts()
        seen_support: dict[tuple[int, int], str] = {}
        tags = set()
        for g in self.groups:
            if g.tag in tags:
                raise MeshError(f"duplicate group tag {g.tag!r}")
            tags.add(g.tag)
            for eid, loc in g.edges:
                if not 0 <= eid < len(self.elements):
                    raise MeshError(f"group {g.tag!r}: element {eid} out of range")
                el = self.elements[eid]
                if not 0 <= loc < len(LOCAL_EDGES[el.kind]):
                    raise MeshError(f"group {g.tag!r}: element {eid} has no edge {loc}")
                key = tuple(sorted(el.edge_nodes(loc)))
                if counts[key] != 1:
                    raise MeshError(f"group {g.tag!r}: edge {eid}:{loc} is not on the boundary")
                if g.role == SUPPORT:
                    if key in seen_support and seen_support[key] != g.tag:
                        raise MeshError(
                            f"edge {eid}:{loc} belongs to support groups "
                            f"{seen_support[key]!r} and {g.tag!r}")
                    seen_support[key] = g.tag

    def _edge_counts(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for el in self.elements:
            for loc in range(len(LOCAL_EDGES[el.kind])):
                key = tuple(sorted(el.edge_nodes(loc)))
                counts[key] = counts.get(key, 0) + 1
        return counts

    @property
    def num_nodes(self) -> int:
        return len(self.points)

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    @property
    def nodes(self) -> list[Node]:
        return [Node(i, float(x), float(y)) for i, (x, y) in enumerate(self.points)]

    def group(self, tag: str) -> BoundaryGroup:
        for g in self.groups:
            if g.tag == tag:
                return g
        raise KeyError(f"no boundary group tagged {tag!r}")

    def boundary_edges(self) -> list[tuple[int, int]]:
        """All (element id, local edge) pairs lying on the boundary."""
        counts = self._edge_counts()
        out = []
        for eid, el in enumerate(self.elements):
            for loc in range(len(LOCAL_EDGES[el.kind])):
                if counts[tuple(sorted(el.edge_nodes(loc)))] == 1:
                    out.append((eid, loc))
        return out

    def edge_coords(self, eid: int, loc: int) -> np.ndarray:
        return self.points[list(self.elements[eid].edge_nodes(loc))]

    def element_area(self, eid: int) -> float:
        return _polygon_area(self.points[list(self.elements[eid].nodes)])

    def kinds(self) -> set[str]:
        return {el.kind for el in self.elements}

    def connectivity(self, kind: str) -> tuple[np.ndarray, np.ndarray]:
        """Element ids and node table for all elements of one kind."""
        ids = [i for i, el in enumerate(self.elements) if el.kind == kind]
        width = 3 if kind == TRI3 else 4
        conn = np.array([self.elements[i].nodes for i in ids], dtype=int).reshape(-1, width)
        return np.array(ids, dtype=int), conn

    def replace_groups(self, groups: Iterable[BoundaryGroup]) -> "Mesh":
        return Mesh(self.points, self.elements, tuple(groups))

    def with_group(self, group: BoundaryGroup) -> "Mesh":
        others = [g for g in self.groups if g.tag != group.tag]
        return self.replace_groups(others + [group])


def tag_boundary(mesh: Mesh, tag: str, predicate: Callable[[np.ndarray], bool],
                 role: str = TRACTION, traction: Sequence[float] | None = None) -> Mesh:
    """Return a copy of ``mesh`` with a new group of boundary edges.

    ``predicate`` receives the (2, 2) endpoint coordinates of each boundary
    edge and selects the edge when it returns True.
    """
    edges = tuple(e for e in mesh.boundary_edges() if predicate(mesh.edge_coords(*e)))
    if not edges:
        raise MeshError(f"group {tag!r}: no boundary edge matched")
    tr = None if traction is None else (float(traction[0]), float(traction[1]))
    return mesh.with_group(BoundaryGroup(tag, edges, role, tr))


def in_box(xmin: float, xmax: float, ymin: float, ymax: float, tol: float = 1e-9):
    """Edge predicate: both endpoints inside the (slightly inflated) box."""
    def pred(xy: np.ndarray) -> bool:
        return bool(np.all((xy[:, 0] >= xmin - tol) & (xy[:, 0] <= xmax + tol)
                           & (xy[:, 1] >= ymin - tol) & (xy[:, 1] <= ymax + tol)))
    return pred


def generate_rect_mesh(length: float, height: float, nx: int, ny: int,
                       kind: str = QUAD4) -> Mesh:
    """Structured mesh of ``[0, length] x [0, height]``.

    Groups ``left``, ``right``, ``bottom`` and ``top`` are tagged automatically.
    Triangular meshes split every cell along its lower-left/upper-right diagonal.
    """
    if not (length > 0 and height > 0):
        raise ValueError("length and height must be positive")
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError("nx and ny must be integers >= 1")
    if kind not in KINDS:
        raise ValueError(f"unknown element kind {kind!r}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, length, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    points = np.column_stack([X.ravel(), Y.ravel()])
    return _grid_mesh(points, nx + 1, [(i, j) for j in range(ny) for i in range(nx)], kind,
                      length, height)


def _grid_mesh(points, row, cells, kind, length, height):
    elements = []
    for i, j in cells:
        a = j * row + i
        b, c, d = a + 1, a + row + 1, a + row
        if kind == QUAD4:
            elements.append(Element(QUAD4, (a, b, c, d)))
        else:
            elements.append(Element(TRI3, (a, b, c)))
            elements.append(Element(TRI3, (a, c, d)))
    mesh = Mesh(points, elements)
    for tag, pred in (("left", in_box(0, 0, 0, height)),
                      ("right", in_box(length, length, 0, height)),
                      ("bottom", in_box(0, length, 0, 0)),
                      ("top", in_box(0, length, height, height))):
        try:
            mesh = tag_boundary(mesh, tag, pred)
        except MeshError:
            pass
    return mesh


def lshape_outline(leg: float, thickness: float, corner_radius: float = 0.0,
                   fillet_segments: int = 8) -> np.ndarray:
    """Counter-clockwise corner list of the L-shaped domain.

    The horizontal arm lies along the bottom, the vertical arm along the left
    side; the reentrant corner sits at ``(thickness, thickness)`` and is
    optionally rounded by a polyline fillet of ``fillet_segments`` chords.
    """
    t, r = thickness, corner_radius
    pts = [(0.0, 0.0), (leg, 0.0), (leg, t)]
    if r > 0:
        cx = cy = t + r
        for th in np.linspace(1.5 * np.pi, np.pi, fillet_segments + 1):
            pts.append((cx + r * math.cos(th), cy + r * math.sin(th)))
        pts[-fillet_segments - 1] = (t + r, t)
        pts[-1] = (t, t + r)
    else:
        pts.append((t, t))
    pts += [(t, leg), (0.0, leg)]
    return np.array(pts)


def _discretize_outline(outline: np.ndarray, h: float) -> np.ndarray:
    pts = []
    n = len(outline)
    for i in range(n):
        a, b = outline[i], outline[(i + 1) % n]
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / h - 1e-9)))
        for s in range(k):
            pts.append(a + (b - a) * (s / k))
    return np.array(pts)


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(p - proj, axis=1)


def _inside_polygon(p: np.ndarray, poly: np.ndarray) -> np.ndarray:
    x, y = p[:, 0], p[:, 1]
    inside = np.zeros(len(p), dtype=bool)
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        cond = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < xc)
    return inside


def generate_lshape_mesh(leg: float, thickness: float, corner_radius: float = 0.0,
                         target_h: float = 0.05, kind: str = TRI3,
                         fillet_segments: int = 8) -> Mesh:
    """Mesh of the L-shaped domain with an optionally rounded reentrant corner.

    Tagged groups: ``support`` (top edge of the vertical arm), ``load`` (right
    edge of the horizontal arm), and the remaining straight sides ``left`` and
    ``bottom``.  Triangle meshes are unstructured (Delaunay with recovered
    boundary); quadrilateral meshes are structured and need a sharp corner.
    """
    if not (leg > 0 and thickness > 0 and target_h > 0):
        raise ValueError("leg, thickness and target_h must be positive")
    if thickness >= leg:
        raise ValueError("thickness must be smaller than leg")
    if not (0.0 <= corner_radius < thickness) or thickness + corner_radius >= leg:
        raise ValueError(f"infeasible fillet radius {corner_radius} for thickness {thickness}")
    if kind not in KINDS:
        raise ValueError(f"unknown element kind {kind!r}")
    if kind == QUAD4:
        if corner_radius > 0:
            raise ValueError("quad4 L-shape meshes require corner_radius = 0")
        mesh = _lshape_quad(leg, thickness, target_h)
    else:
        mesh = _lshape_tri(leg, thickness, corner_radius, target_h, fillet_segments)
    t = thickness
    tagged = [("support", in_box(0, t, leg, leg), SUPPORT),
              ("load", in_box(leg, leg, 0, t), TRACTION),
              ("left", in_box(0, 0, 0, leg), TRACTION),
              ("bottom", in_box(0, leg, 0, 0), TRACTION)]
    for tag, pred, role in tagged:
        mesh = tag_boundary(mesh, tag, pred, role=role)
    return mesh


def _lshape_quad(leg, t, h):
    nt = max(1, round(t / h))
    na = max(1, round((leg - t) / h))
    xs = np.concatenate([np.linspace(0, t, nt + 1), np.linspace(t, leg, na + 1)[1:]])
    row = len(xs)
    X, Y = np.meshgrid(xs, xs)
    points = np.column_stack([X.ravel(), Y.ravel()])
    keep = np.zeros(len(points), dtype=bool)
    cells = [(i, j) for j in range(row - 1) for i in range(row - 1) if i < nt or j < nt]
    for i, j in cells:
        a = j * row + i
        keep[[a, a + 1, a + row, a + row + 1]] = True
    renum = -np.ones(len(points), dtype=int)
    renum[keep] = np.arange(keep.sum())
    elements = []
    for i, j in cells:
        a = j * row + i
        elements.append(Element(QUAD4, tuple(int(renum[v]) for v in (a, a + 1, a + row + 1, a + row))))
    return Mesh(points[keep], elements)


def _lshape_tri(leg, t, r, h, fillet_segments):
    outline = lshape_outline(leg, t, r, fillet_segments)
    bpts = _discretize_outline(outline, h)
    # equilateral lattice keeps the Delaunay triangulation unambiguous
    dy = h * math.sqrt(3.0) / 2.0
    rows = []
    for j in range(int(leg / dy) + 2):
        off = 0.5 * h * (j % 2)
        xs = np.arange(off, leg + h, h)
        rows.append(np.column_stack([xs, np.full(len(xs), j * dy)]))
    lattice = np.vstack(rows)
    lattice = lattice[_inside_polygon(lattice, outline)]
    dist = np.full(len(lattice), np.inf)
    nb = len(bpts)
    for i in range(nb):
        dist = np.minimum(dist, _segment_distance(lattice, bpts[i], bpts[(i + 1) % nb]))
    lattice = lattice[dist > 0.55 * h]
    points = np.vstack([bpts, lattice])

    tri = Delaunay(points)
    simplices = tri.simplices
    cent = points[simplices].mean(axis=1)
    simplices = simplices[_inside_polygon(cent, outline)]

    # every outline chord must appear as a triangle edge
    edges = set()
    for s in simplices:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            edges.add(tuple(sorted((int(s[a]), int(s[b])))))
    for i in range(nb):
        if tuple(sorted((i, (i + 1) % nb))) not in edges:
            raise MeshError("boundary recovery failed; try a different target_h")

    elements = []
    for s in simplices:
        a, b, c = (int(v) for v in s)
        d1, d2 = points[b] - points[a], points[c] - points[a]
        if d1[0] * d2[1] - d1[1] * d2[0] < 0:
            b, c = c, b
        elements.append(Element(TRI3, (a, b, c)))
    mesh = Mesh(points, elements)
    if abs(mesh.area - _polygon_area(outline)) > 1e-12 * abs(_polygon_area(outline)):
        raise MeshError("triangulation does not cover the polygon")
    return mesh


def write_mesh(mesh: Mesh, path) -> None:
    """Write the whitespace-separated ``mesh2d`` text format."""
    lines = [f"mesh2d {mesh.num_nodes} {mesh.num_elements} {len(mesh.groups)}"]
    for i, (x, y) in enumerate(mesh.points):
        lines.append(f"n {i} {float(x)!r} {float(y)!r}")
    for i, el in enumerate(mesh.elements):
        lines.append(f"e {i} {el.kind} " + " ".join(str(v) for v in el.nodes))
    for g in mesh.groups:
        head = f"g {g.tag} {g.role}"
        if g.traction is not None:
            head += f" {g.traction[0]!r} {g.traction[1]!r}"
        lines.append(head + "".join(f" {e}:{k}" for e, k in g.edges))
    Path(path).write_text("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    """Parse a ``mesh2d`` file and validate every mesh invariant."""
    text = Path(path).read_text().splitlines()
    header = None
    nodes: dict[int, tuple[float, float]] = {}
    elements: dict[int, Element] = {}
    groups = []
    for lineno, raw in enumerate(text, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if header is None:
                if tok[0] != "mesh2d" or len(tok) != 4:
                    raise ValueError("expected header 'mesh2d <nodes> <elements> <groups>'")
                header = tuple(int(v) for v in tok[1:])
            elif tok[0] == "n":
                if len(tok) != 4:
                    raise ValueError("node line needs 'n <id> <x> <y>'")
                nid = int(tok[1])
                if nid in nodes:
                    raise ValueError(f"duplicate node id {nid}")
                nodes[nid] = (float(tok[2]), float(tok[3]))
            elif tok[0] == "e":
                eid = int(tok[1])
                if eid in elements:
                    raise ValueError(f"duplicate element id {eid}")
                el = Element(tok[2], tuple(int(v) for v in tok[3:]))
                if len(set(el.nodes)) != len(el.nodes):
                    raise MeshError(f"element {eid}: repeated node")
                elements[eid] = el
            elif tok[0] == "g":
                tag, role = tok[1], tok[2]
                rest = tok[3:]
                traction = None
                if rest and ":" not in rest[0]:
                    traction = (float(rest[0]), float(rest[1]))
                    rest = rest[2:]
                edges = tuple(tuple(int(v) for v in item.split(":")) for item in rest)
                groups.append(BoundaryGroup(tag, edges, role, traction))
            else:
                raise ValueError(f"unknown record type {tok[0]!r}")
        except MeshError:
            raise
        except (ValueError, IndexError) as exc:
            raise MeshError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise MeshError(f"{path}: missing mesh2d header")
    nn, ne, ng = header
    if sorted(nodes) != list(range(nn)):
        raise MeshError(f"{path}: node ids must be dense 0..{nn - 1}")
    if sorted(elements) != list(range(ne)):
        raise MeshError(f"{path}: element ids must be dense 0..{ne - 1}")
    if len(groups) != ng:
        raise MeshError(f"{path}: header announces {ng} groups, found {len(groups)}")
    points = np.array([nodes[i] for i in range(nn)], dtype=float).reshape(-1, 2)
    return Mesh(points, [elements[i] for i in range(ne)], groups)
