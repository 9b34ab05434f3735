"""Interpolation, quadrature and the discrete equilibrium system ``B T = Q``.

Nodal stresses ``T`` hold ``(s11, s22, s12)`` per node and are interpolated
with the same scalar Lagrange basis as the virtual displacements.  Testing
the weak equilibrium against every unit nodal displacement that vanishes on
the supports yields the rows of ``B``.

All integrals are evaluated through sparse quadrature operators:

* ``G`` maps nodal stresses to stress components at the quadrature points,
* ``E`` maps nodal displacements to strain components at the same points,

so that ``B_full = E^T diag(w |det J| (1, 1, 2)) G`` and the tensor inner
product ``s . e = s11 e11 + s22 e22 + 2 s12 e12`` is exact for the
polynomial integrands met here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .geometry import QUAD4, SUPPORT, TRI3, Mesh

#: weights of the Voigt-packed components in the tensor inner product
INNER = np.array([1.0, 1.0, 2.0])


class DomainError(ValueError):
    """Master-element coordinate outside the reference element."""


class ConfigurationError(ValueError):
    """Inconsistent support/load specification."""


@dataclass(frozen=True)
class QuadratureRule:
    """Points on the master element and their weights.

    The weights sum to the master-element measure (1/2 for the unit
    triangle, 4 for ``[-1, 1]^2``); ``degree`` is the polynomial exactness.
    """
    kind: str
    points: np.ndarray
    weights: np.ndarray
    degree: int
    name: str = ""


_S = 1.0 / np.sqrt(3.0)

TRI_3POINT = QuadratureRule(
    TRI3, np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]]),
    np.full(3, 1 / 6), degree=2, name="tri-3")

# degree 3; the negative centre weight can break positivity of the integrand sum
TRI_4POINT = QuadratureRule(
    TRI3, np.array([[1 / 3, 1 / 3], [0.2, 0.2], [0.6, 0.2], [0.2, 0.6]]),
    np.array([-27 / 96, 25 / 96, 25 / 96, 25 / 96]), degree=3, name="tri-4")

QUAD_GAUSS2 = QuadratureRule(
    QUAD4, np.array([[-_S, -_S], [_S, -_S], [_S, _S], [-_S, _S]]),
    np.ones(4), degree=3, name="gauss-2x2")

TRIANGLE_RULES = {"tri-3": TRI_3POINT, "tri-4": TRI_4POINT}


def shape_values(kind: str, xi, tol: float = 1e-12) -> np.ndarray:
    """Scalar nodal basis values at master coordinates ``xi``."""
    x, y = float(xi[0]), float(xi[1])
    if kind == TRI3:
        if x < -tol or y < -tol or x + y > 1 + tol:
            raise DomainError(f"({x}, {y}) lies outside the unit triangle")
        return np.array([1.0 - x - y, x, y])
    if kind == QUAD4:
        if abs(x) > 1 + tol or abs(y) > 1 + tol:
            raise DomainError(f"({x}, {y}) lies outside [-1, 1]^2")
        return 0.25 * np.array([(1 - x) * (1 - y), (1 + x) * (1 - y),
                                (1 + x) * (1 + y), (1 - x) * (1 + y)])
    raise ValueError(f"unknown element kind {kind!r}")


def shape_gradients(kind: str, xi) -> np.ndarray:
    """Derivatives of the basis w.r.t. master coordinates, shape (nodes, 2)."""
    x, y = float(xi[0]), float(xi[1])
    if kind == TRI3:
        return np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return 0.25 * np.array([[-(1 - y), -(1 - x)], [(1 - y), -(1 + x)],
                            [(1 + y), (1 + x)], [-(1 + y), (1 - x)]])


@dataclass(frozen=True, eq=False)
class QuadratureOperators:
    """Sparse maps from nodal unknowns to quadrature-point values.

    Attributes
    ----------
    element : (nq,) element id of every quadrature point
    xi, xy : (nq, 2) master and physical coordinates
    wdet : (nq,) ``w_e |det J_k(xi_e)|``
    G : (3 nq, 3 N) nodal stresses -> ``(s11, s22, s12)`` per point
    E : (3 nq, 2 N) nodal displacements -> ``(e11, e22, e12)`` per point
    """
    mesh: Mesh
    element: np.ndarray
    xi: np.ndarray
    xy: np.ndarray
    wdet: np.ndarray
    G: sp.csr_matrix
    E: sp.csr_matrix

    @property
    def num_points(self) -> int:
        return len(self.wdet)

    def stress_at_points(self, T: np.ndarray) -> np.ndarray:
        return (self.G @ T).reshape(-1, 3)

    def strain_at_points(self, u: np.ndarray) -> np.ndarray:
        return (self.E @ u).reshape(-1, 3)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.wdet, values))


def build_quadrature(mesh: Mesh, triangle_rule: str = "tri-3") -> QuadratureOperators:
    rules = {TRI3: TRIANGLE_RULES[triangle_rule], QUAD4: QUAD_GAUSS2}
    elem, xis, xys, wdet = [], [], [], []
    g_rows, g_cols, g_vals = [], [], []
    e_rows, e_cols, e_vals = [], [], []
    q = 0
    for kind in (TRI3, QUAD4):
        ids, conn = mesh.connectivity(kind)
        if len(ids) == 0:
            continue
        rule = rules[kind]
        X = mesh.points[conn]                                    # (ne, nen, 2)
        nen = conn.shape[1]
        ne, nqe = len(ids), len(rule.weights)
        for e_loc, (pt, w) in enumerate(zip(rule.points, rule.weights)):
            Nv = shape_values(kind, pt)                          # (nen,)
            dN = shape_gradients(kind, pt)                       # (nen, 2)
            J = np.einsum("eai,aj->eij", X, dN)                  # dx_i/dxi_j
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            if np.any(det <= 0):
                raise ValueError("non-positive Jacobian at a quadrature point")
            Jinv = np.empty_like(J)
            Jinv[:, 0, 0] = J[:, 1, 1] / det
            Jinv[:, 1, 1] = J[:, 0, 0] / det
            Jinv[:, 0, 1] = -J[:, 0, 1] / det
            Jinv[:, 1, 0] = -J[:, 1, 0] / det
            dNx = np.einsum("aj,eji->eai", dN, Jinv)             # (ne, nen, 2)
            qidx = q + np.arange(ne) * nqe + e_loc
            elem.append((qidx, ids))
            xis.append((qidx, np.tile(pt, (ne, 1))))
            xys.append((qidx, np.einsum("a,eai->ei", Nv, X)))
            wdet.append((qidx, w * np.abs(det)))
            for c in range(3):
                rows = np.repeat(3 * qidx + c, nen)
                g_rows.append(rows)
                g_cols.append((3 * conn + c).ravel())
                g_vals.append(np.tile(Nv, ne))
            # e11 = du1/dx1, e22 = du2/dx2, e12 = (du1/dx2 + du2/dx1) / 2
            for c, (d, comp, fac) in enumerate(((0, 0, 1.0), (1, 1, 1.0))):
                e_rows.append(np.repeat(3 * qidx + c, nen))
                e_cols.append((2 * conn + comp).ravel())
                e_vals.append(fac * dNx[:, :, d].ravel())
            e_rows.append(np.repeat(3 * qidx + 2, nen))
            e_cols.append((2 * conn + 0).ravel())
            e_vals.append(0.5 * dNx[:, :, 1].ravel())
            e_rows.append(np.repeat(3 * qidx + 2, nen))
            e_cols.append((2 * conn + 1).ravel())
            e_vals.append(0.5 * dNx[:, :, 0].ravel())
        q += ne * nqe
    nq = q

    def scatter(parts, width):
        out = np.empty((nq, width) if width else nq)
        for idx, val in parts:
            out[idx] = val
        return out

    element = scatter([(i, v) for i, v in elem], 0).astype(int)
    G = sp.csr_matrix((np.concatenate(g_vals), (np.concatenate(g_rows), np.concatenate(g_cols))),
                      shape=(3 * nq, 3 * mesh.num_nodes))
    E = sp.csr_matrix((np.concatenate(e_vals), (np.concatenate(e_rows), np.concatenate(e_cols))),
                      shape=(3 * nq, 2 * mesh.num_nodes))
    return QuadratureOperators(mesh, element, scatter(xis, 2), scatter(xys, 2),
                               scatter(wdet, 0), G, E)


@dataclass(frozen=True, eq=False)
class EquilibriumSystem:
    """Rows of ``B T = Q`` for every free displacement dof.

    ``dof_map[j] = (node, direction)`` names the virtual displacement tested
    by row ``j``. ``load`` is the full nodal load vector (length ``2 N``,
    supported entries included) so that ``f(v) = load . v``.
    """
    B: sp.csr_matrix
    Q: np.ndarray
    dof_map: np.ndarray
    free: np.ndarray
    load: np.ndarray
    B_full: sp.csr_matrix = field(repr=False)
    quad: QuadratureOperators = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.B.shape


def consistent_edge_loads(mesh: Mesh, tractions: Mapping[str, Sequence[float]]) -> np.ndarray:
    """Nodal loads of constant edge tractions: ``t * length / 2`` per end node."""
    f = np.zeros(2 * mesh.num_nodes)
    for tag, t in tractions.items():
        t = np.asarray(t, dtype=float)
        for eid, loc in mesh.group(tag).edges:
            a, b = mesh.elements[eid].edge_nodes(loc)
            ell = float(np.linalg.norm(mesh.points[b] - mesh.points[a]))
            for node in (a, b):
                f[2 * node:2 * node + 2] += 0.5 * ell * t
    return f


def supported_nodes(mesh: Mesh, supports: Sequence[str]) -> np.ndarray:
    nodes = set()
    for tag in supports:
        for eid, loc in mesh.group(tag).edges:
            nodes.update(mesh.elements[eid].edge_nodes(loc))
    return np.array(sorted(nodes), dtype=int)


def assemble_equilibrium(mesh: Mesh, supports: Sequence[str] | None = None,
                         tractions: Mapping[str, Sequence[float]] | None = None,
                         point_forces: Sequence[tuple[int, float, float]] = (),
                         quad: QuadratureOperators | None = None,
                         triangle_rule: str = "tri-3") -> EquilibriumSystem:
    """Assemble ``B`` and ``Q`` with the supported dofs eliminated.

    ``supports`` defaults to the mesh groups whose role is ``support``;
    ``tractions`` defaults to the traction vectors stored on the groups.
    Supports clamp both displacement components of every node they touch.
    """
    if supports is None:
        supports = [g.tag for g in mesh.groups if g.role == SUPPORT]
    supports = list(supports)
    if tractions is None:
        tractions = {g.tag: g.traction for g in mesh.groups
                     if g.role != SUPPORT and g.traction is not None}
    if not supports:
        raise ConfigurationError("at least one support group is required")
    support_edges = set()
    for tag in supports:
        for eid, loc in mesh.group(tag).edges:
            support_edges.add(tuple(sorted(mesh.elements[eid].edge_nodes(loc))))
    for tag in tractions:
        g = mesh.group(tag)
        if tag in supports or g.role == SUPPORT:
            raise ConfigurationError(f"traction applied to support group {tag!r}")
        for eid, loc in g.edges:
            if tuple(sorted(mesh.elements[eid].edge_nodes(loc))) in support_edges:
                raise ConfigurationError(f"traction group {tag!r} overlaps a support edge")

    if quad is None:
        quad = build_quadrature(mesh, triangle_rule)
    load = consistent_edge_loads(mesh, tractions)
    for node, fx, fy in point_forces:
        load[2 * int(node)] += fx
        load[2 * int(node) + 1] += fy

    fixed = supported_nodes(mesh, supports)
    mask = np.ones(2 * mesh.num_nodes, dtype=bool)
    mask[2 * fixed] = False
    mask[2 * fixed + 1] = False
    free = np.flatnonzero(mask)

    weights = sp.diags(np.repeat(quad.wdet, 3) * np.tile(INNER, quad.num_points))
    B_full = (quad.E.T @ weights @ quad.G).tocsr()
    B_full.eliminate_zeros()
    B = B_full[free].tocsr()
    dof_map = np.column_stack([free // 2, free % 2])
    return EquilibriumSystem(B, load[free].copy(), dof_map, free, load, B_full, quad)


def interpolate_stress(mesh: Mesh, T: np.ndarray, element: int, xi) -> np.ndarray:
    """Stress tensor (2x2) of the nodal field ``T`` inside one element."""
    el = mesh.elements[element]
    Nv = shape_values(el.kind, xi)
    comps = np.asarray(T, dtype=float).reshape(-1, 3)[list(el.nodes)]
    s11, s22, s12 = Nv @ comps
    return np.array([[s11, s12], [s12, s22]])


def nodal_stress_field(mesh: Mesh, sigma) -> np.ndarray:
    """Nodal vector ``T`` sampling a stress field ``sigma(x, y) -> (s11, s22, s12)``."""
    return np.concatenate([np.asarray(sigma(x, y), dtype=float) for x, y in mesh.points])
