import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpimd.geometry import (QUAD4, SUPPORT, TRI3, BoundaryGroup, Element, Mesh,
                            generate_lshape_mesh, generate_rect_mesh)
from lpimd.statics import (QUAD_GAUSS2, TRI_3POINT, TRI_4POINT, ConfigurationError, DomainError,
                           assemble_equilibrium, build_quadrature, interpolate_stress,
                           nodal_stress_field, shape_values)

from conftest import clamp_left


def test_single_triangle_edge_load():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    mesh = Mesh(pts, (Element(TRI3, (0, 1, 2)),),
                (BoundaryGroup("fix", ((0, 1),), SUPPORT),
                 BoundaryGroup("pull", ((0, 2),), traction=(1.0, 0.0))))
    sys = assemble_equilibrium(mesh)
    # edge (2, 0) of length 1: both nodes get 0.5 in x; node 0 is supported
    assert np.allclose(sys.load, [0.5, 0, 0, 0, 0.5, 0])
    assert sys.B.shape == (2, 9)
    assert np.allclose(sys.Q, [0.5, 0.0])


def test_point_forces_add_to_nodes():
    mesh = clamp_left(generate_rect_mesh(1.0, 1.0, 1, 1))
    sys = assemble_equilibrium(mesh, tractions={}, point_forces=[(1, 2.0, -3.0)])
    assert np.allclose(sys.load[2:4], [2.0, -3.0])


@pytest.mark.parametrize("kind", [TRI3, QUAD4])
def test_shape_functions_partition_of_unity(kind, rng):
    for _ in range(20):
        xi = rng.uniform(0, 0.5, 2) if kind == TRI3 else rng.uniform(-1, 1, 2)
        assert shape_values(kind, xi).sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("kind,xi", [(TRI3, (0.7, 0.5)), (TRI3, (-0.1, 0.2)), (QUAD4, (1.2, 0.0))])
def test_shape_domain_checks(kind, xi):
    with pytest.raises(DomainError):
        shape_values(kind, xi)


def _tri_monomial(i, j):
    from math import factorial
    return factorial(i) * factorial(j) / factorial(i + j + 2)


@pytest.mark.parametrize("rule", [TRI_3POINT, TRI_4POINT])
def test_triangle_rules_exact_to_degree(rule):
    for i in range(rule.degree + 1):
        for j in range(rule.degree + 1 - i):
            got = np.sum(rule.weights * rule.points[:, 0] ** i * rule.points[:, 1] ** j)
            assert got == pytest.approx(_tri_monomial(i, j), rel=1e-14, abs=1e-16)


def test_gauss_rule_exact_to_degree_three():
    for i in range(4):
        for j in range(4):
            exact = (2.0 / (i + 1) if i % 2 == 0 else 0.0) * (2.0 / (j + 1) if j % 2 == 0 else 0.0)
            got = np.sum(QUAD_GAUSS2.weights * QUAD_GAUSS2.points[:, 0] ** i
                         * QUAD_GAUSS2.points[:, 1] ** j)
            assert got == pytest.approx(exact, abs=1e-14)


def _distorted(mesh, rng, amount=0.15):
    pts = mesh.points.copy()
    x, y = pts[:, 0], pts[:, 1]
    inner = (x > 1e-9) & (x < x.max() - 1e-9) & (y > 1e-9) & (y < y.max() - 1e-9)
    h = x.max() / 8
    pts[inner] += rng.uniform(-amount * h, amount * h, (inner.sum(), 2))
    return Mesh(pts, mesh.elements, mesh.groups)


@pytest.mark.parametrize("kind", [TRI3, QUAD4])
@pytest.mark.parametrize("distort", [False, True])
def test_patch_constant_stress(kind, distort, rng):
    mesh = clamp_left(generate_rect_mesh(2.0, 1.0, 8, 4, kind))
    if distort:
        mesh = _distorted(mesh, rng)
    s11, s22, s12 = 1.3, -0.4, 0.7
    tractions = {"right": (s11, s12), "top": (s12, s22), "bottom": (-s12, -s22)}
    sys = assemble_equilibrium(mesh, tractions=tractions)
    T = nodal_stress_field(mesh, lambda x, y: (s11, s22, s12))
    assert np.max(np.abs(sys.B @ T - sys.Q)) < 1e-12


def _master_gradients(kind, x1, x2):
    if kind == TRI3:
        return np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return 0.25 * np.array([[x2 - 1, x1 - 1], [1 - x2, -1 - x1], [1 + x2, 1 + x1], [-1 - x2, 1 - x1]])


def _reference_row_products(mesh, T, u):
    """sum_e int tau(T) . eps(u) with 3x3 Gauss / 7-point rules and direct geometry."""
    g = np.sqrt(0.6)
    gauss = [(a, b, wa * wb) for a, wa in ((-g, 5 / 9), (0, 8 / 9), (g, 5 / 9))
             for b, wb in ((-g, 5 / 9), (0, 8 / 9), (g, 5 / 9))]
    a1, b1 = 0.059715871789770, 0.470142064105115
    a2, b2 = 0.797426985353087, 0.101286507323456
    tri = [(1 / 3, 1 / 3, 0.225 / 2)]
    tri += [(p, q, 0.132394152788506 / 2) for p, q in ((b1, b1), (a1, b1), (b1, a1))]
    tri += [(p, q, 0.125939180544827 / 2) for p, q in ((b2, b2), (a2, b2), (b2, a2))]
    T = T.reshape(-1, 3)
    U = u.reshape(-1, 2)
    total = 0.0
    for el in mesh.elements:
        X = mesh.points[list(el.nodes)]
        rule = tri if el.kind == TRI3 else gauss
        for x1, x2, w in rule:
            N = shape_values(el.kind, (x1, x2))
            dN = _master_gradients(el.kind, x1, x2)
            J = X.T @ dN
            dNx = dN @ np.linalg.inv(J)
            grad = U[list(el.nodes)].T @ dNx
            eps = 0.5 * (grad + grad.T)
            s = N @ T[list(el.nodes)]
            sig = np.array([[s[0], s[2]], [s[2], s[1]]])
            total += w * abs(np.linalg.det(J)) * np.sum(sig * eps)
    return total


@pytest.mark.parametrize("kind", [TRI3, QUAD4])
def test_rows_match_independent_quadrature(kind, rng):
    mesh = clamp_left(_distorted(generate_rect_mesh(2.0, 1.0, 4, 2, kind), rng, 0.25))
    sys = assemble_equilibrium(mesh, tractions={"right": (0.0, -1.0)})
    T = rng.normal(size=3 * mesh.num_nodes)
    BT = sys.B @ T
    for j in rng.choice(len(sys.free), 6, replace=False):
        u = np.zeros(2 * mesh.num_nodes)
        u[sys.free[j]] = 1.0
        assert BT[j] == pytest.approx(_reference_row_products(mesh, T, u), rel=1e-6, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_rigid_motions_do_no_work(seed):
    rng = np.random.default_rng(seed)
    mesh = generate_lshape_mesh(2.0, 1.0, 0.25, target_h=0.4)
    quad = build_quadrature(mesh)
    a, b, w = rng.normal(size=3)
    x, y = mesh.points[:, 0], mesh.points[:, 1]
    rigid = np.column_stack([a - w * y, b + w * x])
    eps = quad.strain_at_points(rigid.ravel())
    assert np.max(np.abs(eps)) < 1e-12


def test_full_matrix_annihilates_translations(small_tri_beam):
    B_full = small_tri_beam.system.B_full
    ex = np.zeros(B_full.shape[0])
    ex[0::2] = 1.0
    assert np.max(np.abs(ex @ B_full)) < 1e-12


def test_row_count_matches_free_dofs(small_beam):
    mesh = small_beam.mesh
    sys = small_beam.system
    assert sys.B.shape == (2 * (mesh.num_nodes - 3), 3 * mesh.num_nodes)
    assert set(map(tuple, sys.dof_map)).isdisjoint({(0, 0), (0, 1)})


def test_interpolate_constant_field():
    mesh = generate_rect_mesh(1.0, 1.0, 2, 2, TRI3)
    T = nodal_stress_field(mesh, lambda x, y: (2.0, -1.0, 0.5))
    got = interpolate_stress(mesh, T, 3, (0.2, 0.3))
    assert np.allclose(got, [[2.0, 0.5], [0.5, -1.0]])


def test_interpolation_continuous_across_edge(rng):
    mesh = generate_rect_mesh(1.0, 1.0, 1, 1, TRI3)
    T = rng.normal(size=12)
    # shared diagonal from node 0 to node 3; element 0 = (0, 1, 3), element 1 = (0, 3, 2)
    for s in np.linspace(0, 1, 5):
        a = interpolate_stress(mesh, T, 0, (0.0, s))
        b = interpolate_stress(mesh, T, 1, (s, 0.0))
        assert np.allclose(a, b)


def test_traction_on_support_rejected():
    mesh = clamp_left(generate_rect_mesh(1.0, 1.0, 1, 1))
    with pytest.raises(ConfigurationError):
        assemble_equilibrium(mesh, tractions={"left": (1.0, 0.0)})


def test_no_support_rejected():
    mesh = generate_rect_mesh(1.0, 1.0, 1, 1)
    with pytest.raises(ConfigurationError):
        assemble_equilibrium(mesh, tractions={"right": (1.0, 0.0)})
