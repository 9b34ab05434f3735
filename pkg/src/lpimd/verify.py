"""Independent checks: closed-form lemma minimisers and a grid-search oracle,
dual lower bounds, optimality residuals and monotonicity in ``p``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .objective import BETA, ExponentParams, check_method, components_tr_dev
from .statics import INNER, EquilibriumSystem


# ---------------------------------------------------------------- lemmas

@dataclass(frozen=True)
class CellField:
    """Piecewise-constant non-negative functions ``a_1..a_n`` on cells."""
    cells: tuple

    def __init__(self, cells):
        norm = []
        for meas, values in cells:
            vals = np.atleast_1d(np.asarray(values, dtype=float))
            if not meas > 0:
                raise ValueError(f"cell measure must be positive, got {meas}")
            if np.any(vals < 0) or not np.all(np.isfinite(vals)):
                raise ValueError("cell values must be finite and non-negative")
            norm.append((float(meas), vals))
        if not norm:
            raise ValueError("at least one cell is required")
        if len({len(v) for _, v in norm}) != 1:
            raise ValueError("all cells need the same number of components")
        object.__setattr__(self, "cells", tuple(norm))

    @property
    def measures(self) -> np.ndarray:
        return np.array([m for m, _ in self.cells])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.cells])

    @property
    def total_measure(self) -> float:
        return float(self.measures.sum())


def _r(p: float) -> float:
    return ExponentParams(p).r


def vp_cost(field: CellField, u: np.ndarray, p: float) -> float:
    """``(sum_cells meas sum_i u_i^p)^(1/p)``."""
    return float(np.dot(field.measures, (np.asarray(u) ** p).sum(axis=1)) ** (1.0 / p))


def sp_cost(field: CellField, u: np.ndarray, p: float) -> float:
    """``(sum_cells meas (sum_i u_i)^p)^(1/p)``."""
    return float(np.dot(field.measures, np.asarray(u).sum(axis=1) ** p) ** (1.0 / p))


def lemma_objective(field: CellField, u: np.ndarray) -> float:
    """``sum_cells meas sum_i a_i / u_i`` with ``0/0 = 0``."""
    a, u = field.values, np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(a > 0, a / u, 0.0)
    return float(np.dot(field.measures, q.sum(axis=1)))


def lemma_vp(field: CellField, p: float, Lambda: float):
    """Minimum of ``sum a_i/u_i`` subject to ``(sum meas sum u_i^p)^(1/p) <= Lambda``.

    Returns ``(value, u)`` with ``value = |sqrt a|_r^2 / Lambda`` and
    ``u_i = Lambda (sqrt(a_i) / |sqrt a|_r)^(2-r)``.
    """
    r = _r(p)
    meas, a = field.measures, field.values
    mass = float(np.dot(meas, (a ** (r / 2.0)).sum(axis=1)))
    if mass == 0.0:
        u = np.full_like(a, Lambda / (field.total_measure * a.shape[1]) ** (1.0 / p))
        return 0.0, u
    norm = mass ** (1.0 / r)
    u = Lambda * (np.sqrt(a) / norm) ** (2.0 - r)
    return norm ** 2 / Lambda, u


def lemma_sp(field: CellField, p: float, Lambda: float):
    """Minimum of ``sum a_i/u_i`` subject to ``(sum meas (sum_i u_i)^p)^(1/p) <= Lambda``.

    ``value = |sum_i sqrt a_i|_r^2 / Lambda`` and
    ``u_i = Lambda / |s|_r^(2-r) * sqrt(a_i) / s^(r-1)`` with ``s = sum_i sqrt a_i``.
    """
    r = _r(p)
    meas, a = field.measures, field.values
    root = np.sqrt(a)
    s = root.sum(axis=1)
    mass = float(np.dot(meas, s ** r))
    if mass == 0.0:
        u = np.full_like(a, Lambda / field.total_measure ** (1.0 / p) / a.shape[1])
        return 0.0, u
    norm = mass ** (1.0 / r)
    safe = np.where(s > 0, s, 1.0)
    u = np.where(s[:, None] > 0, Lambda / norm ** (2.0 - r) * root / safe[:, None] ** (r - 1.0), 0.0)
    return norm ** 2 / Lambda, u


def brute_force_oracle(field: CellField, p: float, Lambda: float, variant: str = "vp",
                       resolution: int = 400, levels: int = 12, zoom_resolution: int = 41,
                       max_points: int = 1_000_000) -> float:
    """Grid search of the lemma problems on the saturated constraint surface.

    Every active unknown but the last is placed on a logarithmic grid; the
    last one is solved from the active constraint, so every sample is
    feasible and the result over-estimates the minimum by the grid error.
    The grid is re-centred and narrowed around the best sample at each
    level (first level ``resolution`` points per axis, capped so the grid has
    at most ``max_points`` samples; later levels ``zoom_resolution``).
    Components with ``a_i = 0`` get ``u_i = 0``.
    """
    check_method(variant)
    meas, a = field.measures, field.values
    active = [(c, i) for c in range(len(meas)) for i in range(a.shape[1]) if a[c, i] > 0]
    if not active:
        return 0.0
    budget = Lambda ** p
    if variant == "sp":
        cells = sorted({c for c, _ in active})
        last_cell = active[-1][0]
    m = len(active)
    dim = m - 1
    coef = np.array([meas[c] * a[c, i] for c, i in active])

    def evaluate(logu):                      # logu: (k, dim)
        u = np.exp(logu)
        k = u.shape[0]
        if variant == "vp":
            spent = (u ** p) @ np.array([meas[c] for c, _ in active[:-1]]) if dim else np.zeros(k)
            rest = budget - spent
            with np.errstate(invalid="ignore"):
                last = (rest / meas[active[-1][0]]) ** (1.0 / p)
            ok = rest > 0
        else:
            sums = {c: np.zeros(k) for c in cells}
            for j, (c, _) in enumerate(active[:-1]):
                sums[c] = sums[c] + u[:, j]
            spent = sum(meas[c] * sums[c] ** p for c in cells if c != last_cell)
            rest = budget - spent
            with np.errstate(invalid="ignore"):
                total_last = (rest / meas[last_cell]) ** (1.0 / p)
            last = total_last - sums[last_cell]
            ok = (rest > 0) & (last > 0)
        full = np.column_stack([u, np.where(ok, last, 1.0)])
        val = (coef / full).sum(axis=1)
        return np.where(ok, val, np.inf)

    if dim == 0:
        return float(evaluate(np.zeros((1, 0)))[0])
    per_axis = max(8, min(resolution, int(max_points ** (1.0 / dim))))
    ref = math.log(Lambda / (field.total_measure * m) ** (1.0 / p))
    center = np.full(dim, ref)
    half = np.full(dim, math.log(1e4))
    best = math.inf
    for _ in range(levels):
        axes = [np.linspace(center[j] - half[j], center[j] + half[j], per_axis) for j in range(dim)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        vals = evaluate(grid)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best = float(vals[k])
            center = grid[k]
        step = 2.0 * half / (per_axis - 1)
        half = 2.0 * step
        per_axis = min(per_axis, zoom_resolution)
    return best


# ---------------------------------------------------------------- power laws

def invariant_coords(c: np.ndarray) -> np.ndarray:
    """Orthonormal coordinates ``(Tr, d1, d2)`` of rows ``(s11, s22, s12)``.

    ``|dev|^2 = d1^2 + d2^2`` and ``s . e`` equals the Euclidean product.
    """
    c = np.atleast_2d(np.asarray(c, dtype=float))
    return np.column_stack([(c[:, 0] + c[:, 1]) / BETA,
                            (c[:, 0] - c[:, 1]) / math.sqrt(2.0),
                            math.sqrt(2.0) * c[:, 2]])


def from_invariant_coords(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mean = x[:, 0] / BETA
    half = x[:, 1] / math.sqrt(2.0)
    return np.column_stack([mean + half, mean - half, x[:, 2] / math.sqrt(2.0)])


def _signed_power(x, e):
    return np.sign(x) * np.abs(x) ** e


def _dev_power(dev, e):
    """``(|dev|/beta)^(e-1) dev`` for deviator rows in invariant coordinates."""
    n = np.linalg.norm(dev, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(n > 0, (n / BETA) ** (e - 1.0), 0.0)
    return fac[:, None] * dev


def stress_to_strain(tau: np.ndarray, params: ExponentParams) -> np.ndarray:
    """vp constitutive law ``Tr e = |Tr t|^(r-2) Tr t``, ``dev e = (|dev t|/beta)^(r-2) dev t``."""
    x = invariant_coords(tau)
    r = params.r
    out = np.column_stack([_signed_power(x[:, 0], r - 1.0), _dev_power(x[:, 1:], r - 1.0)])
    return from_invariant_coords(out)


def strain_to_stress(eps: np.ndarray, params: ExponentParams) -> np.ndarray:
    """Inverse of :func:`stress_to_strain` (exponents ``r' - 2``)."""
    x = invariant_coords(eps)
    rc = params.r_conj
    out = np.column_stack([_signed_power(x[:, 0], rc - 1.0), _dev_power(x[:, 1:], rc - 1.0)])
    return from_invariant_coords(out)


def optimality_residual(tau: np.ndarray, eps: np.ndarray, method: str, params: ExponentParams,
                        weights: np.ndarray | None = None) -> dict:
    """Pointwise mismatch between a stress and a strain field.

    vp: Euclidean norm of the residuals of both power laws.  sp: distance of
    ``(Tr e, dev e)`` to the sets ``S^(r-1) Sign(Tr t)`` and
    ``beta S^(r-1) N(dev t)``, with the interval/ball used where the stress
    part vanishes.  Returns ``max``, ``l2`` (weighted if ``weights``) and the
    per-point array.
    """
    check_method(method)
    x, y = invariant_coords(tau), invariant_coords(eps)
    r = params.r
    if method == "vp" and r != 1.0:
        target = invariant_coords(stress_to_strain(tau, params))
        res = np.linalg.norm(y - target, axis=1)
    else:
        a = np.abs(x[:, 0])
        dn = np.linalg.norm(x[:, 1:], axis=1)
        S = a + BETA * dn
        rad = S ** (r - 1.0) if r != 1.0 else np.ones_like(S)
        tr_res = np.where(a > 0, np.abs(y[:, 0] - rad * np.sign(x[:, 0])),
                          np.maximum(np.abs(y[:, 0]) - rad, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(dn[:, None] > 0, x[:, 1:] / dn[:, None], 0.0)
        point = BETA * rad[:, None] * unit
        ball = np.maximum(np.linalg.norm(y[:, 1:], axis=1) - BETA * rad, 0.0)
        dev_res = np.where(dn > 0, np.linalg.norm(y[:, 1:] - point, axis=1), ball)
        res = np.hypot(tr_res, dev_res)
    w = np.ones(len(res)) if weights is None else np.asarray(weights)
    return {"max": float(res.max(initial=0.0)), "l2": float(math.sqrt(np.dot(w, res ** 2))),
            "pointwise": res}


# ---------------------------------------------------------------- duality

def dual_density(eps: np.ndarray, method: str, params: ExponentParams) -> np.ndarray:
    """``|||e|||_*^(r') / r'`` at rows of strain components."""
    tr, dev = components_tr_dev(eps)
    a, b = np.abs(tr), dev
    rc = params.r_conj
    if method == "sp" or params.r == 1.0:
        return np.maximum(a, b / BETA) ** rc / rc
    return (a ** rc + BETA ** (2.0 - rc) * b ** rc) / rc


def dual_sup_norm(eps: np.ndarray) -> np.ndarray:
    tr, dev = components_tr_dev(eps)
    return np.maximum(np.abs(tr), dev / BETA)


def _check_admissible(v: np.ndarray, system: EquilibriumSystem) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != system.load.shape:
        raise ValueError(f"displacement vector must have length {system.load.size}")
    fixed = np.setdiff1d(np.arange(v.size), system.free)
    if np.any(v[fixed] != 0.0):
        raise ValueError("virtual displacement must vanish on the supports")
    return v


def dual_value(v: np.ndarray, method: str, params: ExponentParams,
               system: EquilibriumSystem, lock_tol: float = 1e-12) -> float:
    """``f(v) - sum_q w_q |||e_q|||_*^(r') / r'``; a lower bound for the primal minimum.

    At ``p = 1`` the locking form is used: ``f(v)`` if
    ``max(|Tr e|, |dev e|/beta) <= 1`` at every point, else ``-inf``.
    """
    check_method(method)
    v = _check_admissible(v, system)
    f = float(system.load @ v)
    eps = system.quad.strain_at_points(v)
    if math.isinf(params.r_conj):
        return f if dual_sup_norm(eps).max(initial=0.0) <= 1.0 + lock_tol else -math.inf
    return f - float(np.dot(system.quad.wdet, dual_density(eps, method, params)))


def homogeneous_displacement(system: EquilibriumSystem) -> np.ndarray:
    """Displacement of the unit-stiffness body (stress equals strain) under the load."""
    quad = system.quad
    W = sp.diags(np.repeat(quad.wdet, 3) * np.tile(INNER, quad.num_points))
    K = (quad.E.T @ W @ quad.E).tocsc()
    free = system.free
    v = np.zeros(system.load.size)
    v[free] = spla.spsolve(K[free][:, free].tocsc(), system.load[free])
    return v


def best_amplitude(v: np.ndarray, method: str, params: ExponentParams,
                   system: EquilibriumSystem) -> float:
    """Maximiser ``c`` of ``dual_value(c v)`` (closed form; homogeneous terms)."""
    f = float(system.load @ v)
    eps = system.quad.strain_at_points(v)
    if f <= 0:
        return 0.0
    if math.isinf(params.r_conj):
        m = dual_sup_norm(eps).max(initial=0.0)
        return 1.0 / m if m > 0 else 0.0
    rc = params.r_conj
    D = rc * float(np.dot(system.quad.wdet, dual_density(eps, method, params)))
    return (f / D) ** (1.0 / (rc - 1.0))


def dual_candidate(system: EquilibriumSystem, method: str, params: ExponentParams):
    """Line-searched homogeneous-body candidate: ``(v, dual value)``."""
    v = homogeneous_displacement(system)
    v = best_amplitude(v, method, params, system) * v
    return v, dual_value(v, method, params, system)


# ---------------------------------------------------------------- monotonicity

def vp_scale(p: float) -> float:
    """``(1 + beta^2)^(1/p)``."""
    return 1.0 if math.isinf(p) else (1.0 + BETA ** 2) ** (1.0 / p)


@dataclass
class SweepTable:
    p: list
    vp: list
    sp: list
    tol: float = 1e-6
    results: list = field(default_factory=list, repr=False)

    @property
    def vp_scaled(self) -> list:
        return [c / vp_scale(p) for p, c in zip(self.p, self.vp)]

    @property
    def sp_monotone(self) -> bool:
        return nondecreasing(self.sp, self.tol)

    @property
    def vp_scaled_monotone(self) -> bool:
        return nondecreasing(self.vp_scaled, self.tol)

    @property
    def p1_coincide(self) -> bool | None:
        if 1.0 not in self.p:
            return None
        i = self.p.index(1.0)
        return abs(self.vp[i] - self.sp[i]) <= 1e-10 * abs(self.sp[i])

    def rows(self):
        return list(zip(self.p, self.vp, self.sp, self.vp_scaled))


def nondecreasing(values: Sequence[float], tol: float = 1e-6) -> bool:
    return all(a <= b * (1.0 + tol) for a, b in itertools.pairwise(values))


def check_p_list(p_list: Sequence[float]) -> list[float]:
    ps = [float(p) for p in p_list]
    if len(ps) < 2:
        raise ValueError("sweep needs >= 2 exponents")
    if len(set(ps)) != len(ps):
        raise ValueError("duplicate exponents in sweep")
    if any(b <= a for a, b in itertools.pairwise(ps)):
        raise ValueError("sweep exponents must be increasing")
    return ps


def monotonicity_sweep(model, p_list: Sequence[float], E0: float, tol: float = 1e-6,
                       **solve_kw) -> SweepTable:
    """Solve both methods for every ``p`` and collect the compliance table."""
    ps = check_p_list(p_list)
    table = SweepTable(ps, [], [], tol)
    for p in ps:
        for method in ("vp", "sp"):
            res = model.solve(method, p, E0, **solve_kw)
            getattr(table, method).append(res.compliance)
            table.results.append(res)
    return table
