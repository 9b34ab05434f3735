"""From the optimal stress to the minimal compliance and the optimal moduli.

With ``Z`` the minimal value of the stress functional (``Z_r`` for vp,
``Y_r`` for sp) and ``Lambda = |Omega|^(1/p) E0``:

* compliance ``C = (r Z)^(2/r) / Lambda``
* vp: ``d k = c |Tr t|^(2/(p+1))``, ``2 mu = c (|dev t|/beta)^(2/(p+1))``
* sp: ``d k = c |Tr t| / S^((p-1)/(p+1))``, ``2 mu = c (|dev t|/beta) / S^((p-1)/(p+1))``

where ``c = Lambda (r Z)^(-1/p)`` and ``S = |Tr t| + beta |dev t|``.
Both fields saturate the cost bound.  Moduli live at quadrature points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objective import BETA, DIM, ExponentParams, check_method, components_tr_dev


class ZeroLoadError(ValueError):
    """The stress functional vanishes, so the moduli are undefined."""


def lambda_p(area: float, p: float, E0: float) -> float:
    """Cost bound ``|Omega|^(1/p) E0``."""
    if area <= 0 or E0 <= 0:
        raise ValueError("area and E0 must be positive")
    if p < 1:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    if math.isinf(p):
        return float(E0)
    return float(area ** (1.0 / p) * E0)


def compliance_from_energy(energy: float, r: float, Lambda: float) -> float:
    if energy < 0 or Lambda <= 0:
        raise ValueError("energy must be non-negative and Lambda positive")
    return (r * energy) ** (2.0 / r) / Lambda


@dataclass(frozen=True)
class DesignProblem:
    method: str
    params: ExponentParams
    E0: float
    area: float

    def __post_init__(self):
        check_method(self.method)
        if self.E0 <= 0 or self.area <= 0:
            raise ValueError("E0 and area must be positive")

    @classmethod
    def create(cls, method: str, p: float, E0: float, area: float) -> "DesignProblem":
        return cls(method, ExponentParams(float(p)), float(E0), float(area))

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def r(self) -> float:
        return self.params.r

    @property
    def Lambda(self) -> float:
        return lambda_p(self.area, self.p, self.E0)

    def compliance(self, energy: float) -> float:
        return compliance_from_energy(energy, self.r, self.Lambda)


@dataclass(frozen=True, eq=False)
class ModuliField:
    """Optimal moduli sampled at quadrature points."""
    k: np.ndarray
    mu: np.ndarray
    E: np.ndarray
    nu: np.ndarray
    void: np.ndarray

    def __len__(self):
        return len(self.k)


def young_poisson(k, mu):
    """``E = 2 (1/(2k) + 1/(2mu))^-1`` and ``nu = (k - mu)/(k + mu)``.

    Returns ``(E, nu, void)``; at ``k = mu = 0`` the Poisson ratio is
    reported as 0 and ``void`` is set.
    """
    k = np.asarray(k, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(k < 0) or np.any(mu < 0):
        raise ValueError("moduli must be non-negative")
    total = k + mu
    void = total == 0
    safe = np.where(void, 1.0, total)
    E = np.where(void, 0.0, 4.0 * k * mu / safe)
    nu = np.where(void, 0.0, (k - mu) / safe)
    if E.ndim == 0:
        return float(E), float(nu), bool(void)
    return E, nu, void


def _amplitude(energy: float, problem: DesignProblem) -> float:
    if not energy > 0:
        raise ZeroLoadError("zero-load problem; moduli undefined")
    if math.isinf(problem.p):
        return problem.Lambda
    return problem.Lambda * (problem.r * energy) ** (-1.0 / problem.p)


def _field(dk, two_mu) -> ModuliField:
    k, mu = dk / DIM, two_mu / 2.0
    E, nu, void = young_poisson(k, mu)
    return ModuliField(k, mu, np.atleast_1d(E), np.atleast_1d(nu), np.atleast_1d(void))


def recover_vp(tau: np.ndarray, energy: float, problem: DesignProblem) -> ModuliField:
    """Moduli of the vp design from stresses ``(s11, s22, s12)`` at the points."""
    c = _amplitude(energy, problem)
    tr, dev = components_tr_dev(np.atleast_2d(tau))
    if math.isinf(problem.p):
        # any stress is carried by the homogeneous body of the bound
        dk = np.full_like(tr, c)
        two_mu = np.full_like(tr, c)
    else:
        e = 2.0 / (problem.p + 1.0)
        dk = c * np.abs(tr) ** e
        two_mu = c * (dev / BETA) ** e
    return _field(dk, two_mu)


def recover_sp(tau: np.ndarray, energy: float, problem: DesignProblem) -> ModuliField:
    """Moduli of the sp design; zero stress maps to the void ``(0, 0)``."""
    c = _amplitude(energy, problem)
    tr, dev = components_tr_dev(np.atleast_2d(tau))
    a = np.abs(tr)
    S = a + BETA * dev
    q = 1.0 if math.isinf(problem.p) else (problem.p - 1.0) / (problem.p + 1.0)
    safe = np.where(S > 0, S, 1.0)
    scale = np.where(S > 0, c / safe ** q, 0.0)
    return _field(scale * a, scale * dev / BETA)


def recover(tau, energy, problem: DesignProblem) -> ModuliField:
    if problem.method == "vp":
        return recover_vp(tau, energy, problem)
    return recover_sp(tau, energy, problem)


def cost_ratio(moduli: ModuliField, wdet: np.ndarray, problem: DesignProblem) -> float:
    """Discrete cost integral divided by ``Lambda^p``; 1 when saturated.

    Evaluated on moduli scaled by ``Lambda`` to stay in floating range at
    large ``p``.  At ``p = inf`` the essential supremum replaces the mean.
    """
    L = problem.Lambda
    dk, two_mu = DIM * moduli.k / L, 2.0 * moduli.mu / L
    p = problem.p
    if problem.method == "vp":
        if math.isinf(p):
            return float(max(dk.max(), two_mu.max()))
        vals = dk ** p + BETA ** 2 * two_mu ** p
    else:
        s = dk + BETA ** 2 * two_mu
        if math.isinf(p):
            return float(s.max())
        vals = s ** p
    # Lambda^p = |Omega| E0^p, so the scaled integral must equal 1
    return float(np.dot(wdet, vals))


def stress_energy(tau: np.ndarray, moduli: ModuliField, wdet: np.ndarray) -> float:
    """``sum w [ Tr^2/(d k) + |dev|^2/(2 mu) ]`` over points with nonzero stress.

    A vanishing modulus under a vanishing stress part contributes nothing.
    """
    tr, dev = components_tr_dev(np.atleast_2d(tau))
    dk, two_mu = DIM * moduli.k, 2.0 * moduli.mu
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(tr != 0, tr ** 2 / dk, 0.0)
        t2 = np.where(dev != 0, dev ** 2 / two_mu, 0.0)
    return float(np.dot(wdet, t1 + t2))
