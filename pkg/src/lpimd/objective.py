"""Local stress norms and the discrete stress-based objective.

Two isotropic cost variants are supported:

``vp`` (variant-p)
    ``|||t||| = (|Tr t|^r + beta^(2-r) |dev t|^r)^(1/r)``
``sp`` (sum-p)
    ``|||t||| = |Tr t| + beta |dev t|``

with ``d = 2``, ``beta = sqrt(2)``, ``Tr t = tr t / sqrt(2)``,
``r = 2p/(p+1)``.  The objective over the null-space coordinates is

``Phi(alpha) = sum_q w_q |det J_q| |||tau_q|||^r / r``,  ``T = T0 + N alpha``.

Stress components are stored as ``(s11, s22, s12)`` rows.  At ``r = 1`` the
two norms coincide and share one code path so results agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nullspace import NullSpaceRep
from .statics import QuadratureOperators

DIM = 2
BETA = math.sqrt(2.0)
METHODS = ("vp", "sp")


@dataclass(frozen=True)
class ExponentParams:
    """Exponents derived from the cost exponent ``p`` in ``[1, inf]``."""
    p: float

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")

    @property
    def r(self) -> float:
        if math.isinf(self.p):
            return 2.0
        return 2.0 * self.p / (self.p + 1.0)

    @property
    def r_conj(self) -> float:
        """Dual exponent ``r' = 2p/(p-1)``; infinite at ``p = 1``."""
        if self.p == 1.0:
            return math.inf
        if math.isinf(self.p):
            return 2.0
        return 2.0 * self.p / (self.p - 1.0)

    @property
    def beta(self) -> float:
        return BETA


def check_method(method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return method


def tr_dev_split(sigma) -> tuple[float, np.ndarray]:
    """Normalised trace and deviator of a 2x2 tensor, ``sigma = Tr I/sqrt(2) + dev``."""
    s = np.asarray(sigma, dtype=float)
    tr = np.trace(s)
    return tr / BETA, s - 0.5 * tr * np.eye(DIM)


def components_tr_dev(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(Tr, |dev|)`` for rows of ``(s11, s22, s12)``."""
    c = np.asarray(c, dtype=float)
    tr = (c[..., 0] + c[..., 1]) / BETA
    dev = np.sqrt(0.5 * (c[..., 0] - c[..., 1]) ** 2 + 2.0 * c[..., 2] ** 2)
    return tr, dev


def _norm_parts(a, b, method, r):
    """Local norm from ``a = |Tr|``, ``b = |dev|``."""
    if method == "sp" or r == 1.0:
        return a + BETA * b
    return (a ** r + BETA ** (2.0 - r) * b ** r) ** (1.0 / r)


def local_norm(sigma, method: str, params: ExponentParams) -> float:
    """Cost norm of one 2x2 stress tensor."""
    check_method(method)
    tr, dev = tr_dev_split(sigma)
    return float(_norm_parts(abs(tr), np.linalg.norm(dev), method, params.r))


def dual_local_norm(eps, method: str, params: ExponentParams) -> float:
    """Dual of :func:`local_norm` with respect to ``s . e``."""
    check_method(method)
    tr, dev = tr_dev_split(eps)
    a, b = abs(tr), float(np.linalg.norm(dev))
    rc = params.r_conj
    if method == "sp" or math.isinf(rc):
        return max(a, b / BETA)
    return (a ** rc + BETA ** (2.0 - rc) * b ** rc) ** (1.0 / rc)


def density(c: np.ndarray, method: str, params: ExponentParams, eps: float = 0.0) -> np.ndarray:
    """Integrand ``|||tau|||^r / r`` at rows of stress components.

    ``eps > 0`` replaces ``|x|`` by ``sqrt(x^2 + eps^2)`` in both parts.
    """
    r = params.r
    tr, dev = components_tr_dev(c)
    if eps > 0.0:
        a, b = np.sqrt(tr * tr + eps * eps), np.sqrt(dev * dev + eps * eps)
    else:
        a, b = np.abs(tr), dev
    if method == "sp" or r == 1.0:
        return (a + BETA * b) ** r / r
    return (a ** r + BETA ** (2.0 - r) * b ** r) / r


def density_gradient(c: np.ndarray, method: str, params: ExponentParams,
                     eps: float = 0.0) -> np.ndarray:
    """Derivative of :func:`density` w.r.t. ``(s11, s22, s12)``.

    Without smoothing, ``sign(x)|x|^(r-1)`` is used with ``sign(0) = 0``.
    """
    r = params.r
    c = np.asarray(c, dtype=float)
    tr, dev = components_tr_dev(c)
    # d|dev|/ds = (half_diff, -half_diff, 2 s12) / |dev|
    ddev = np.stack([0.5 * (c[:, 0] - c[:, 1]), -0.5 * (c[:, 0] - c[:, 1]), 2.0 * c[:, 2]], axis=1)
    if eps > 0.0:
        a = np.sqrt(tr * tr + eps * eps)
        b = np.sqrt(dev * dev + eps * eps)
        da = tr / a                        # d a / d Tr
        unit_dev = ddev / b[:, None]       # d b / d s
    else:
        a, b = np.abs(tr), dev
        da = np.sign(tr)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit_dev = np.where(b[:, None] > 0, ddev / b[:, None], 0.0)
    if method == "sp" or r == 1.0:
        S = a + BETA * b
        scale = S ** (r - 1.0) if r != 1.0 else np.ones_like(S)
        g_tr, g_dev = scale * da, scale * BETA
    else:
        g_tr = a ** (r - 1.0) * da
        g_dev = BETA ** (2.0 - r) * b ** (r - 1.0)
    out = g_dev[:, None] * unit_dev
    out[:, 0] += g_tr / BETA
    out[:, 1] += g_tr / BETA
    return out


def default_smoothing(T0: np.ndarray) -> float:
    return 1e-8 * (float(np.max(np.abs(T0))) + 1.0)


class Objective:
    """``Phi`` and its gradient over the null-space coordinates.

    Stress values at the quadrature points of the last evaluated ``alpha``
    are cached, so a gradient call following a value call at the same point
    costs one transposed product only.
    """

    def __init__(self, quad: QuadratureOperators, rep: NullSpaceRep, method: str,
                 params: ExponentParams, eps: float = 0.0):
        self.quad = quad
        self.rep = rep
        self.method = check_method(method)
        self.params = params
        self.eps = float(eps)
        self._tau0 = quad.G @ rep.T0
        self._alpha = None
        self._tau = None
        self.evaluations = 0

    def stress_points(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if self._alpha is None or not np.array_equal(alpha, self._alpha):
            self._tau = (self._tau0 + self.quad.G @ (self.rep.N @ alpha)).reshape(-1, 3)
            self._alpha = alpha.copy()
        return self._tau

    def value(self, alpha: np.ndarray, eps: float | None = None) -> float:
        e = self.eps if eps is None else eps
        self.evaluations += 1
        tau = self.stress_points(alpha)
        return float(np.dot(self.quad.wdet, density(tau, self.method, self.params, e)))

    def gradient(self, alpha: np.ndarray, eps: float | None = None) -> np.ndarray:
        e = self.eps if eps is None else eps
        tau = self.stress_points(alpha)
        g = density_gradient(tau, self.method, self.params, e) * self.quad.wdet[:, None]
        return self.rep.N.T @ (self.quad.G.T @ g.ravel())

    def __call__(self, alpha):
        return self.value(alpha), self.gradient(alpha)


def phi(alpha, quad: QuadratureOperators, rep: NullSpaceRep, method: str,
        params: ExponentParams, eps: float = 0.0) -> float:
    return Objective(quad, rep, method, params, eps).value(alpha)


def grad_phi(alpha, quad: QuadratureOperators, rep: NullSpaceRep, method: str,
             params: ExponentParams, eps: float = 0.0) -> np.ndarray:
    return Objective(quad, rep, method, params, eps).gradient(alpha)
