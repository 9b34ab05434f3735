"""Nonlinear conjugate gradients with a backtracking Armijo line search."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

TINY = 1e-300


class OptimizerError(RuntimeError):
    """Non-finite objective or gradient, or a failed line search."""


@dataclass
class OptimizerConfig:
    ftol: float = 1e-7
    gtol: float = 1e-8                  # relative to max(1, |g0|)
    max_iters: int = 20000
    restart: int | None = None          # defaults to the problem dimension
    variant: str = "pr+"                # "pr+" or "fr"
    c1: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    refine: bool = True                 # one quadratic-interpolation trial per step
    patience: int = 1                   # consecutive ftol hits needed to stop

    def __post_init__(self):
        if self.variant not in ("pr+", "fr"):
            raise ValueError(f"unknown conjugate-gradient variant {self.variant!r}")
        if not (self.ftol > 0 and self.gtol > 0) or self.max_iters < 1:
            raise ValueError("ftol and gtol must be positive and max_iters >= 1")
        if not (0 < self.shrink < 1) or not (0 < self.c1 < 1):
            raise ValueError("line-search constants must lie in (0, 1)")


@dataclass
class OptimizerReport:
    iterations: int
    evaluations: int
    value: float
    grad_norm: float
    reason: str
    history: list = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.reason in ("ftol", "gtol")


def _finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def minimize(fun: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray],
             x0: np.ndarray, config: OptimizerConfig | None = None,
             callback: Callable[[int, np.ndarray, float], None] | None = None):
    """Minimise ``fun`` from ``x0``; returns ``(x, OptimizerReport)``.

    Stops when two successive values satisfy
    ``2|f_{k+1} - f_k| <= ftol (|f_{k+1}| + |f_k| + tiny)``, when
    ``|g| <= gtol max(1, |g0|)``, or after ``max_iters`` iterations.
    """
    cfg = config or OptimizerConfig()
    x = np.array(x0, dtype=float)
    n = x.size
    restart = cfg.restart or max(n, 1)
    nfev = 1
    f = fun(x)
    g = grad(x)
    if not (math.isfinite(f) and _finite(g)):
        raise OptimizerError("objective or gradient is not finite at the starting point")
    history = [f]
    gstop = cfg.gtol * max(1.0, float(np.linalg.norm(g)))
    if n == 0 or np.linalg.norm(g) <= gstop:
        return x, OptimizerReport(0, nfev, f, float(np.linalg.norm(g)), "gtol", history)

    d = -g
    gg = float(g @ g)
    step = 1.0 / max(np.linalg.norm(g), TINY)
    hits = 0
    since_restart = 0
    reason = "max_iters"
    it = 0
    for it in range(1, cfg.max_iters + 1):
        slope = float(g @ d)
        if slope >= 0:                   # not a descent direction: restart
            d, slope, since_restart = -g, -gg, 0
        t = step
        accepted = False
        for _ in range(cfg.max_backtracks):
            x_new = x + t * d
            f_new = fun(x_new)
            nfev += 1
            if not math.isfinite(f_new):
                raise OptimizerError(f"objective became {f_new} during the line search")
            if f_new < f and f_new <= f + cfg.c1 * t * slope:
                accepted = True
                break
            t *= cfg.shrink
        if not accepted:
            if since_restart > 0:
                d, since_restart = -g, 0
                hits = 0
                continue
            reason = "line_search"
            break
        if cfg.refine:
            curv = f_new - f - slope * t
            if curv > 0:
                tq = -slope * t * t / (2.0 * curv)
                if 0 < tq < 1e3 * t and abs(tq - t) > 1e-3 * t:
                    xq = x + tq * d
                    fq = fun(xq)
                    nfev += 1
                    if math.isfinite(fq) and fq < f_new and fq <= f + cfg.c1 * tq * slope:
                        x_new, f_new, t = xq, fq, tq
        g_new = grad(x_new)
        if not _finite(g_new):
            raise OptimizerError("gradient became non-finite")
        history.append(f_new)
        if callback is not None:
            callback(it, x_new, f_new)

        small = 2.0 * abs(f_new - f) <= cfg.ftol * (abs(f_new) + abs(f) + TINY)
        hits = hits + 1 if small else 0
        gg_new = float(g_new @ g_new)
        x, f = x_new, f_new
        if hits >= cfg.patience:
            g = g_new
            reason = "ftol"
            break
        if math.sqrt(gg_new) <= gstop:
            g = g_new
            reason = "gtol"
            break

        since_restart += 1
        if since_restart >= restart:
            beta, since_restart = 0.0, 0
        elif cfg.variant == "fr":
            beta = gg_new / max(gg, TINY)
        else:
            beta = max(0.0, float(g_new @ (g_new - g)) / max(gg, TINY))
        d_new = -g_new + beta * d
        # scale the next trial step so the predicted decrease matches the last one
        new_slope = float(g_new @ d_new)
        step = t * slope / new_slope if new_slope < 0 else t
        g, gg, d = g_new, gg_new, d_new
    return x, OptimizerReport(it, nfev, f, float(np.linalg.norm(g)), reason, history)
