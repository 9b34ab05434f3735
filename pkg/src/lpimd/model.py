"""End-to-end pipeline: mesh and loads in, optimal stress and moduli out."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import Mesh
from .nullspace import NullSpaceRep, decompose
from .objective import ExponentParams, Objective, check_method, default_smoothing
from .optimizer import OptimizerConfig, OptimizerReport, minimize
from .recovery import DesignProblem, ModuliField, recover
from .statics import EquilibriumSystem, assemble_equilibrium, build_quadrature

log = logging.getLogger(__name__)


@dataclass
class SolveResult:
    problem: DesignProblem
    alpha: np.ndarray
    T: np.ndarray
    tau: np.ndarray                  # (nq, 3) stresses at quadrature points
    energy: float
    compliance: float
    moduli: ModuliField | None
    report: OptimizerReport
    seconds: float = 0.0
    smoothing: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def method(self) -> str:
        return self.problem.method

    @property
    def p(self) -> float:
        return self.problem.p

    def summary(self) -> dict:
        pr = self.problem
        return {
            "method": pr.method,
            "p": "inf" if math.isinf(pr.p) else pr.p,
            "r": pr.r,
            "E0": pr.E0,
            "area": pr.area,
            "Lambda": pr.Lambda,
            "energy": self.energy,
            "compliance": self.compliance,
            "iterations": self.report.iterations,
            "evaluations": self.report.evaluations,
            "stop_reason": self.report.reason,
            "smoothing": self.smoothing,
        }


def smoothing_schedule(final: float, scale: float, continuation: bool) -> list[float]:
    """Decreasing smoothing levels ending at ``final``."""
    stages = []
    if continuation and final > 0:
        eps = 0.1 * scale
        while eps > 10.0 * final:
            stages.append(eps)
            eps /= 10.0
    return stages + [final]


class Model:
    """A meshed body with supports and loads; null space computed once.

    Every call to :meth:`solve` reuses the equilibrium system and its
    null-space representation, so sweeps over ``p`` and methods only pay
    for the optimisation.
    """

    def __init__(self, mesh: Mesh, supports: Sequence[str] | None = None,
                 tractions: Mapping[str, Sequence[float]] | None = None,
                 point_forces: Sequence = (), triangle_rule: str = "tri-3",
                 rank_tol: float = 1e-10):
        self.mesh = mesh
        self.quad = build_quadrature(mesh, triangle_rule)
        self.system: EquilibriumSystem = assemble_equilibrium(
            mesh, supports, tractions, point_forces, quad=self.quad)
        self._rank_tol = rank_tol
        self._rep: NullSpaceRep | None = None

    @property
    def rep(self) -> NullSpaceRep:
        if self._rep is None:
            t = time.perf_counter()
            self._rep = decompose(self.system, self._rank_tol)
            log.info("null space: %d unknowns, dimension %d (%.1f s)",
                     self._rep.num_unknowns, self._rep.dim, time.perf_counter() - t)
        return self._rep

    @property
    def area(self) -> float:
        return self.mesh.area

    def objective(self, method: str, p: float, eps: float = 0.0) -> Objective:
        return Objective(self.quad, self.rep, method, ExponentParams(float(p)), eps)

    def energy(self, method: str, p: float, alpha: np.ndarray) -> float:
        """Unsmoothed stress functional at ``alpha``."""
        return self.objective(method, p).value(alpha)

    def solve(self, method: str, p: float, E0: float,
              optimizer: OptimizerConfig | None = None, smoothing: float | None = None,
              alpha0: np.ndarray | None = None, continuation: bool | None = None) -> SolveResult:
        """Minimise the stress functional and recover the design.

        ``smoothing`` regularises ``|x|`` as ``sqrt(x^2 + eps^2)``.  It
        defaults to ``1e-8 (|T0|_inf + 1)`` where the functional is
        non-smooth (sp, or ``p = 1``) and to zero for vp with ``p > 1``.
        With ``continuation`` (default: on whenever smoothing is used) the
        problem is first solved with ``eps = 0.1 |T0|_inf`` and ``eps`` is
        divided by ten per stage, each stage warm-started from the last.
        """
        check_method(method)
        start = time.perf_counter()
        params = ExponentParams(float(p))
        problem = DesignProblem(method, params, float(E0), self.area)
        rep = self.rep
        if smoothing is None:
            nonsmooth = method == "sp" or params.r == 1.0
            smoothing = default_smoothing(rep.T0) if nonsmooth else 0.0
        if continuation is None:
            continuation = smoothing > 0
        cfg = optimizer or OptimizerConfig()
        alpha = np.zeros(rep.dim) if alpha0 is None else np.array(alpha0, dtype=float)
        if not np.any(rep.T0) and not np.any(alpha):
            return self._zero_load(problem, alpha, start)

        obj = Objective(self.quad, rep, method, params, smoothing)
        total_iters = total_evals = 0
        report = None
        for eps in smoothing_schedule(smoothing, float(np.max(np.abs(rep.T0))), continuation):
            obj.eps = eps
            alpha, report = minimize(obj.value, obj.gradient, alpha, cfg)
            total_iters += report.iterations
            total_evals += report.evaluations
            log.debug("eps=%.3e: %s", eps, report)
        report.iterations, report.evaluations = total_iters, total_evals

        tau = obj.stress_points(alpha).copy()
        energy = Objective(self.quad, rep, method, params, 0.0).value(alpha)
        compliance = problem.compliance(energy)
        moduli = recover(tau, energy, problem)
        return SolveResult(problem, alpha, rep.stress(alpha), tau, energy, compliance,
                           moduli, report, time.perf_counter() - start, smoothing)

    def _zero_load(self, problem, alpha, start) -> SolveResult:
        log.warning("all loads vanish: compliance is zero and the moduli are left at zero")
        nq = self.quad.num_points
        z = np.zeros(nq)
        moduli = ModuliField(z, z.copy(), z.copy(), z.copy(), np.ones(nq, dtype=bool))
        report = OptimizerReport(0, 0, 0.0, 0.0, "zero_load")
        return SolveResult(problem, alpha, self.rep.stress(alpha), np.zeros((nq, 3)), 0.0, 0.0,
                           moduli, report, time.perf_counter() - start, 0.0,
                           ["zero load: moduli undefined, reported as zero"])

    def nodal_average(self, values: np.ndarray) -> np.ndarray:
        """Volume-weighted average of quadrature-point values onto nodes."""
        mesh, quad = self.mesh, self.quad
        num = np.zeros(mesh.num_nodes)
        den = np.zeros(mesh.num_nodes)
        for kind in mesh.kinds():
            ids, conn = mesh.connectivity(kind)
            pos = np.full(mesh.num_elements, -1)
            pos[ids] = np.arange(len(ids))
            sel = np.flatnonzero(pos[quad.element] >= 0)
            nodes = conn[pos[quad.element[sel]]]
            w = np.repeat(quad.wdet[sel], nodes.shape[1])
            np.add.at(num, nodes.ravel(), w * np.repeat(values[sel], nodes.shape[1]))
            np.add.at(den, nodes.ravel(), w)
        return num / np.where(den > 0, den, 1.0)
