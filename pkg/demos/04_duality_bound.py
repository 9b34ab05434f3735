"""A displacement field gives a certified lower bound on the optimum.

The homogeneous unit body is solved once; scaling its displacement to the
best amplitude yields a dual value that no admissible stress can undercut.
Together with the primal value this brackets the minimum.
"""
from lpimd.config import load_benchmark
from lpimd.model import Model
from lpimd.objective import ExponentParams
from lpimd.verify import dual_candidate


def main():
    cfg = load_benchmark("cantilever")
    model = Model(cfg.build_mesh(), **cfg.model_kwargs())
    print(f"{'method':>6} {'p':>4} {'dual bound':>12} {'primal':>12} {'ratio':>7}")
    for method in ("vp", "sp"):
        for p in (1.0, 2.0, 3.0):
            _, lower = dual_candidate(model.system, method, ExponentParams(p))
            upper = model.solve(method, p, cfg.E0).energy
            print(f"{method:>6} {p:>4g} {lower:>12.6g} {upper:>12.6g} {lower / upper:>7.3f}")


if __name__ == "__main__":
    main()
