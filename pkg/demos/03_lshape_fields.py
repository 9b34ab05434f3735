"""Where the material goes in the L-shaped plate.

At p = 1 the optimal stiffness crowds around the reentrant corner and the
Poisson ratio takes both extreme values; at large p the same loads spread
the material over most of the plate.  A scatter plot is saved when
matplotlib is available.
"""
import numpy as np

from lpimd.config import load_benchmark
from lpimd.model import Model


def half_mass_area(model, stiffness):
    """Fraction of the plate holding half of the integrated stiffness."""
    w = model.quad.wdet
    order = np.argsort(-stiffness)
    mass = np.cumsum((w * stiffness)[order])
    k = int(np.searchsorted(mass, 0.5 * mass[-1]))
    return w[order][:k + 1].sum() / w.sum()


def main():
    cfg = load_benchmark("lshape")
    model = Model(cfg.build_mesh(), **cfg.model_kwargs())
    results = {p: model.solve("vp", p, cfg.E0) for p in (1.0, 100.0)}
    for p, res in results.items():
        m = res.moduli
        peak = model.quad.xy[np.argmax(m.k + m.mu)]
        print(f"p={p:g}: C = {res.compliance:.6g} N*m, stiffest point {np.round(peak, 2)}, "
              f"nu in [{m.nu.min():.2f}, {m.nu.max():.2f}], "
              f"half the stiffness in {half_mass_area(model, m.k + m.mu):.0%} of the area")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), constrained_layout=True)
    xy = model.quad.xy
    for ax, (p, res) in zip(axes, results.items()):
        sc = ax.scatter(xy[:, 0], xy[:, 1], c=res.moduli.nu, s=2, cmap="coolwarm", vmin=-1, vmax=1)
        ax.set_title(f"Poisson ratio, vp p={p:g}")
        ax.set_aspect("equal")
    fig.colorbar(sc, ax=axes, shrink=0.8)
    fig.savefig("lshape_nu.png", dpi=120)
    print("saved lshape_nu.png")


if __name__ == "__main__":
    main()
