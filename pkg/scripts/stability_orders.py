"""Orders of the stability quantities against delta = sqrt(W - 2 pi^2).

Runs the (2,0) normal family with and without the conformal gauge and prints
the log-log slope of each field. Without the gauge the conformal factor u is
quadratic in delta; with it u is linear. The moduli gap is quadratic either
way, because its first variation is proportional to the mean of z.
"""
import numpy as np

from willmore_lab import stability
from willmore_lab.spectral import TorusGrid
from willmore_lab.torus import Mode, PerturbationSpec, perturbed_clifford

FIELDS = ("distW22", "hL2", "uInf", "moduliGap", "areaGap")


def family(grid, gauge, m=2, n=0, epsilons=(0.002, 0.005, 0.01, 0.015, 0.02)):
    for eps in epsilons:
        spec = PerturbationSpec((Mode("normal", m, n, eps),))
        yield eps, perturbed_clifford(grid, spec.with_conformal_gauge() if gauge == "conformal" else spec)


def main():
    grid = TorusGrid(128, 128)
    for m, n in ((2, 0), (2, 1)):
        for gauge in ("none", "conformal"):
            reps = [stability.stability_report(f) for _, f in family(grid, gauge, m, n)]
            deltas = [r.delta for r in reps]
            slopes = {k: stability.loglog_slope(deltas, [getattr(r, k) for r in reps]) for k in FIELDS}
            print(f"mode ({m},{n}) gauge {gauge:9s} " + "  ".join(f"{k} {v:.3f}" for k, v in slopes.items()))
    # the first-order change of the flat structure is a multiple of the mean of z
    eps = 1e-3
    f = perturbed_clifford(grid, PerturbationSpec((Mode("normal", 0, 0, eps),)))
    print(f"mode (0,0), eps {eps}: moduliGap / eps = {stability.stability_report(f).moduliGap / eps:.4f} "
          f"(first order when z has nonzero mean)")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
