"""Calibrate the two regression constants of willmore_lab.stability.

WEAK_Z_CONSTANT bounds |weak residual of z against k| / (||k||_{W^{1,2}} (hL2 + distW22^2))
and MODULI_AREA_CONSTANT bounds (moduliGap + areaGap) / (hL1 + distW12^2) over a
corpus of 50 perturbed Clifford tori on a 64x64 grid. The frozen values sit
above the observed maxima with a margin.
"""
import numpy as np

from willmore_lab import stability
from willmore_lab.spectral import TorusGrid
from willmore_lab.torus import Mode, PerturbationSpec, perturbed_clifford

TEST_MODES = [(0, 1), (1, 0), (2, 0), (1, 1), (1, -1), (2, 1), (3, 0)]
EPSILONS = [0.002, 0.005, 0.01, 0.02, 0.04]


def shapes(eps):
    return [
        (Mode("normal", 2, 0, eps),),
        (Mode("normal", 1, 2, eps, 0.3),),
        (Mode("normal", 0, 0, eps),),
        (Mode("normal", 3, 1, eps, 1.0), Mode("tangent-phi", 1, 0, eps)),
        (Mode("ambient", 2, 1, eps, 0.2, 2),),
    ]


def corpus(grid):
    for eps in EPSILONS:
        for modes in shapes(eps):
            for gauge in (False, True):
                spec = PerturbationSpec(modes)
                yield perturbed_clifford(grid, spec.with_conformal_gauge() if gauge else spec)


def main():
    grid = TorusGrid(64, 64)
    weak, moduli = [], []
    for f in corpus(grid):
        rep = stability.stability_report(f)
        _, fn = stability.rotation_normalize(f)
        dec = stability.decompose_deviation(fn)
        cs = stability.extract_conformal_structure(fn)
        scale = rep.hL2 + rep.distW22**2
        for (m, n), val in zip(TEST_MODES, stability.weak_z_residual(dec, cs, TEST_MODES)):
            weak.append(abs(val) / (stability.test_function_norm(grid, m, n) * scale))
        moduli.append((rep.moduliGap + rep.areaGap) / (rep.hL1 + rep.distW12**2))
    print(f"surfaces: {len(moduli)}")
    print(f"weak-z ratio:       max {max(weak):.4f}  median {np.median(weak):.4f}  "
          f"frozen {stability.WEAK_Z_CONSTANT}")
    print(f"moduli+area ratio:  max {max(moduli):.4f}  median {np.median(moduli):.4f}  "
          f"frozen {stability.MODULI_AREA_CONSTANT}")


if __name__ == "__main__":
    main()
