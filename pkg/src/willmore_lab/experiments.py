"""Batch experiments. Each runner maps a validated config to output files and threshold checks."""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import canonical, moebius, spectral, stability, svg
from .errors import WillmoreLabError
from .torus import (
    Mode,
    PerturbationSpec,
    ambient_second_form_energy,
    area,
    compute_geometry,
    intrinsic_gauss_curvature,
    mean_curvature_vector,
    perturbed_clifford,
    total_gauss_curvature,
    tracefree_energy,
    willmore_energy,
)

CLIFFORD_W = 2.0 * np.pi**2
FOUR_PI = 4.0 * np.pi


def num(x):
    """Shortest round-trip decimal for a float; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return repr(x + 0.0) if np.isfinite(x) else str(x)


def vec(v):
    return " ".join(num(c) for c in v)


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([c if isinstance(c, str) else num(c) for c in r])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x + 0.0 if np.isfinite(x) else None
    return obj


def to_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    relation: str  # "<=", ">=", "in", "true"
    passed: bool

    def describe(self):
        tag = "PASS" if self.passed else "FAIL"
        if self.relation == "true":
            return f"[{tag}] {self.name}" + ("" if self.value is None else f": {self.value}")
        return f"[{tag}] {self.name}: {self.value} ({self.relation} {self.threshold})"

    def to_dict(self):
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "relation": self.relation, "pass": self.passed}


def check_le(name, value, threshold):
    return Check(name, value, threshold, "<=", bool(value <= threshold))


def check_ge(name, value, threshold):
    return Check(name, value, threshold, ">=", bool(value >= threshold))


def check_in(name, value, lo, hi):
    return Check(name, value, [lo, hi], "in", bool(lo <= value <= hi))


def check_true(name, ok, value=None):
    return Check(name, value, None, "true", bool(ok))


@dataclass
class ExperimentResult:
    experiment: str
    files: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c.to_dict() for c in self.checks if not c.passed]

    def checks_json(self):
        return to_json({"experiment": self.experiment, "pass": self.passed,
                        "checks": [c.to_dict() for c in self.checks]})


def build_surfaces(cfg):
    return [(s, s.build(cfg.grid)) for s in cfg.surfaces]


# --- invariance --------------------------------------------------------------------


def invariance_centers(cfg):
    p = cfg.params
    if "centers" in p:
        return [np.asarray(v, float) for v in p["centers"]]
    dirs = canonical.halton_directions(p["directionCount"])
    return [np.zeros(4)] + [r * d for r in p["radii"] for d in dirs]


def run_invariance(cfg):
    tol = cfg.params["tolerance"]
    rows, worst_w, worst_q = [], 0.0, 0.0
    for spec, f in build_surfaces(cfg):
        g0 = compute_geometry(f)
        W0, Q0 = willmore_energy(g0), tracefree_energy(g0)
        for v in invariance_centers(cfg):
            g = compute_geometry(moebius.adapted_transform(v, f))
            W, Q = willmore_energy(g), tracefree_energy(g)
            dw, dq = abs(W - W0) / W0, abs(Q - Q0) / max(Q0, 1e-300)
            worst_w, worst_q = max(worst_w, dw), max(worst_q, dq)
            rows.append([spec.name, vec(v), W, Q, dw, dq])
    table = to_csv(["surface", "v", "W", "tracefreeEnergy", "drift", "tracefreeDrift"], rows)
    checks = [check_le("max relative W drift", worst_w, tol),
              check_le("max relative tracefree-energy drift", worst_q, tol)]
    zero_rows = [r for r in rows if not any(float(x) for x in r[1].split())]
    checks.append(check_true("v = 0 rows have zero drift", all(r[4] == 0 and r[5] == 0 for r in zero_rows)))
    plot = svg.line_plot(
        [(s.name, [float(np.linalg.norm([float(x) for x in r[1].split()])) for r in rows if r[0] == s.name],
          [max(r[4], 1e-17) for r in rows if r[0] == s.name]) for s in cfg.surfaces],
        title="Relative Willmore drift under F_v", xlabel="|v|", ylabel="drift", logy=True)
    return ExperimentResult("invariance", {"invariance.csv": table, "invariance.svg": plot}, checks)


# --- canonical sweep ---------------------------------------------------------------


def sweep_directions(cfg):
    d = cfg.params["directions"]
    if isinstance(d, list):
        return np.asarray(d, float)
    if d == "random":
        return canonical.random_directions(cfg.params["directionCount"], cfg.seed)
    return canonical.halton_directions(cfg.params["directionCount"])


def run_canonical_sweep(cfg):
    p = cfg.params
    files, checks = {}, []
    multi = len(cfg.surfaces) > 1
    for spec, f in build_surfaces(cfg):
        W = willmore_energy(compute_geometry(f))
        table = canonical.sweep(f, p["radii"], sweep_directions(cfg),
                                canonical.default_t_grid(p["tSteps"]), willmore=W)
        tag = f"_{spec.name}" if multi else ""
        files[f"sweep{tag}.csv"] = table.to_csv()
        files[f"sweep{tag}.json"] = table.to_json()
        j = p["sectionDirIndex"]
        sec = [[r, j, t, table.area[i, j, k]] for i, r in enumerate(table.radii)
               for k, t in enumerate(table.t_grid)]
        files[f"sections{tag}.csv"] = to_csv(["radius", "dirIndex", "t", "area"], sec)
        files[f"heatmap{tag}.svg"] = svg.heatmap(
            np.nanmax(table.area, axis=1), table.t_grid, table.radii,
            title=f"max over directions of AreaHK ({spec.name})", xlabel="t", ylabel="radius index")
        files[f"sections{tag}.svg"] = svg.line_plot(
            [(f"|v|={num(r)}", table.t_grid, table.area[i, j]) for i, r in enumerate(table.radii)],
            title=f"AreaHK(v, t), direction {j}", xlabel="t", ylabel="area")
        top = float(np.nanmax(table.area))
        checks.append(check_le(f"{spec.name}: max cell - W (Heintze-Karcher)", top - W, 1e-6))
        checks.append(check_true(f"{spec.name}: no masked cells", not table.failures, len(table.failures)))
        i, jj, k = table.argmax()
        if spec.is_clifford():
            checks.append(check_true(f"{spec.name}: argmax at (v, t) = (0, 0)",
                                     table.radii[i] == 0 and table.t_grid[k] == 0))
            checks.append(check_le(f"{spec.name}: |max - 2 pi^2|", abs(table.max_value() - CLIFFORD_W), 1e-8))
        else:
            checks.append(check_ge(f"{spec.name}: max - (2 pi^2 - 1e-6)", table.max_value() - CLIFFORD_W + 1e-6, 0.0))
    return ExperimentResult("canonical-sweep", files, checks)


# --- conformal boundary ------------------------------------------------------------


def run_boundary(cfg):
    p = cfg.params
    rows, records, checks = [], [], []
    for spec, f in build_surfaces(cfg):
        for pole in p["poles"]:
            pole = np.asarray(pole, float) / np.linalg.norm(pole)
            on = moebius.pole_distance(f, pole)[0] <= 1e-8
            series = []
            for r in p["radii"]:
                try:
                    row = canonical.conformal_boundary_row(r * pole, f)
                except WillmoreLabError as exc:
                    rows.append([r, on, None, None, None])
                    records.append({"surface": spec.name, "pole": pole, "radius": r,
                                    "error": type(exc).__name__, "message": str(exc)})
                    continue
                rows.append([r, on, row["area"], row["sphereFitResidual"], row["hausdorff"]])
                records.append({"surface": spec.name, "pole": pole, "radius": r, "w": row["w"], "c": row["c"]})
                series.append((r, row))
            checks += _boundary_checks(spec, pole, on, series, p)
    table = to_csv(["|v|", "poleOnSurface", "area", "sphereFitResidual", "hausdorff"], rows)
    plot = svg.line_plot(
        [(f"pole {k} ({'on' if r[1] else 'off'})", [float(x[0]) for x in grp], [x[2] for x in grp])
         for k, (r, grp) in enumerate(_groups(rows, len(p["radii"])))],
        title="Area of F_v(Sigma) toward the conformal boundary", xlabel="|v|", ylabel="area")
    return ExperimentResult("boundary", {"boundary.csv": table, "boundary.json": to_json(records),
                                         "boundary.svg": plot}, checks)


def _groups(rows, size):
    for k in range(0, len(rows), size):
        grp = [r for r in rows[k:k + size] if r[2] is not None]
        yield rows[k], grp


def _boundary_checks(spec, pole, on, series, p):
    tag = f"{spec.name} pole {vec(pole)}"
    out = []
    by_r = dict(series)
    if 0.0 in by_r and spec.is_clifford():
        out.append(check_le(f"{tag}: |area(v = 0) - 2 pi^2|", abs(by_r[0.0]["area"] - CLIFFORD_W), 1e-8))
    far = [row for r, row in series if r >= 0.9]
    areas = [row["area"] for row in far]
    hd = [row["hausdorff"] for row in far]
    if on:
        diffs = np.diff(areas)
        out.append(check_true(f"{tag}: area monotone over |v| >= 0.9",
                              bool(np.all(diffs < 0) or np.all(diffs > 0)), areas))
        out.append(check_true(f"{tag}: Hausdorff to fitted sphere decreasing",
                              bool(np.all(np.diff(hd) < 0)), hd))
        if 0.99 in by_r:
            a = by_r[0.99]["area"]
            out.append(check_le(f"{tag}: |area(0.99) / 4 pi - 1|", abs(a / FOUR_PI - 1.0), p["greatSphereBand"]))
    elif 0.99 in by_r:
        out.append(check_le(f"{tag}: area at |v| = 0.99 (collapse)", by_r[0.99]["area"], p["collapseArea"]))
    return out


# --- stability scaling -------------------------------------------------------------


STABILITY_FIELDS = ("epsilon", "delta", "distW22", "hL2", "uInf", "moduliGap", "areaGap")
SLOPE_FIELDS = ("distW22", "hL2", "uInf", "moduliGap")


def stability_family(cfg):
    p = cfg.params
    base = Mode(**p["mode"])
    out = []
    for eps in p["epsilons"]:
        spec = PerturbationSpec((Mode(base.component, base.m, base.n, base.amplitude * eps,
                                      base.phase, base.axis),)) if eps else PerturbationSpec()
        if p["gauge"] == "conformal":
            spec = spec.with_conformal_gauge()
        out.append((eps, perturbed_clifford(cfg.grid, spec)))
    return out


def run_stability_scaling(cfg):
    p = cfg.params
    reports = [(eps, stability.stability_report(f)) for eps, f in stability_family(cfg)]
    rows = [[eps] + [getattr(r, k) for k in STABILITY_FIELDS[1:]] for eps, r in reports]
    fit = [(eps, r) for eps, r in reports if eps > 0]
    deltas = [r.delta for _, r in fit]
    slopes = {k: stability.loglog_slope(deltas, [getattr(r, k) for _, r in fit]) for k in SLOPE_FIELDS}
    slopes["areaGap"] = stability.loglog_slope(deltas, [r.areaGap for _, r in fit])
    ratios = [r.ratioW22toHL2 for _, r in fit]
    spread = max(ratios) / min(ratios) - 1.0 if ratios else float("nan")
    lo, hi = p["slopeBand"]
    checks = [check_in(f"slope of {k} against delta", slopes[k], lo, hi) for k in SLOPE_FIELDS]
    checks.append(check_le("relative spread of distW22 / hL2", spread, p["ratioSpread"]))
    for eps, r in reports:
        if eps == 0:
            checks.append(check_le("epsilon = 0 row: largest field", max(getattr(r, k) for k in STABILITY_FIELDS[1:]), 1e-8))
    summary = {
        "slopes": slopes,
        "constants": {
            "distW22/hL2": ratios,
            "distW22/delta": [r.ratioW22toDelta for _, r in fit],
            "hL2/delta": [r.hL2 / r.delta for _, r in fit],
        },
        "ratioSpread": spread,
        "gauge": p["gauge"],
        "reports": [dict(epsilon=eps, **r.to_dict()) for eps, r in reports],
    }
    plot = svg.line_plot([(k, deltas, [getattr(r, k) for _, r in fit]) for k in SLOPE_FIELDS],
                         title="Stability scaling", xlabel="delta", ylabel="value", logx=True, logy=True)
    files = {"stability.csv": to_csv(list(STABILITY_FIELDS), rows),
             "stability.json": to_json(summary), "stability.svg": plot}
    return ExperimentResult("stability-scaling", files, checks)


# --- identities --------------------------------------------------------------------


def monotonicity_lhs(f, geom, v):
    """Integral of |(x - v)^perp / |x - v|^2|^2, perp = normal space of f in R^4."""
    d = f.points - v
    d2 = np.einsum("...i,...i", d, d)
    c_x = np.einsum("...i,...i", d, f.points)
    c_n = np.einsum("...i,...i", d, geom.N)
    return spectral.integrate(f.grid, (c_x**2 + c_n**2) / d2**2 * geom.dA)


def monotonicity_identity_gap(f, geom, v):
    """(1/16) int |H_vec|^2 - int |H_vec / 4 + (x - v)^perp / |x - v|^2|^2."""
    Hv = mean_curvature_vector(f, geom)
    d = f.points - v
    d2 = np.einsum("...i,...i", d, d)
    perp = (np.einsum("...i,...i", d, f.points)[..., None] * f.points
            + np.einsum("...i,...i", d, geom.N)[..., None] * geom.N)
    q = Hv / 4 + perp / d2[..., None]
    lhs = spectral.integrate(f.grid, np.einsum("...i,...i", Hv, Hv) / 16 * geom.dA)
    return lhs - spectral.integrate(f.grid, np.einsum("...i,...i", q, q) * geom.dA)


def run_identities(cfg):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    centers = p["monotonicityRadius"] * canonical.random_directions(p["monotonicitySamples"], rng.integers(2**31))
    rows, checks = [], []

    def add(surface, identity, residual, threshold):
        ok = bool(residual <= threshold)
        rows.append([surface, identity, residual, threshold, ok])
        checks.append(Check(f"{surface}: {identity}", residual, threshold, "<=", ok))

    for spec, f in build_surfaces(cfg):
        geom = compute_geometry(f)
        W, A = willmore_energy(geom), area(geom)
        add(spec.name, "ambient-second-form = 4W (relative)", abs(ambient_second_form_energy(geom) / (4 * W) - 1), 1e-6)
        add(spec.name, "gauss-bonnet |int K| / area", abs(total_gauss_curvature(geom)) / A, 1e-8)
        add(spec.name, "gauss-equation sup|K - K_intrinsic|",
            spectral.sup_norm(geom.K - intrinsic_gauss_curvature(f)), 1e-6)
        add(spec.name, "willmore lower bound 2pi^2 - W", CLIFFORD_W - W, 1e-6)
        worst = max(monotonicity_lhs(f, geom, v) - W for v in centers)
        add(spec.name, "monotonicity bound max(lhs - W)", worst, 1e-6)
        gap = max(abs(monotonicity_identity_gap(f, geom, v)) for v in centers)
        add(spec.name, "monotonicity identity (absolute)", gap, 1e-8 * W)
    table = to_csv(["surface", "identity", "residual", "threshold", "pass"], rows)
    return ExperimentResult("identities", {"identities.csv": table,
                                           "identities.json": to_json({"centers": centers})}, checks)


RUNNERS = {
    "invariance": run_invariance,
    "canonical-sweep": run_canonical_sweep,
    "boundary": run_boundary,
    "stability-scaling": run_stability_scaling,
    "identities": run_identities,
}


def run(cfg):
    return RUNNERS[cfg.experiment](cfg)
