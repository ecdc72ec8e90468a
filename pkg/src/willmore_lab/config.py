"""Experiment configuration: JSON documents validated before any computation starts."""
import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .moebius import adapted_transform
from .spectral import TorusGrid
from .torus import Mode, PerturbationSpec, clifford_immersion, load_surface, perturb_immersion

MAX_CENTER_NORM = 0.995
EXPERIMENTS = ("invariance", "canonical-sweep", "boundary", "stability-scaling", "identities")
SUBCOMMANDS = {
    "invariance": "invariance",
    "sweep": "canonical-sweep",
    "boundary": "boundary",
    "stability": "stability-scaling",
    "identities": "identities",
}

_R = float(np.sqrt(0.5))

DEFAULT_PARAMS = {
    "invariance": {
        "radii": [0.3, 0.6, 0.9],
        "directionCount": 3,
        "tolerance": 1e-6,
    },
    "canonical-sweep": {
        "radii": [0.0, 0.3, 0.6, 0.9, 0.95, 0.99],
        "directions": "halton",
        "directionCount": 12,
        "tSteps": 64,
        "sectionDirIndex": 0,
    },
    "boundary": {
        "radii": [0.0, 0.9, 0.95, 0.99],
        "poles": [[_R, 0.0, _R, 0.0], [0.0, 0.0, 0.0, 1.0]],
        "greatSphereBand": 0.1,
        "collapseArea": 1.0,
    },
    "stability-scaling": {
        "mode": {"component": "normal", "m": 2, "n": 0, "amplitude": 1.0},
        "epsilons": [0.0, 0.002, 0.005, 0.01, 0.015, 0.02],
        "gauge": "conformal",
        "slopeBand": [0.85, 1.15],
        "ratioSpread": 0.2,
    },
    "identities": {
        "monotonicityRadius": 0.5,
        "monotonicitySamples": 10,
    },
}

DEFAULT_SURFACES = {
    "invariance": [
        {"name": "clifford"},
        {"name": "normal-2-0", "modes": [{"component": "normal", "m": 2, "n": 0, "amplitude": 0.05}]},
        {"name": "mixed", "modes": [
            {"component": "normal", "m": 1, "n": 2, "amplitude": 0.05, "phase": 0.3},
            {"component": "tangent-theta", "m": 0, "n": 1, "amplitude": 0.03}]},
        {"name": "ambient", "modes": [
            {"component": "ambient", "m": 2, "n": 1, "amplitude": 0.05, "phase": 0.2, "axis": 3},
            {"component": "normal", "m": 3, "n": -1, "amplitude": 0.02}]},
    ],
    "canonical-sweep": [{"name": "clifford"}],
    "boundary": [{"name": "clifford"}],
    "stability-scaling": [{"name": "clifford"}],
    "identities": [
        {"name": "clifford"},
        {"name": "product-torus", "modes": [{"component": "normal", "m": 0, "n": 0, "amplitude": 0.1}]},
        {"name": "normal-2-0", "modes": [{"component": "normal", "m": 2, "n": 0, "amplitude": 0.05}]},
        {"name": "mixed", "modes": [
            {"component": "normal", "m": 1, "n": 2, "amplitude": 0.05, "phase": 0.3},
            {"component": "tangent-theta", "m": 0, "n": 1, "amplitude": 0.03}]},
        {"name": "ambient", "modes": [
            {"component": "ambient", "m": 2, "n": 1, "amplitude": 0.05, "phase": 0.2, "axis": 3},
            {"component": "normal", "m": 3, "n": -1, "amplitude": 0.02}]},
        {"name": "pushed-mixed", "push": [0.2, -0.1, 0.3, 0.1], "modes": [
            {"component": "normal", "m": 1, "n": 1, "amplitude": 0.04},
            {"component": "tangent-phi", "m": 2, "n": 0, "amplitude": 0.02}]},
    ],
}

DEFAULT_GRIDS = {
    "invariance": "128x128",
    "canonical-sweep": "128x128",
    "boundary": "128x128",
    "stability-scaling": "128x128",
    "identities": "64x64",
}


@dataclass(frozen=True)
class SurfaceSpec:
    name: str
    perturbation: PerturbationSpec = PerturbationSpec()
    gauge: str = "none"
    push: tuple = None
    file: str = None

    def build(self, grid):
        if self.file:
            f = load_surface(self.file)
        else:
            spec = self.perturbation
            if self.gauge == "conformal":
                spec = spec.with_conformal_gauge()
            f = perturb_immersion(clifford_immersion(grid), spec)
        if self.push is not None:
            f = adapted_transform(self.push, f)
        return f

    def is_clifford(self):
        return not self.file and not self.perturbation.modes and (
            self.push is None or not any(self.push))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: TorusGrid
    surfaces: tuple
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = None

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "grid": str(self.grid),
            "seed": self.seed,
            "surfaces": [_surface_dict(s) for s in self.surfaces],
            "params": self.params,
        }


def _surface_dict(s):
    d = {"name": s.name}
    if s.perturbation.modes:
        d["modes"] = s.perturbation.to_dict()["modes"]
    if s.gauge != "none":
        d["gauge"] = s.gauge
    if s.push is not None:
        d["push"] = list(s.push)
    if s.file:
        d["file"] = s.file
    return d


def _check_center(v, fld):
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("expected a 4-vector of numbers", fld) from None
    if arr.shape != (4,) or not np.all(np.isfinite(arr)):
        raise ConfigError("expected a 4-vector of finite numbers", fld)
    if np.linalg.norm(arr) > MAX_CENTER_NORM:
        raise ConfigError(f"|v| = {np.linalg.norm(arr):.6g} exceeds {MAX_CENTER_NORM}", fld)
    return tuple(float(x) for x in arr)


def _check_radius(r, fld):
    if not isinstance(r, (int, float)) or not 0.0 <= r <= MAX_CENTER_NORM:
        raise ConfigError(f"radius must lie in [0, {MAX_CENTER_NORM}], got {r!r}", fld)
    return float(r)


def _parse_modes(raw, grid, fld):
    if not isinstance(raw, list):
        raise ConfigError("modes must be a list", fld)
    modes = []
    for k, m in enumerate(raw):
        mf = f"{fld}[{k}]"
        if not isinstance(m, dict):
            raise ConfigError("mode must be an object", mf)
        unknown = set(m) - {"component", "m", "n", "amplitude", "phase", "axis"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", mf)
        for key in ("m", "n"):
            if not isinstance(m.get(key), int):
                raise ConfigError("wave number must be an integer", f"{mf}.{key}")
        try:
            mode = Mode(**m)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), mf) from None
        if not grid.resolves(mode.m, mode.n):
            raise ConfigError(f"mode ({mode.m}, {mode.n}) is not resolvable on grid {grid}", mf)
        modes.append(mode)
    return PerturbationSpec(tuple(modes))


def _parse_surface(raw, grid, fld):
    if not isinstance(raw, dict) or "name" not in raw:
        raise ConfigError("surface must be an object with a name", fld)
    unknown = set(raw) - {"name", "modes", "gauge", "push", "file"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", fld)
    gauge = raw.get("gauge", "none")
    if gauge not in ("none", "conformal"):
        raise ConfigError("gauge must be 'none' or 'conformal'", f"{fld}.gauge")
    push = raw.get("push")
    if push is not None:
        push = _check_center(push, f"{fld}.push")
    spec = _parse_modes(raw.get("modes", []), grid, f"{fld}.modes")
    if gauge == "conformal":
        try:
            spec.with_conformal_gauge().check_resolvable(grid)
        except ValueError as exc:
            raise ConfigError(str(exc), f"{fld}.gauge") from None
    return SurfaceSpec(str(raw["name"]), spec, gauge, push, raw.get("file"))


def _validate_params(exp, params, grid):
    p = params
    if exp in ("invariance", "canonical-sweep", "boundary"):
        p["radii"] = [_check_radius(r, f"params.radii[{k}]") for k, r in enumerate(p["radii"])]
    if exp == "invariance" and "centers" in p:
        p["centers"] = [list(_check_center(v, f"params.centers[{k}]")) for k, v in enumerate(p["centers"])]
    if exp == "canonical-sweep":
        d = p["directions"]
        if isinstance(d, list):
            for k, v in enumerate(d):
                a = np.asarray(v, dtype=float)
                if a.shape != (4,) or np.linalg.norm(a) == 0:
                    raise ConfigError("direction must be a nonzero 4-vector", f"params.directions[{k}]")
        elif d not in ("halton", "random"):
            raise ConfigError("directions must be 'halton', 'random' or a list", "params.directions")
        if not isinstance(p["tSteps"], int) or p["tSteps"] < 2:
            raise ConfigError("tSteps must be an integer >= 2", "params.tSteps")
    if exp == "boundary":
        for k, v in enumerate(p["poles"]):
            a = np.asarray(v, dtype=float)
            if a.shape != (4,) or np.linalg.norm(a) == 0:
                raise ConfigError("pole must be a nonzero 4-vector", f"params.poles[{k}]")
    if exp == "stability-scaling":
        spec = _parse_modes([p["mode"]], grid, "params.mode")
        if p["gauge"] not in ("none", "conformal"):
            raise ConfigError("gauge must be 'none' or 'conformal'", "params.gauge")
        if p["gauge"] == "conformal":
            try:
                spec.with_conformal_gauge().check_resolvable(grid)
            except ValueError as exc:
                raise ConfigError(str(exc), "params.mode") from None
        for k, e in enumerate(p["epsilons"]):
            if not isinstance(e, (int, float)) or e < 0:
                raise ConfigError("epsilon must be a nonnegative number", f"params.epsilons[{k}]")
    if exp == "identities":
        r = p["monotonicityRadius"]
        if not isinstance(r, (int, float)) or not 0 <= r <= MAX_CENTER_NORM:
            raise ConfigError(f"radius must lie in [0, {MAX_CENTER_NORM}]", "params.monotonicityRadius")
    return p


def parse_config(data, experiment=None, grid=None, seed=None, out=None):
    """Validate a JSON-shaped dict; command-line overrides win over file values."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - {"experiment", "grid", "seed", "out", "surfaces", "params"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    exp = data.get("experiment", experiment)
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}", "experiment")
    if experiment is not None and exp != experiment:
        raise ConfigError(f"config is for {exp!r} but the command runs {experiment!r}", "experiment")
    try:
        g = TorusGrid.parse(grid or data.get("grid", DEFAULT_GRIDS[exp]))
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from None
    s = data.get("seed", 0) if seed is None else seed
    if not isinstance(s, int):
        raise ConfigError("seed must be an integer", "seed")
    params = copy.deepcopy(DEFAULT_PARAMS[exp])
    extra = data.get("params", {})
    if not isinstance(extra, dict):
        raise ConfigError("params must be an object", "params")
    allowed = set(params) | ({"centers"} if exp == "invariance" else set())
    if set(extra) - allowed:
        raise ConfigError(f"unknown keys {sorted(set(extra) - allowed)}", "params")
    params.update(copy.deepcopy(extra))
    params = _validate_params(exp, params, g)
    raw_surfaces = data.get("surfaces", DEFAULT_SURFACES[exp])
    if not isinstance(raw_surfaces, list) or not raw_surfaces:
        raise ConfigError("surfaces must be a nonempty list", "surfaces")
    surfaces = tuple(_parse_surface(r, g, f"surfaces[{k}]") for k, r in enumerate(raw_surfaces))
    if exp == "identities" and len(surfaces) < 5:
        raise ConfigError("the identities corpus needs at least 5 surfaces", "surfaces")
    return ExperimentConfig(exp, g, surfaces, params, s, out or data.get("out"))


def load_config(path, **overrides):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data, **overrides)
