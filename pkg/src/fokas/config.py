"""Run configuration: JSON loading, defaults, validation and data presets."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .complex_plane import SpectralParams
from .transforms import BoundaryDatum, file_datum, gaussian_bump, poly_bump, zero_datum


class ConfigError(ValueError):
    """One or more invalid configuration fields; ``problems`` lists (field, message)."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.problems))


PRESETS = {
    # smooth bump centred mid-window; the Neumann datum has the opposite sign and
    # half the size, i.e. a profile decaying into the domain
    "gaussian": {
        "g0": {"kind": "gaussian_bump", "center": 0.5, "width": 0.15, "amplitude": 1.0},
        "g1": {"kind": "gaussian_bump", "center": 0.5, "width": 0.15, "amplitude": -0.5},
    },
    "poly_bump": {
        "g0": {"kind": "poly_bump", "m": 4, "amplitude": 1.0},
        "g1": {"kind": "poly_bump", "m": 4, "amplitude": -0.5},
    },
    "zero": {"g0": {"kind": "zero"}, "g1": {"kind": "zero"}},
}

DEFAULTS = {
    "params": {"alpha": 1.0, "beta": 1.0, "T": 1.0},
    "data": {"preset": "gaussian"},
    "grids": {
        "x": {"min": 1e-3, "max": 20.0, "count": 400, "grading": "geometric-linear"},
        "t": {"kind": "list", "nodes": [0.25, 0.5, 1.0]},
    },
    "quadrature": {"tol": 1e-8, "max_panels": 20000, "truncation_safety": 1e-2},
    "commands": {
        "contour": {"n_per_path": 64, "s_max": 4.0},
        "solve": {"components": False},
        "kernels": {"ells": [1, 2, 3, 4, 5], "y": {"min": -20.0, "max": 20.0, "count": 41},
                    "x": [0.1], "t": [1.0, 0.25, 0.0625, 0.015625]},
        "psi": {"window": 200.0, "n_y": 16001, "r_prime": [1.0, 4.0 / 3.0, 2.0], "y_out": 401},
        "vdc": {"s": [0.1, 10.0], "shift": [-20.0, 20.0], "t": [0.01, 1.0], "count": 10},
        "dispersion": {"t_min": 0.02, "count": 20, "r": [2.0, 4.0, "inf"], "x_max": 120.0,
                       "nx": 2400},
        "oracle": {"L": 20.0, "Nx": 2000, "dt": 1e-3, "t": [0.25, 0.5, 1.0], "gr_time": 0.5},
        "verify-all": {"checks": None},
    },
    "output": "out",
    "seed": 0,
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "data":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    return complex(v)


@dataclass
class RunConfig:
    raw: dict
    params: SpectralParams
    T: float
    g0: BoundaryDatum = field(repr=False)
    g1: BoundaryDatum = field(repr=False)
    tol: float = 1e-8
    seed: int = 0
    output: str = "out"

    @property
    def commands(self) -> dict:
        return self.raw["commands"]

    def x_nodes(self) -> np.ndarray:
        gx = self.raw["grids"]["x"]
        from .evaluator import EvaluationGrid
        return EvaluationGrid.graded(gx["min"], gx["max"], gx["count"], [self.T]).x_nodes

    def t_nodes(self) -> np.ndarray:
        return t_grid(self.raw["grids"]["t"], self.T)

    def digest(self) -> str:
        """Hash of the configuration without seed and output location."""
        core = {k: v for k, v in self.raw.items() if k not in ("seed", "output")}
        text = json.dumps(core, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def t_grid(spec: dict, T: float) -> np.ndarray:
    kind = spec.get("kind", "list")
    if kind == "list":
        return np.asarray(spec["nodes"], dtype=float)
    lo, hi, n = float(spec["min"]), float(spec.get("max", T)), int(spec["count"])
    if kind == "linear":
        return np.linspace(lo, hi, n)
    if kind == "log":
        return np.geomspace(lo, hi, n)
    raise ConfigError([("grids.t.kind", f"unknown kind {kind!r}")])


def build_datum(desc: dict, T: float, where: str, problems: list) -> BoundaryDatum | None:
    kind = desc.get("kind")
    if "support" in desc:
        try:
            lo, hi = (float(v) for v in desc["support"])
        except (TypeError, ValueError):
            problems.append(("data.support", f"{where}: support must be a pair of numbers"))
            return None
        if not (0.0 <= lo < hi <= T):
            problems.append(("data.support", f"support [{lo:g}, {hi:g}] not inside [0, T={T:g}]"))
            return None
    try:
        if kind == "zero":
            return zero_datum(T)
        if kind == "gaussian_bump":
            lo, hi = (float(v) for v in desc.get("support", (0.0, T)))
            return gaussian_bump(T, float(desc.get("center", 0.5 * T)), float(desc.get("width", 0.15 * T)),
                                 _complex(desc.get("amplitude", 1.0)), (lo, hi), desc.get("ramp"))
        if kind == "poly_bump":
            m = int(desc.get("m", 4))
            if m < 4:
                problems.append((f"{where}.m", "poly_bump needs m >= 4"))
                return None
            return poly_bump(T, m, _complex(desc.get("amplitude", 1.0)))
        if kind in ("file_samples", "file"):
            d = file_datum(desc["path"], T, desc.get("ramp"))
            if not (0.0 <= d.support[0] < d.support[1] <= T):
                problems.append(("data.support", f"{where}: samples extend beyond [0, T]"))
                return None
            return d
    except (KeyError, TypeError, ValueError, OSError) as exc:
        problems.append((where, str(exc)))
        return None
    problems.append((f"{where}.kind", f"unknown data kind {kind!r}"))
    return None


def validate(raw: dict) -> RunConfig:
    problems = []
    prm = raw.get("params", {})
    alpha, beta, T = prm.get("alpha"), prm.get("beta"), prm.get("T")
    for name, v in (("alpha", alpha), ("beta", beta), ("T", T)):
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            problems.append((f"params.{name}", "must be a finite number"))
    if isinstance(alpha, (int, float)) and alpha == 0:
        problems.append(("params.alpha", "must be nonzero"))
    if isinstance(T, (int, float)) and not T > 0:
        problems.append(("params.T", "must be positive"))
    params = None
    if not problems:
        params = SpectralParams(float(alpha), float(beta))
    data = raw.get("data", {})
    if not any(k in data for k in ("preset", "g0", "g1")):
        data = {**data, "preset": DEFAULTS["data"]["preset"]}
    descs = {}
    if "preset" in data:
        if data["preset"] not in PRESETS:
            problems.append(("data.preset", f"unknown preset {data['preset']!r}"))
        else:
            descs = copy.deepcopy(PRESETS[data["preset"]])
    for key in ("g0", "g1"):
        if key in data:
            descs[key] = data[key]
    if "support" in data:
        for key in descs:
            descs[key] = {**descs[key], "support": data["support"]}
    g = {}
    Tv = float(T) if isinstance(T, (int, float)) and T > 0 else 1.0
    for key in ("g0", "g1"):
        if key not in descs:
            problems.append((f"data.{key}", "missing boundary datum"))
        else:
            # presets are given for T = 1 and scale with the window
            d = descs[key]
            if data.get("preset") and key not in data and Tv != 1.0:
                d = {**d, **{k: d[k] * Tv for k in ("center", "width") if k in d}}
            g[key] = build_datum(d, Tv, f"data.{key}", problems)
    gx = raw.get("grids", {}).get("x", {})
    try:
        if not 0 < float(gx["min"]) < float(gx["max"]):
            problems.append(("grids.x", "need 0 < min < max"))
        if int(gx["count"]) < 2:
            problems.append(("grids.x.count", "need at least 2 nodes"))
    except (KeyError, TypeError, ValueError):
        problems.append(("grids.x", "min, max and count are required"))
    try:
        tn = t_grid(raw.get("grids", {}).get("t", {}), float(T) if isinstance(T, (int, float)) else 1.0)
        if tn.size == 0 or np.any(np.diff(tn) <= 0) or tn[0] <= 0 or (
                isinstance(T, (int, float)) and tn[-1] > T * (1 + 1e-12)):
            problems.append(("grids.t", "nodes must increase strictly within (0, T]"))
    except ConfigError as exc:
        problems.extend(exc.problems)
    except (KeyError, TypeError, ValueError):
        problems.append(("grids.t", "malformed time grid"))
    tol = raw.get("quadrature", {}).get("tol")
    if not isinstance(tol, (int, float)) or not 1e-12 <= tol <= 1e-4:
        problems.append(("quadrature.tol", "must lie in [1e-12, 1e-4]"))
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        problems.append(("seed", "must be an unsigned 64-bit integer"))
    if problems:
        raise ConfigError(list(dict.fromkeys(problems)))
    return RunConfig(raw, params, float(T), g["g0"], g["g1"], float(tol), int(seed),
                     str(raw.get("output", "out")))


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([("config", f"cannot read {path}: {exc}")]) from exc
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("config", f"JSON parse error: {exc}")]) from exc
    if not isinstance(user, dict):
        raise ConfigError([("config", "top level must be an object")])
    raw = _merge(DEFAULTS, user)
    if overrides:
        raw = _merge(raw, overrides)
    return validate(raw)


def config_from_dict(user: dict) -> RunConfig:
    return validate(_merge(DEFAULTS, user))
