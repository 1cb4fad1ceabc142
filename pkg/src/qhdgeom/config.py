"""Scenario files.

A scenario is one JSON object.  Keys (all optional except the wave-function
block)::

    name        string
    constants   {"hbar", "mass", "charge", "c", "mass_matrix": 3x3}   default 1 / m*I
    V, phi      expression string, number, or {"grid": "file.csv"}
    A           list of three expressions, or {"grid": ["ax.csv", "ay.csv", "az.csv"]}
    psi         {"R": expr, "S": expr} | {"grid": "psi.csv", "node_tol": 1e-10} | {"VQ": expr}
    R, S, VQ    top-level shorthand for the psi block
    domain      {"lo": [t, x, y, z], "hi": [t, x, y, z]}
    numerics    {"step", "n_steps", "t_end", "normalize", "n_samples", "seed"}
    initial     {"x": [4], "y": [4]}   geodesic start; Newton uses t = x^0, r = x^i, v = y^i / y^0
    points      list of extended points [t, x, y, z]
    tangents    list of tangent vectors y used by ``metric`` and ``zermelo``

Grid paths are resolved relative to the scenario file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError, ScenarioSyntaxError
from .fields import (
    AnalyticField,
    Box,
    Constants,
    GridField,
    MadelungState,
    VectorField,
    load_grid,
    madelung_decompose,
    NODE_TOL,
)
from .scenario import Scenario

TOP_KEYS = {"name", "constants", "V", "phi", "A", "psi", "R", "S", "VQ", "domain",
            "numerics", "initial", "points", "tangents"}
CONST_KEYS = {"hbar", "mass", "charge", "c", "mass_matrix"}
NUMERIC_DEFAULTS = {
    "step": 1e-3,
    "n_steps": 10000,
    "t_end": None,
    "normalize": None,
    "n_samples": 200,
    "seed": 0,
}


@dataclass
class ScenarioConfig:
    raw: dict
    scenario: Scenario
    numerics: dict
    initial: dict | None
    points: np.ndarray
    tangents: np.ndarray
    source: Path | None = None
    extra: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _expr_field(value, key, base: Path | None):
    if value is None:
        return None
    if isinstance(value, (int, float, str)) and not isinstance(value, bool):
        return AnalyticField(str(value) if isinstance(value, str) else value)
    if isinstance(value, dict) and set(value) == {"grid"}:
        grid, samples = load_grid(_resolve(value["grid"], base))
        if np.iscomplexobj(samples):
            raise SchemaError("potential grids must be real", key)
        return GridField(grid, samples)
    raise SchemaError("expected an expression or {\"grid\": path}", key)


def _resolve(path, base):
    p = Path(path)
    return p if p.is_absolute() or base is None else base / p


def _vector(value, base):
    if value is None:
        return None
    if isinstance(value, list) and len(value) == 3:
        return VectorField(tuple(_expr_field(v, f"A[{i}]", base) for i, v in enumerate(value)))
    if isinstance(value, dict) and set(value) == {"grid"} and isinstance(value["grid"], list) \
            and len(value["grid"]) == 3:
        return VectorField(tuple(_expr_field({"grid": g}, f"A[{i}]", base) for i, g in enumerate(value["grid"])))
    raise SchemaError("A must be a list of three components", "A")


def _vector4(value, key):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("expected a list of four numbers", key) from None
    if arr.shape != (4,):
        raise SchemaError("expected a list of four numbers", key)
    return arr


def _point_list(value, key):
    if value is None:
        return np.zeros((0, 4))
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("expected a list of [t, x, y, z] entries", key) from None
    if arr.size == 0:
        return np.zeros((0, 4))
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise SchemaError("expected a list of [t, x, y, z] entries", key)
    return arr


def _psi_block(raw, consts, base):
    short = {k: raw[k] for k in ("R", "S", "VQ") if k in raw}
    if "psi" in raw and short:
        raise SchemaError("give the wave function either under psi or at top level, not both", "psi")
    psi = raw.get("psi", short)
    if not isinstance(psi, dict) or not psi:
        raise SchemaError("missing wave function (R/S, grid or VQ)", "psi")
    paths = [("R" in psi or "S" in psi), "grid" in psi, "VQ" in psi]
    if sum(paths) != 1:
        raise SchemaError("exactly one of {R, S}, grid or VQ must be given", "psi")
    if "VQ" in psi:
        return {"VQ": _expr_field(psi["VQ"], "psi.VQ", base)}
    if "grid" in psi:
        grid, samples = load_grid(_resolve(psi["grid"], base))
        tol = float(psi.get("node_tol", NODE_TOL))
        return {"state": madelung_decompose(samples, grid, consts, node_tol=tol)}
    if "R" not in psi:
        raise SchemaError("amplitude R is missing", "psi.R")
    R = _expr_field(psi["R"], "psi.R", base)
    S = _expr_field(psi.get("S", 0), "psi.S", base)
    return {"state": MadelungState(R, S)}


def parse_config(raw: dict, source: Path | None = None) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise SchemaError("scenario must be a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise SchemaError("unknown key", sorted(unknown)[0])
    base = None if source is None else source.parent

    cr = raw.get("constants", {})
    if not isinstance(cr, dict):
        raise SchemaError("constants must be an object", "constants")
    bad = set(cr) - CONST_KEYS
    if bad:
        raise SchemaError("unknown constant", f"constants.{sorted(bad)[0]}")
    try:
        consts = Constants(**{k: float(v) for k, v in cr.items() if k != "mass_matrix"})
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), "constants") from None
    mass_matrix = cr.get("mass_matrix")

    domain = None
    if "domain" in raw:
        d = raw["domain"]
        if not isinstance(d, dict) or set(d) != {"lo", "hi"}:
            raise SchemaError("domain needs lo and hi", "domain")
        domain = Box(tuple(_vector4(d["lo"], "domain.lo")), tuple(_vector4(d["hi"], "domain.hi")))

    try:
        scenario = Scenario(
            V=_expr_field(raw.get("V"), "V", base),
            phi=_expr_field(raw.get("phi"), "phi", base),
            A=_vector(raw.get("A"), base),
            consts=consts,
            mass_matrix=mass_matrix,
            domain=domain,
            name=str(raw.get("name", source.stem if source else "scenario")),
            **_psi_block(raw, consts, base),
        )
    except ValueError as exc:
        raise SchemaError(str(exc), "constants.mass_matrix" if "mass matrix" in str(exc) else None) from None

    numerics = dict(NUMERIC_DEFAULTS)
    nr = raw.get("numerics", {})
    bad = set(nr) - set(NUMERIC_DEFAULTS)
    if bad:
        raise SchemaError("unknown numerics key", f"numerics.{sorted(bad)[0]}")
    numerics.update(nr)
    if numerics["normalize"] not in (None, "F", "alpha"):
        raise SchemaError("normalize must be null, \"F\" or \"alpha\"", "numerics.normalize")

    initial = None
    if "initial" in raw:
        ini = raw["initial"]
        if not isinstance(ini, dict) or set(ini) != {"x", "y"}:
            raise SchemaError("initial needs x and y", "initial")
        initial = {"x": _vector4(ini["x"], "initial.x"), "y": _vector4(ini["y"], "initial.y")}

    return ScenarioConfig(
        raw=raw,
        scenario=scenario,
        numerics=numerics,
        initial=initial,
        points=_point_list(raw.get("points"), "points"),
        tangents=_point_list(raw.get("tangents"), "tangents"),
        source=source,
    )


def load_json(path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None


def parse_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(load_json(path), source=path)
