"""Scenario files: strict INI parsing into a resolved scenario.

Field-valued entries (initial data, targets, control initialization) use a
small spec language::

    zero | constant:<value> | sines:<amplitude> | file:<path>

``sines:a`` is ``a sin(pi x / lx) sin(pi y / ly)``. Targets additionally
accept ``reference``: the per-level trajectory of a forward solve driven by
``[cost] reference_control``. A control ``file:`` path containing ``%``
is a per-level pattern such as ``f_%04d.csv``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import CoefficientSet, builtin_set, load_table
from .mesh import Grid2D, read_field
from .objective import CostParams
from .optimizer import OptimizerOptions
from .state import TimeGrid, solve_forward


class ConfigError(ValueError):
    pass


SCHEMA = {
    "grid": {"nx": int, "ny": int, "lx": float, "ly": float},
    "time": {"T": float, "N": int},
    "coefficients": {"family": str, "c1": float, "c2": float, "table": str},
    "initial": {"u0": str, "p0": str},
    "cost": {"beta1": float, "q0": float, "U": str, "P": str, "reference_control": str},
    "control": {"init": str},
    "optimizer": {"grad_tol": float, "max_iter": int, "armijo_c": float, "shrink": float},
    "gradcheck": {"directions": int, "step": float, "rtol": float},
    "verify": {"mms_T": float, "mms_levels": int},
    "output": {"dir": str, "stride": int},
}

DEFAULTS = {
    "grid": {"lx": 1.0, "ly": 1.0},
    "coefficients": {"family": "default", "c1": 1.0, "c2": 2.0},
    "initial": {"u0": "zero", "p0": "zero"},
    "cost": {"beta1": 1e-2, "q0": 1.0, "U": "zero", "P": "zero"},
    "control": {"init": "zero"},
    "optimizer": {"grad_tol": 1e-6, "max_iter": 500, "armijo_c": 1e-4, "shrink": 0.5},
    "gradcheck": {"directions": 10, "step": 1e-5, "rtol": 1e-6},
    "verify": {"mms_T": 0.02, "mms_levels": 3},
    "output": {"dir": "out", "stride": 1},
}

REQUIRED = {"grid": ("nx", "ny"), "time": ("T", "N")}


@dataclass
class Scenario:
    """A fully resolved scenario: every symbol instantiated."""

    values: dict
    grid: Grid2D
    tg: TimeGrid
    coef: CoefficientSet
    u0: np.ndarray
    p0: np.ndarray
    params: CostParams
    initial_control: np.ndarray
    opts: OptimizerOptions
    base_dir: Path = field(default=Path("."))


def _convert(section, key, raw, typ):
    try:
        if typ is int:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {typ.__name__}") from None


def read_config(path) -> dict:
    """Parse and type-check a scenario file; unknown sections/keys are errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {s: dict(DEFAULTS.get(s, {})) for s in SCHEMA}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key [{section}] {key}")
            values[section][key] = _convert(section, key, raw, SCHEMA[section][key])
    for section, keys in REQUIRED.items():
        for key in keys:
            if key not in values.get(section, {}):
                raise ConfigError(f"{path}: missing required key [{section}] {key}")
    return values


def _field(spec: str, grid: Grid2D, base: Path, what: str) -> np.ndarray:
    kind, _, arg = spec.partition(":")
    kind = kind.strip()
    try:
        if kind == "zero":
            return grid.zeros()
        if kind == "constant":
            return grid.full(float(arg))
        if kind == "sines":
            return float(arg) * grid.sine_mode(1, 1)
    except ValueError:
        raise ConfigError(f"{what}: bad numeric argument in {spec!r}") from None
    if kind == "file":
        return read_field(_existing(arg, base, what), grid)
    raise ConfigError(f"{what}: unknown field spec {spec!r}")


def _existing(arg: str, base: Path, what: str) -> Path:
    p = Path(arg.strip())
    if not p.is_absolute():
        p = base / p
    if not p.is_file():
        raise ConfigError(f"{what}: file not found: {p}")
    return p


def _controls(spec: str, grid: Grid2D, tg: TimeGrid, base: Path, what: str) -> np.ndarray:
    kind, _, arg = spec.partition(":")
    if kind.strip() == "file" and "%" in arg:
        levels = [read_field(_existing(arg % n, base, what), grid) for n in range(tg.N)]
        return np.array(levels)
    f = _field(spec, grid, base, what)
    return np.broadcast_to(f, (tg.N,) + grid.shape).copy()


def resolve(values: dict, base_dir=".") -> Scenario:
    """Instantiate grid, coefficients, data and parameters from parsed values.

    Module precondition failures surface as :class:`ConfigError` carrying
    the module's message.
    """
    base = Path(base_dir)
    try:
        g = values["grid"]
        grid = Grid2D(g["nx"], g["ny"], g["lx"], g["ly"])
        tg = TimeGrid(values["time"]["T"], values["time"]["N"])
        c = values["coefficients"]
        if "table" in c:
            coef = load_table(_existing(c["table"], base, "[coefficients] table"),
                              c["c1"], c["c2"])
        else:
            coef = builtin_set(c["family"], c["c1"], c["c2"])
        u0 = _field(values["initial"]["u0"], grid, base, "[initial] u0")
        p0 = _field(values["initial"]["p0"], grid, base, "[initial] p0")
        cost = values["cost"]
        targets = {}
        if "reference" in (cost["U"].strip(), cost["P"].strip()):
            if "reference_control" not in cost:
                raise ConfigError("[cost] reference targets need reference_control")
            fref = _controls(cost["reference_control"], grid, tg, base,
                             "[cost] reference_control")
            ref = solve_forward(grid, u0, p0, fref, coef, tg)
            targets["reference"] = (ref.u, ref.p)
        U = (targets["reference"][0] if cost["U"].strip() == "reference"
             else _field(cost["U"], grid, base, "[cost] U"))
        P = (targets["reference"][1] if cost["P"].strip() == "reference"
             else _field(cost["P"], grid, base, "[cost] P"))
        params = CostParams(U, P, cost["beta1"], cost["q0"])
        f0 = _controls(values["control"]["init"], grid, tg, base, "[control] init")
        o = values["optimizer"]
        opts = OptimizerOptions(grad_tol=o["grad_tol"], max_iter=o["max_iter"],
                                armijo_c=o["armijo_c"], shrink=o["shrink"])
        if values["output"]["stride"] < 1:
            raise ValueError("[output] stride must be >= 1")
        gc = values["gradcheck"]
        if gc["directions"] < 1 or not gc["step"] > 0 or not gc["rtol"] > 0:
            raise ValueError("[gradcheck] needs directions >= 1, step > 0, rtol > 0")
        if values["verify"]["mms_levels"] < 2 or not values["verify"]["mms_T"] > 0:
            raise ValueError("[verify] needs mms_levels >= 2 and mms_T > 0")
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return Scenario(values, grid, tg, coef, u0, p0, params, f0, opts, base)


def load_scenario(path) -> Scenario:
    path = Path(path)
    return resolve(read_config(path), path.parent)
