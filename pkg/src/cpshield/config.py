"""Run configuration: a YAML file with nested sections, all in SI units.

Any section or key may be omitted; the defaults reproduce the reference
parameter set (Rb atom, 50 nm Drude gold shield, 10 um silicon slab of
100 um x 100 um). Example::

    geometry:
      z: 3.0e-6
      d_vac: 5.0e-6
    materials:
      shield: {kind: drude, omega_p: 1.38e16, gamma: 4.0e13}
    tolerances:
      rel_tol: 1.0e-6
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from .casimir_polder import CpQuadratureSpec
from .experiment import ExperimentGeometry, LatticeSpec, Materials
from .materials import GOLD, SILICON, SILICON_CONDUCTIVITY, AtomModel, DielectricModel
from .yukawa import REFERENCE_POINTS, YukawaParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Range:
    start: float
    stop: float
    num: int
    spacing: str = "log"

    def values(self):
        if self.num <= 0:
            return []
        if self.spacing == "log":
            return list(np.geomspace(self.start, self.stop, self.num))
        return list(np.linspace(self.start, self.stop, self.num))


@dataclass(frozen=True)
class Tolerances:
    rel_tol: float = 1e-6
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    cubature_rel_tol: float = 1e-7

    def cp_spec(self):
        return CpQuadratureSpec(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                max_subdivisions=self.max_subdivisions)


@dataclass(frozen=True)
class RunConfig:
    geometry: ExperimentGeometry = ExperimentGeometry()
    atom: AtomModel = AtomModel()
    materials: Materials = Materials()
    silicon_conductivity: float = SILICON_CONDUCTIVITY
    lattice: LatticeSpec = LatticeSpec()
    yukawa_points: dict = field(default_factory=lambda: dict(REFERENCE_POINTS))
    yukawa_mode: str = "infinite"
    tolerances: Tolerances = Tolerances()
    z_range: Range = Range(0.1e-6, 30e-6, 30)
    d_vac_range: Range = Range(2e-6, 30e-6, 30)
    z_values: tuple = (3e-6, 10e-6)
    d_vac_pair: tuple = (2.5e-6, 20e-6)
    lambda_range: Range = Range(0.05e-6, 50e-6, 60)
    criteria: tuple = ("cp_shielded", "cp_unshielded", {"fixed_force": 1.325e-31})
    overlay: str | None = None
    bloch_forces: tuple = ()
    sensitivity_hz: float = 1e-4

    def as_dict(self):
        return _plain(self)

    def digest(self):
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _plain(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def _number(section, key, value):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}") from None


def _section(raw, name, cls, defaults):
    data = raw.get(name) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(unknown))}")
    values = asdict(defaults)
    for key, val in data.items():
        values[key] = int(val) if isinstance(values[key], int) and not isinstance(values[key], bool) \
            else _number(name, key, val)
    try:
        return cls(**values)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _dielectric(spec, where, default):
    if spec is None:
        return default
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{where}: expected a mapping with a 'kind' key")
    kind = spec["kind"]
    extra = set(spec) - {"kind", "eps", "omega_p", "gamma"}
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(sorted(extra))}")
    try:
        if kind == "vacuum":
            return DielectricModel.vacuum()
        if kind == "constant":
            return DielectricModel.constant(_number(where, "eps", spec.get("eps")))
        if kind == "drude":
            return DielectricModel.drude(_number(where, "omega_p", spec.get("omega_p")),
                                         _number(where, "gamma", spec.get("gamma")))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown kind {kind!r} (vacuum, constant, drude)")


def _range(data, where, default):
    if data is None:
        return default
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected start/stop/num mapping")
    spacing = data.get("spacing", default.spacing)
    if spacing not in ("log", "linear"):
        raise ConfigError(f"{where}.spacing must be 'log' or 'linear'")
    try:
        return Range(_number(where, "start", data.get("start", default.start)),
                     _number(where, "stop", data.get("stop", default.stop)),
                     int(data.get("num", default.num)), spacing)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


_TOP_LEVEL = {"geometry", "atom", "materials", "lattice", "yukawa_points", "yukawa_mode",
              "tolerances", "scan", "exclusion", "bloch"}


def parse_config(raw):
    """Build a :class:`RunConfig` from a parsed YAML mapping."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(raw) - _TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    base = RunConfig()
    geometry = _section(raw, "geometry", ExperimentGeometry, base.geometry)
    atom = _section(raw, "atom", AtomModel, base.atom)
    lattice = _section(raw, "lattice", LatticeSpec, base.lattice)
    tolerances = _section(raw, "tolerances", Tolerances, base.tolerances)
    try:
        tolerances.cp_spec()
    except ValueError as exc:
        raise ConfigError(f"tolerances: {exc}") from None

    mats = raw.get("materials") or {}
    extra = set(mats) - {"shield", "slab", "silicon_conductivity"}
    if extra:
        raise ConfigError(f"unknown key(s) in 'materials': {', '.join(sorted(extra))}")
    materials = Materials(_dielectric(mats.get("shield"), "materials.shield", GOLD),
                          _dielectric(mats.get("slab"), "materials.slab", SILICON))
    sigma = _number("materials", "silicon_conductivity",
                    mats.get("silicon_conductivity", base.silicon_conductivity))

    points = base.yukawa_points
    if raw.get("yukawa_points") is not None:
        points = {}
        for name, p in raw["yukawa_points"].items():
            try:
                points[str(name)] = YukawaParams(_number(name, "alpha", p["alpha"]),
                                                 _number(name, "lambda", p["lambda"]))
            except (KeyError, TypeError):
                raise ConfigError(f"yukawa_points.{name}: needs 'alpha' and 'lambda'") from None
            except ValueError as exc:
                raise ConfigError(f"yukawa_points.{name}: {exc}") from None
    mode = raw.get("yukawa_mode", base.yukawa_mode)
    if mode not in ("infinite", "cuboid"):
        raise ConfigError("yukawa_mode must be 'infinite' or 'cuboid'")

    scan = raw.get("scan") or {}
    extra = set(scan) - {"z", "d_vac", "z_values", "d_vac_pair"}
    if extra:
        raise ConfigError(f"unknown key(s) in 'scan': {', '.join(sorted(extra))}")
    z_values = tuple(_number("scan", "z_values", v) for v in scan.get("z_values", base.z_values))
    pair = tuple(_number("scan", "d_vac_pair", v) for v in scan.get("d_vac_pair", base.d_vac_pair))
    if len(pair) != 2:
        raise ConfigError("scan.d_vac_pair needs exactly two values")

    excl = raw.get("exclusion") or {}
    extra = set(excl) - {"lambda", "criteria", "overlay"}
    if extra:
        raise ConfigError(f"unknown key(s) in 'exclusion': {', '.join(sorted(extra))}")
    criteria = tuple(excl.get("criteria", base.criteria))

    bloch = raw.get("bloch") or {}
    extra = set(bloch) - {"forces", "sensitivity_hz"}
    if extra:
        raise ConfigError(f"unknown key(s) in 'bloch': {', '.join(sorted(extra))}")

    return RunConfig(
        geometry=geometry, atom=atom, materials=materials, silicon_conductivity=sigma,
        lattice=lattice, yukawa_points=points, yukawa_mode=mode, tolerances=tolerances,
        z_range=_range(scan.get("z"), "scan.z", base.z_range),
        d_vac_range=_range(scan.get("d_vac"), "scan.d_vac", base.d_vac_range),
        z_values=z_values, d_vac_pair=pair,
        lambda_range=_range(excl.get("lambda"), "exclusion.lambda", base.lambda_range),
        criteria=criteria, overlay=excl.get("overlay"),
        bloch_forces=tuple(_number("bloch", "forces", f) for f in bloch.get("forces", ())),
        sensitivity_hz=_number("bloch", "sensitivity_hz", bloch.get("sensitivity_hz", base.sensitivity_hz)),
    )


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from None
    return parse_config(raw)
