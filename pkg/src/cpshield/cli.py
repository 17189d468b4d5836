"""Command-line front end.

::

    cpshield cp-scan   [--axis z|d_vac]   Casimir-Polder force scans and ratios
    cpshield budget    [--pair]            full force budget / paired slab positions
    cpshield exclusion                     (lambda, alpha) boundaries and point classes
    cpshield bloch                         Bloch frequencies, recoil energy, WS width

Common flags: ``--config PATH``, ``--out PATH``, ``--format {csv,structured}``,
``--workers N``, ``--rel-tol X``. Exit status is 0 on success, 1 for
configuration or I/O problems and 2 when a quadrature fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__, experiment
from .casimir_polder import cp_delta_force, cp_force
from .config import ConfigError, RunConfig, Tolerances, load_config
from .datasets import Dataset, render
from .materials import VACUUM
from .multilayer import LayerStack
from .quadrature import QuadratureError
from .yukawa import YukawaParams


def _map(func, items, workers):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _metadata(config, command, **extra):
    meta = {
        "tool": f"cpshield {__version__}",
        "command": command,
        "config_sha256": config.digest(),
        "rel_tol": f"{config.tolerances.rel_tol:.3e}",
        "yukawa_mode": config.yukawa_mode,
    }
    meta.update(extra)
    return meta


# cp-scan -------------------------------------------------------------------

def _cp_scan_point(args):
    config, axis, x = args
    geom = config.geometry.with_(**{axis: x})
    atom, mats, spec = config.atom, config.materials, config.tolerances.cp_spec()
    z = geom.z
    shielded = cp_force(atom, experiment.shielded_stack(geom, mats), z, spec).value
    bare = cp_force(atom, experiment.unshielded_stack(geom, mats), z, spec).value
    mirror = cp_force(atom, LayerStack.mirror(), z, spec).value
    half = cp_force(atom, LayerStack.from_materials([VACUUM, mats.shield], []), z, spec).value
    sheet = cp_force(atom, LayerStack.from_materials([VACUUM, mats.shield, VACUUM], [geom.d_Au]), z, spec).value
    return (x, shielded, bare, mirror, half, sheet, _ratio(sheet, half), _ratio(sheet, mirror))


def _ratio(a, b):
    return a / b if b != 0 else float("nan")


def cmd_cp_scan(config, axis="z", workers=1):
    """Casimir-Polder forces along ``z`` or ``d_vac``.

    The sheet columns refer to the isolated shield ``vacuum | shield | vacuum``
    and the half-space columns to a semi-infinite block of shield material.
    """
    if axis not in ("z", "d_vac"):
        raise ConfigError("axis must be 'z' or 'd_vac'")
    values = (config.z_range if axis == "z" else config.d_vac_range).values()
    ds = Dataset([(axis, "m"), ("F_CP", "N"), ("F_CP_unshielded", "N"), ("F_CP_mirror", "N"),
                  ("F_CP_halfspace", "N"), ("F_CP_sheet", "N"),
                  ("ratio_sheet_halfspace", "1"), ("ratio_sheet_mirror", "1")],
                 metadata=_metadata(config, f"cp-scan --axis {axis}"))
    for row in _map(_cp_scan_point, [(config, axis, x) for x in values], workers):
        ds.add(*row)
    return ds


# budget --------------------------------------------------------------------

def _budget_point(args):
    config, z, d_vac = args
    geom = config.geometry.with_(z=z, d_vac=d_vac)
    budget = experiment.force_budget(geom, config.atom, config.materials, config.yukawa_points,
                                     config.tolerances.cp_spec(), config.yukawa_mode)
    return geom, budget


def cmd_force_budget(config, workers=1):
    """One row per ``(z, d_vac)`` with every budget entry and its change."""
    points = [(config, z, d) for z in config.z_values for d in config.d_vac_range.values()]
    results = _map(_budget_point, points, workers)
    names = list(results[0][1].rows) if results else _budget_names(config)
    columns = [("z", "m"), ("d_vac", "m"), ("Z", "m")]
    for name in names:
        columns += [(f"F_{name}", "N"), (f"dF_{name}", "N")]
    ds = Dataset(columns, metadata=_metadata(config, "budget"))
    for geom, budget in results:
        values = [geom.z, geom.d_vac, geom.Z]
        for name in names:
            values += [budget[name].force, budget[name].delta_force]
        ds.add(*values)
    return ds


def _budget_names(config):
    names = []
    for p in config.yukawa_points:
        names += [f"{p}(Si)", f"{p}(Au)"]
    return names + ["CP", "CP(Si)", "N(Si)", "N(Au)", "E"]


def _pair_point(args):
    config, z = args
    near, far = config.d_vac_pair
    spec = config.tolerances.cp_spec()
    out = []
    deltas = []
    for d_vac in (near, far):
        geom = config.geometry.with_(z=z, d_vac=d_vac)
        stack = experiment.shielded_stack(geom, config.materials)
        row = {name: experiment.unit_yukawa_delta(geom, config.atom.mass, p.lam, config.yukawa_mode) * p.alpha
               for name, p in config.yukawa_points.items()}
        row["CP"] = cp_delta_force(config.atom, stack, stack.truncated(), z, spec).value
        deltas.append(row)
    for name in deltas[0]:
        df = deltas[0][name] - deltas[1][name]
        out += [df, experiment.bloch_frequency_shift(0.0, df, config.lattice)]
    return (z, *out)


def cmd_force_pair(config, workers=1):
    """Force change between two slab positions as a function of ``z``.

    Each change is ``F(d_near) - F(d_far)`` and comes with its Bloch
    frequency shift.
    """
    names = [*config.yukawa_points, "CP"]
    columns = [("z", "m")]
    for name in names:
        columns += [(f"dF_{name}", "N"), (f"dnu_{name}", "Hz")]
    near, far = config.d_vac_pair
    sens = experiment.force_for_frequency(config.sensitivity_hz, config.lattice)
    ds = Dataset(columns, metadata=_metadata(
        config, "budget --pair", d_vac_near=f"{near:.3e}", d_vac_far=f"{far:.3e}",
        sensitivity_force_N=f"{sens:.6e}", sensitivity_Hz=f"{config.sensitivity_hz:.3e}"))
    for row in _map(_pair_point, [(config, z) for z in config.z_range.values()], workers):
        ds.add(*row)
    return ds


# exclusion -----------------------------------------------------------------

def parse_criterion(entry):
    if entry == "cp_shielded":
        return experiment.CpDeltaCriterion(shielded=True)
    if entry == "cp_unshielded":
        return experiment.CpDeltaCriterion(shielded=False)
    if isinstance(entry, dict) and set(entry) == {"fixed_force"}:
        try:
            return experiment.FixedForceCriterion(float(entry["fixed_force"]))
        except (TypeError, ValueError):
            raise ConfigError(f"fixed_force needs a number, got {entry['fixed_force']!r}") from None
    raise ConfigError(f"unknown exclusion criterion {entry!r} "
                      "(cp_shielded, cp_unshielded or {fixed_force: F})")


def _criterion_point(args):
    config, criterion = args
    return experiment.criterion_force(criterion, config.geometry, config.atom,
                                      config.materials, config.tolerances.cp_spec())


def _read_overlay(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    except OSError as exc:
        raise ConfigError(f"cannot read overlay {path}: {exc.strerror}") from None
    out = []
    for r in rows:
        try:
            out.append((float(r[0]), float(r[1])))
        except (ValueError, IndexError):
            continue  # header or comment line
    return out


def cmd_exclusion(config, criteria=None, workers=1):
    """Boundary polylines for each criterion plus reference-point classes.

    Rows with ``point = boundary`` trace ``alpha(lambda)``; one row per
    configured Yukawa point records whether it lies in the excluded region.
    An overlay file (two numeric columns, lambda and alpha) is passed
    through unchanged under ``criterion = overlay``.
    """
    criteria = [parse_criterion(c) for c in (criteria if criteria is not None else config.criteria)]
    geom, atom = config.geometry, config.atom
    thresholds = _map(_criterion_point, [(config, c) for c in criteria], workers)
    lambdas = config.lambda_range.values()
    meta = {f"threshold_{c.label}_N": f"{t:.8e}" for c, t in zip(criteria, thresholds)}
    meta.update(z=f"{geom.z:.3e}", d_vac=f"{geom.d_vac:.3e}")
    ds = Dataset([("criterion", "-"), ("point", "-"), ("lambda", "m"), ("alpha", "1"), ("excluded", "-")],
                 metadata=_metadata(config, "exclusion", **meta))
    for crit, thr in zip(criteria, thresholds):
        for lam, alpha in experiment.exclusion_boundary(geom, atom, config.materials, lambdas, crit,
                                                        threshold=thr, mode=config.yukawa_mode):
            ds.add(crit.label, "boundary", lam, alpha, None)
        for name, p in config.yukawa_points.items():
            inside = experiment.is_excluded(p, thr, geom, atom.mass, mode=config.yukawa_mode)
            ds.add(crit.label, name, p.lam, p.alpha, inside)
    if config.overlay:
        for lam, alpha in _read_overlay(config.overlay):
            ds.add("overlay", "external", lam, alpha, None)
    return ds


# bloch ---------------------------------------------------------------------

def cmd_bloch(config, forces=None):
    """Bloch frequency, shift, recoil energy and Wannier-Stark width.

    The ``earth`` row uses ``m g`` alone. Each extra force is added on top of
    gravity; its shift column is the frequency change it causes. The last
    row is the force matching the configured frequency sensitivity.
    """
    lattice, mass = config.lattice, config.atom.mass
    forces = config.bloch_forces if forces is None else forces
    e_r = experiment.recoil_energy(lattice, mass)
    earth = mass * config.geometry.g
    ds = Dataset([("label", "-"), ("force", "N"), ("nu_B", "Hz"), ("delta_nu_B", "Hz"),
                  ("E_R", "J"), ("w", "m")],
                 metadata=_metadata(config, "bloch", spacing_m=f"{lattice.spacing:.6e}",
                                    laser_wavenumber_per_m=f"{lattice.laser_wavenumber:.6e}"))

    def width(f):
        return experiment.wannier_stark_width(lattice, mass, f) if f > 0 else "undefined"

    def freq(f):
        return experiment.bloch_frequency(f, lattice) if f > 0 else "undefined"

    ds.add("earth", earth, freq(earth), None, e_r, width(earth))
    for i, f in enumerate(forces, start=1):
        total = earth + f
        ds.add(f"extra_{i}", total, freq(total), experiment.bloch_frequency_shift(earth, total, lattice),
               e_r, width(total))
    sens = experiment.force_for_frequency(config.sensitivity_hz, lattice)
    ds.add("sensitivity", sens, config.sensitivity_hz, config.sensitivity_hz, e_r, width(sens))
    return ds


# entry point ---------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="cpshield", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "structured"), default="csv")
    common.add_argument("--workers", type=int, default=1, metavar="N")
    common.add_argument("--rel-tol", type=float, metavar="X", help="override tolerances.rel_tol")
    sub = parser.add_subparsers(dest="command", required=True)
    scan = sub.add_parser("cp-scan", parents=[common], help="Casimir-Polder force scan")
    scan.add_argument("--axis", choices=("z", "d_vac"), default="z")
    budget = sub.add_parser("budget", parents=[common], help="force budget table")
    budget.add_argument("--pair", action="store_true",
                        help="force change between the two scan.d_vac_pair positions versus z")
    sub.add_parser("exclusion", parents=[common], help="Yukawa exclusion boundaries")
    sub.add_parser("bloch", parents=[common], help="Bloch-oscillation observables")
    return parser


def _apply_overrides(config, args):
    if args.rel_tol is not None:
        try:
            tol = dataclasses.replace(config.tolerances, rel_tol=args.rel_tol)
            tol.cp_spec()
        except ValueError as exc:
            raise ConfigError(f"--rel-tol: {exc}") from None
        config = dataclasses.replace(config, tolerances=tol)
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    return config


def run(args):
    config = _apply_overrides(load_config(args.config), args)
    if args.command == "cp-scan":
        return cmd_cp_scan(config, args.axis, args.workers)
    if args.command == "budget":
        return cmd_force_pair(config, args.workers) if args.pair else cmd_force_budget(config, args.workers)
    if args.command == "exclusion":
        return cmd_exclusion(config, workers=args.workers)
    return cmd_bloch(config)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = render(run(args), args.format)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"cpshield: configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cpshield: {exc}", file=sys.stderr)
        return 1
    except QuadratureError as exc:
        print(f"cpshield: numerical non-convergence: {exc}", file=sys.stderr)
        return 2
    return 0


__all__ = ["main", "cmd_cp_scan", "cmd_force_budget", "cmd_force_pair", "cmd_exclusion", "cmd_bloch",
           "RunConfig", "Tolerances", "YukawaParams"]
