"""Force budget of the shielded-slab geometry and Bloch-oscillation readout.

The geometry, from the atom outwards: a gap ``z``, a gold shield of thickness
``d_Au``, a vacuum gap ``d_vac`` and a silicon slab of thickness ``W`` and
lateral size ``a x b``. All forces are attraction magnitudes toward the
shield/slab side, except the Earth row, which is ``m g``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from scipy.constants import hbar, pi

from . import yukawa
from .casimir_polder import CpQuadratureSpec, cp_delta_force, cp_force
from .materials import GOLD, SILICON, VACUUM, DielectricModel
from .multilayer import LayerStack


@dataclass(frozen=True)
class ExperimentGeometry:
    z: float = 3e-6
    d_Au: float = 50e-9
    d_vac: float = 5e-6
    W: float = 10e-6
    a: float = 100e-6
    b: float = 100e-6
    rho_Si: float = 2330.0
    rho_Au: float = 19300.0
    g: float = 9.81

    def __post_init__(self):
        for name in ("z", "d_Au", "d_vac", "W", "a", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"geometry field {name} must be positive")
        for name in ("rho_Si", "rho_Au", "g"):
            if getattr(self, name) < 0:
                raise ValueError(f"geometry field {name} must be non-negative")

    @property
    def Z(self):
        """Atom to slab-centre distance."""
        return self.d_vac + self.d_Au + self.z + self.W / 2

    def with_(self, **changes):
        return ExperimentGeometry(**{**self.__dict__, **changes})

    def slab(self):
        return yukawa.Cuboid(self.a, self.b, self.W, self.rho_Si, self.Z)


@dataclass(frozen=True)
class Materials:
    shield: DielectricModel = GOLD
    slab: DielectricModel = SILICON


def shielded_stack(geom, materials):
    """vacuum | shield(d_Au) | vacuum(d_vac) | slab."""
    return LayerStack.from_materials(
        [VACUUM, materials.shield, VACUUM, materials.slab], [geom.d_Au, geom.d_vac])


def unshielded_stack(geom, materials):
    """Same geometry with the shield's permittivity set to one."""
    return LayerStack.from_materials([VACUUM, VACUUM, VACUUM, materials.slab], [geom.d_Au, geom.d_vac])


@dataclass(frozen=True)
class BudgetRow:
    force: float
    delta_force: float


@dataclass
class ForceBudget:
    """Rows keyed ``Yi(Si)``, ``Yi(Au)``, ``CP``, ``CP(Si)``, ``N(Si)``, ``N(Au)``, ``E``."""

    rows: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.rows[key]

    def __iter__(self):
        return iter(self.rows)

    def items(self):
        return self.rows.items()


def _named_points(points):
    if isinstance(points, dict):
        return dict(points)
    return {f"Y{i}": p for i, p in enumerate(points, start=1)}


def force_budget(geom, atom, materials=None, yukawa_points=None, spec=None, yukawa_mode="infinite"):
    """Every force on the atom, with its change on withdrawing the slab.

    Parameters
    ----------
    yukawa_points : dict or list of YukawaParams
        Lists are labelled ``Y1``, ``Y2``, ... in order. Defaults to the four
        reference points.
    yukawa_mode : {"infinite", "cuboid"}
        Laterally infinite closed form or finite-cuboid cubature for the slab.
    """
    materials = materials or Materials()
    spec = spec or CpQuadratureSpec()
    points = _named_points(yukawa.REFERENCE_POINTS if yukawa_points is None else yukawa_points)
    m = atom.mass
    rows = {}
    slab = geom.slab()
    for name, p in points.items():
        f_slab = yukawa.yukawa_delta_force(m, slab, p, mode=yukawa_mode)
        rows[f"{name}(Si)"] = BudgetRow(f_slab, f_slab)
        f_shield = yukawa.yukawa_force_infinite_slab(m, geom.rho_Au, geom.d_Au, geom.z + geom.d_Au / 2, p)
        rows[f"{name}(Au)"] = BudgetRow(f_shield, yukawa.shield_delta_force())

    stack = shielded_stack(geom, materials)
    rows["CP"] = BudgetRow(cp_force(atom, stack, geom.z, spec).value,
                           cp_delta_force(atom, stack, stack.truncated(), geom.z, spec).value)
    bare = cp_force(atom, unshielded_stack(geom, materials), geom.z, spec).value
    rows["CP(Si)"] = BudgetRow(bare, bare)

    n_slab = yukawa.newton_force_cuboid(m, slab)
    rows["N(Si)"] = BudgetRow(n_slab, n_slab)
    rows["N(Au)"] = BudgetRow(yukawa.newton_force_sheet(m, geom.rho_Au, geom.d_Au), 0.0)
    rows["E"] = BudgetRow(m * geom.g, 0.0)
    return ForceBudget(rows)


@dataclass(frozen=True)
class LatticeSpec:
    """Optical lattice.

    ``spacing`` is the lattice period and ``laser_wavenumber`` the ``k_L``
    entering the recoil energy; they are independent inputs.
    """

    spacing: float = 500e-9
    laser_wavenumber: float = 2 * math.pi / 500e-9
    depth_in_recoils: float = 5.0
    bandwidth_fraction: float = 0.26

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("lattice spacing must be positive")
        if not self.depth_in_recoils > 0:
            raise ValueError("lattice depth must be positive")
        if self.bandwidth_fraction < 0:
            raise ValueError("bandwidth fraction must be non-negative")


def bloch_frequency(force, lattice):
    """Bloch frequency ``F a / (2 pi hbar)`` in Hz."""
    if not force > 0:
        raise ValueError(f"Bloch frequency needs a positive force, got {force}")
    return force * lattice.spacing / (2 * pi * hbar)


def force_for_frequency(frequency, lattice):
    """Force whose Bloch frequency is ``frequency``."""
    return 2 * pi * hbar * frequency / lattice.spacing


def bloch_frequency_shift(force_initial, force_final, lattice):
    return (force_final - force_initial) * lattice.spacing / (2 * pi * hbar)


def recoil_energy(lattice, mass):
    if not mass > 0:
        raise ValueError("mass must be positive")
    return (hbar * lattice.laser_wavenumber) ** 2 / (2 * mass)


def wannier_stark_width(lattice, mass, force):
    """Spatial extent ``W_band / (2F)`` explored during one Bloch period."""
    if not force > 0:
        raise ValueError(f"Wannier-Stark width needs a positive force, got {force}")
    return lattice.bandwidth_fraction * recoil_energy(lattice, mass) / (2 * force)


@dataclass(frozen=True)
class CpDeltaCriterion:
    """Yukawa change must beat the Casimir-Polder change."""

    shielded: bool = True

    @property
    def label(self):
        return "cp_shielded" if self.shielded else "cp_unshielded"


@dataclass(frozen=True)
class FixedForceCriterion:
    """Yukawa change must beat a fixed instrument sensitivity (N)."""

    force: float

    @property
    def label(self):
        return f"fixed_{self.force:.3e}N"


def criterion_force(criterion, geom, atom, materials=None, spec=None):
    """The force the Yukawa change has to exceed."""
    if isinstance(criterion, FixedForceCriterion):
        return criterion.force
    materials = materials or Materials()
    spec = spec or CpQuadratureSpec()
    if criterion.shielded:
        stack = shielded_stack(geom, materials)
        return abs(cp_delta_force(atom, stack, stack.truncated(), geom.z, spec).value)
    return abs(cp_force(atom, unshielded_stack(geom, materials), geom.z, spec).value)


def unit_yukawa_delta(geom, mass, lam, mode="infinite"):
    """Slab Yukawa change for ``alpha = 1``."""
    return yukawa.yukawa_delta_force(mass, geom.slab(), yukawa.YukawaParams(1.0, lam), mode=mode)


def exclusion_boundary(geom, atom, materials, lambda_grid, criterion, spec=None,
                       threshold=None, mode="infinite"):
    """Boundary ``alpha(lambda)`` above which the Yukawa change beats the criterion.

    The Yukawa change is linear in ``alpha``, so every point is the exact
    ratio ``F_criterion / dF_Y(alpha=1, lambda)``. Points where the unit
    change underflows are dropped with a warning. ``threshold`` reuses a
    precomputed criterion force.
    """
    lambdas = list(lambda_grid)
    if any(lam <= 0 for lam in lambdas) or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambda grid must be positive and strictly ascending")
    if threshold is None:
        threshold = criterion_force(criterion, geom, atom, materials, spec)
    boundary = []
    for lam in lambdas:
        unit = unit_yukawa_delta(geom, atom.mass, lam, mode=mode)
        if not (unit > 0 and math.isfinite(unit)):
            warnings.warn(f"Yukawa change underflows at lambda = {lam:.3e} m; point omitted",
                          RuntimeWarning, stacklevel=2)
            continue
        boundary.append((lam, threshold / unit))
    return boundary


def is_excluded(point, threshold, geom, mass, mode="infinite"):
    """Whether the Yukawa change at ``point`` exceeds ``threshold``."""
    return point.alpha * unit_yukawa_delta(geom, mass, point.lam, mode=mode) > threshold
