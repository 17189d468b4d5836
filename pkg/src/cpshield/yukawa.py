"""Yukawa and Newtonian gravity of slabs acting on an atom.

Every gravity-type force here is reported as an attraction magnitude: a
positive value pulls the atom toward the source body for ``alpha > 0``. The
pair potential itself is returned with the sign-free convention
``G M m / r * (1 + alpha exp(-r/lambda))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import G

from .quadrature import QuadratureError, integrate


@dataclass(frozen=True)
class YukawaParams:
    alpha: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"Yukawa range must be positive, got {self.lam}")

    def scaled(self, alpha):
        return YukawaParams(alpha, self.lam)


# Reference points used throughout (alpha, lambda).
Y1 = YukawaParams(1e9, 2e-6)
Y2 = YukawaParams(1e6, 2e-6)
Y3 = YukawaParams(1e9, 0.5e-6)
Y4 = YukawaParams(1e6, 0.5e-6)
REFERENCE_POINTS = {"Y1": Y1, "Y2": Y2, "Y3": Y3, "Y4": Y4}


@dataclass(frozen=True)
class Cuboid:
    """Rectangular source body on the atom's symmetry axis.

    ``a`` and ``b`` are the lateral sides, ``W`` the thickness along the axis
    and ``Z`` the distance from the atom to the body's centre.
    """

    a: float
    b: float
    W: float
    rho: float
    Z: float

    def __post_init__(self):
        for name in ("a", "b", "W", "Z"):
            if not getattr(self, name) > 0:
                raise ValueError(f"cuboid {name} must be positive")
        if self.rho < 0:
            raise ValueError("density must be non-negative")
        if not self.Z > self.W / 2:
            raise ValueError("the atom must lie outside the body (Z > W/2)")


@dataclass(frozen=True)
class CubatureResult:
    value: float
    error_estimate: float
    evaluations: int


def yukawa_pair_potential(M, m, r, p):
    if not r > 0:
        raise ValueError("separation must be positive")
    return G * M * m / r * (1.0 + p.alpha * math.exp(-r / p.lam))


def _slab_profile(W, Z, lam):
    """``lam * exp(-Z/lam) * sinh(W/(2 lam))`` without overflow."""
    near = (Z - W / 2) / lam
    return 0.5 * lam * math.exp(-near) * -math.expm1(-W / lam)


def yukawa_force_infinite_slab(m, rho, W, Z, p):
    """Yukawa attraction of a laterally infinite slab of thickness ``W``.

    ``Z`` is the distance from the atom to the mid-plane of the slab; the
    closed form is ``4 pi alpha G lambda m rho exp(-Z/lambda) sinh(W/2lambda)``.
    """
    if not Z > W / 2:
        raise ValueError("the atom must lie outside the slab (Z > W/2)")
    return 4.0 * math.pi * p.alpha * G * m * rho * _slab_profile(W, Z, p.lam)


def _sectors(a, b, component):
    corner = math.atan2(b, a)
    if component == "z":
        # Quadrant symmetry; weight 4.
        return [(0.0, corner), (corner, math.pi / 2)], 4.0
    cuts = [0.0, corner, math.pi - corner, math.pi + corner, 2 * math.pi - corner, 2 * math.pi]
    return list(zip(cuts[:-1], cuts[1:])), 1.0


def yukawa_force_cuboid(m, cuboid, p, rel_tol=1e-7, max_intervals=400, component="z"):
    """Yukawa force of a finite cuboid on an atom on its symmetry axis.

    Integrates the field of the Yukawa term over the volume: the depth
    coordinate ``h`` (distance from the atom to each lateral plane) is
    outermost, and each plane is covered in polar coordinates about the foot
    of the perpendicular, split into sectors at the rectangle's corners. The
    radial coordinate is stretched logarithmically around the natural scale
    ``min(h, sqrt(h lambda))`` so that narrow peaks are resolved from the
    first pass.

    Parameters
    ----------
    component : {"z", "x"}
        ``"z"`` is the axial attraction. ``"x"`` integrates one lateral
        component, which vanishes by symmetry and is exposed for checking.

    Raises
    ------
    QuadratureError
        If any level fails to converge; ``.result`` holds the best estimate.
    """
    if component not in ("z", "x"):
        raise ValueError("component must be 'z' or 'x'")
    lam = p.lam
    prefactor = G * m * cuboid.rho * p.alpha / lam
    if prefactor == 0.0:
        return CubatureResult(0.0, 0.0, 0)
    half_a, half_b = cuboid.a / 2, cuboid.b / 2
    h_lo = cuboid.Z - cuboid.W / 2
    span = -math.expm1(-cuboid.W / lam)
    sectors, weight = _sectors(cuboid.a, cuboid.b, component)
    inner_tol = rel_tol / 10
    evaluations = 0
    failures = []

    def edge(theta):
        with np.errstate(divide="ignore"):
            return np.minimum(half_a / np.abs(np.cos(theta)), half_b / np.abs(np.sin(theta)))

    def lateral(h, th0, th1):
        # Returns the sector integral for every depth node in ``h``.
        scale = np.minimum(h, np.sqrt(h * lam))

        def angular(theta):
            nonlocal evaluations
            R = edge(theta)[:, None]
            L = scale[None, :]
            beta = np.log1p(R / L)
            hh = np.broadcast_to(h[None, :], beta.shape)
            ang = np.cos(theta)[:, None] if component == "x" else None

            def radial(u):
                rho = L[None] * np.expm1(beta[None] * u[:, None, None])
                jac = (rho + L[None]) * beta[None]
                r = np.sqrt(hh[None] ** 2 + rho**2)
                base = (r + lam) * np.exp(-r / lam) / r**3 * rho * jac
                if component == "z":
                    val = base * hh[None]
                else:
                    val = base * rho * ang[None]
                return val.reshape(u.size, -1)

            res = integrate(radial, 0.0, 1.0, rel_tol=inner_tol, max_intervals=max_intervals)
            evaluations += res.evaluations * beta.size
            if not res.converged:
                failures.append(res)
            return np.asarray(res.value).reshape(beta.shape)

        res = integrate(angular, th0, th1, rel_tol=inner_tol, max_intervals=max_intervals)
        if not res.converged:
            failures.append(res)
        return np.asarray(res.value)

    def depth(u):
        h = h_lo - lam * np.log1p(-u * span)
        jac = lam * span / (1.0 - u * span)
        total = sum(lateral(h, th0, th1) for th0, th1 in sectors)
        return weight * total * jac

    # The lateral component cancels to zero, so it is judged against the
    # axial magnitude of a laterally infinite slab.
    abs_tol = rel_tol * 4.0 * math.pi * lam * _slab_profile(cuboid.W, cuboid.Z, lam) if component == "x" else 0.0
    res = integrate(depth, 0.0, 1.0, rel_tol=rel_tol, abs_tol=abs_tol, max_intervals=max_intervals)
    value = prefactor * res.value
    error = abs(prefactor) * res.error
    result = CubatureResult(float(value), float(error), evaluations)
    if failures or not res.converged:
        raise QuadratureError(f"cuboid cubature did not converge (estimate {value:.6e})", result)
    return result


def newton_force_cuboid(m, cuboid):
    """Far-field point-mass estimate ``G a b W rho m / Z^2``."""
    if not cuboid.Z > 0:
        raise ValueError("Z must be positive")
    return G * cuboid.a * cuboid.b * cuboid.W * cuboid.rho * m / cuboid.Z**2


def newton_force_sheet(m, rho, d):
    """Distance-independent attraction ``2 pi G rho d m`` of an infinite sheet."""
    if d < 0:
        raise ValueError("sheet thickness must be non-negative")
    return 2.0 * math.pi * G * rho * d * m


def yukawa_delta_force(m, cuboid, p, mode="infinite", **cubature):
    """Force change when the slab is withdrawn to infinity.

    Removing the slab kills its force entirely, so the change equals the
    slab force itself.
    """
    if mode == "infinite":
        return yukawa_force_infinite_slab(m, cuboid.rho, cuboid.W, cuboid.Z, p)
    if mode == "cuboid":
        return yukawa_force_cuboid(m, cuboid, p, **cubature).value
    raise ValueError(f"unknown mode {mode!r}; expected 'infinite' or 'cuboid'")


def shield_delta_force():
    """The shield stays put when the slab moves, so its change is zero."""
    return 0.0
