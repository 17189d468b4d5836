"""Zero-temperature Casimir-Polder potential and force above a planar stack.

The potential is the Lifshitz-type double integral over imaginary frequency
``xi`` and parallel wavevector ``k``::

    U(z) = hbar mu0 / (8 pi^2) * int dxi xi^2 alpha(i xi) int dk k / kappa0
           * [r_TE - (1 + 2 k^2 c^2 / xi^2) r_TM] * exp(-2 z kappa0)

with ``kappa0 = sqrt(k^2 + xi^2/c^2)``. The prefactor convention needs no
sign change: a perfect mirror (``r_TE = -1``, ``r_TM = 1``) gives a negative,
attractive potential that reduces to ``-3 hbar c alpha(0) / (32 pi^2 eps0 z^4)``
at large ``z``.

Sign conventions
----------------
Potentials are negative for attraction. Forces are reported as the
attraction magnitude ``dU/dz``: positive means pulled toward the stack.

Both semi-infinite domains are mapped to ``(0, 1)`` with ``x = s t / (1 - t)``
and integrated with the open adaptive Gauss-Kronrod rule from
:mod:`cpshield.quadrature`, frequency outermost. The inner ``k`` integral is
done for all outer nodes at once as one vector-valued integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c, epsilon_0, hbar, mu_0, pi

from . import multilayer
from .multilayer import TE, TM
from .quadrature import QuadratureError, integrate

PREFACTOR = hbar * mu_0 / (8.0 * pi**2)


@dataclass(frozen=True)
class CpQuadratureSpec:
    """Tolerances and domain mapping for the double integral.

    ``xi_scale`` and ``k_scale`` override the automatic mapping scales
    (``min(omega_ij, c / 2z)`` and ``1 / 2z``).
    """

    rel_tol: float = 1e-6
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    inner_rel_tol: float | None = None
    xi_scale: float | None = None
    k_scale: float | None = None

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ValueError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")

    @property
    def inner_tol(self):
        return self.inner_rel_tol if self.inner_rel_tol is not None else self.rel_tol / 10.0


@dataclass(frozen=True)
class CpResult:
    value: float
    error_estimate: float
    evaluations: int


class CpConvergenceError(QuadratureError):
    pass


def _bracket(reflect, xi, k, absolute=False):
    """``xi^2 [r_TE - (1 + 2 k^2 c^2 / xi^2) r_TM]`` written without 1/xi^2."""
    te, tm = reflect(TE, xi, k), reflect(TM, xi, k)
    if absolute:
        return xi**2 * np.abs(te) + (xi**2 + 2.0 * (k * c) ** 2) * np.abs(tm)
    return xi**2 * te - (xi**2 + 2.0 * (k * c) ** 2) * tm


def _double_integral(atom, reflect, z, spec, derivative, magnitude=None):
    """Outer frequency integral of the vectorized inner wavevector integral.

    ``magnitude(pol, xi, k)``, when given, bounds the reflection terms that
    cancelled inside ``reflect``; it sets the roundoff floor of the inner
    integral.
    """
    xi_scale = spec.xi_scale or min(atom.omega_ij, c / (2.0 * z))
    k_scale = spec.k_scale or 1.0 / (2.0 * z)
    inner_tol = spec.inner_tol
    evaluations = 0
    inner_failed = False

    def outer(t):
        nonlocal evaluations, inner_failed
        xi = xi_scale * t / (1.0 - t)
        jac_xi = xi_scale / (1.0 - t) ** 2

        def inner(u):
            k = (k_scale * u / (1.0 - u))[:, None]
            jac_k = (k_scale / (1.0 - u) ** 2)[:, None]
            kappa0 = np.sqrt(k**2 + (xi[None, :] / c) ** 2)
            weight = jac_k * k / kappa0 * np.exp(-2.0 * z * kappa0)
            if derivative:
                weight = weight * 2.0 * kappa0
            value = weight * _bracket(reflect, xi[None, :], k)
            if magnitude is None:
                return value
            return value, np.abs(weight) * _bracket(magnitude, xi[None, :], k, absolute=True)

        res = integrate(inner, 0.0, 1.0, rel_tol=inner_tol, max_intervals=spec.max_subdivisions,
                        with_magnitude=magnitude is not None)
        evaluations += res.evaluations * xi.size
        inner_failed = inner_failed or not res.converged
        pol = atom.polarizability_imag(xi)
        return np.stack([jac_xi * pol * res.value, jac_xi * pol * res.error], axis=1)

    abs_tol = spec.abs_tol / PREFACTOR if spec.abs_tol else 0.0
    res = integrate(outer, 0.0, 1.0, rel_tol=spec.rel_tol, abs_tol=[abs_tol, np.inf],
                    max_intervals=spec.max_subdivisions)
    value = PREFACTOR * res.value[0]
    error = PREFACTOR * (res.error[0] + abs(res.value[1]))
    result = CpResult(float(value), float(error), evaluations)
    if inner_failed or not res.converged:
        level = "inner wavevector" if inner_failed else "outer frequency"
        raise CpConvergenceError(
            f"Casimir-Polder {level} integral did not converge "
            f"(estimate {value:.6e}, error {error:.2e})", result)
    return result


def _check(z, stack):
    if not z > 0:
        raise ValueError(f"atom-surface distance must be positive, got {z}")


def cp_potential(atom, stack, z, spec=None):
    """Casimir-Polder potential (J) at distance ``z`` above ``stack``.

    Raises
    ------
    CpConvergenceError
        If either quadrature level misses its tolerance; ``.result`` holds
        the best estimate.
    """
    spec = spec or CpQuadratureSpec()
    _check(z, stack)
    if stack.is_vacuum:
        return CpResult(0.0, 0.0, 0)

    def reflect(pol, xi, k):
        return multilayer.stack_reflection(stack, pol, xi, k)

    return _double_integral(atom, reflect, z, spec, derivative=False)


def cp_force(atom, stack, z, spec=None):
    """Attraction magnitude ``dU/dz`` (N) toward ``stack``.

    The distance enters only through ``exp(-2 z kappa0)``, so the derivative
    is taken under the integral sign.
    """
    spec = spec or CpQuadratureSpec()
    _check(z, stack)
    if stack.is_vacuum:
        return CpResult(0.0, 0.0, 0)

    def reflect(pol, xi, k):
        return multilayer.stack_reflection(stack, pol, xi, k)

    res = _double_integral(atom, reflect, z, spec, derivative=True)
    return CpResult(-res.value, res.error_estimate, res.evaluations)


def cp_delta_force(atom, stack_with_slab, stack_without_slab, z, spec=None):
    """Change of the attraction when the deepest layer is withdrawn.

    Returns ``F(with) - F(without)`` in the attraction-magnitude convention.
    When ``stack_without_slab`` is ``stack_with_slab.truncated()`` the
    reflection difference is formed analytically before integration, so the
    result keeps full relative accuracy even when it is many orders of
    magnitude below either force. Otherwise the two reflection coefficients
    are subtracted pointwise inside a single integral.
    """
    spec = spec or CpQuadratureSpec()
    _check(z, stack_with_slab)
    if stack_with_slab == stack_without_slab:
        return CpResult(0.0, 0.0, 0)

    try:
        shift_form = (not stack_with_slab.perfect_mirror
                      and len(stack_with_slab) >= 3
                      and stack_with_slab.truncated() == stack_without_slab)
    except ValueError:
        shift_form = False

    if shift_form:
        def reflect(pol, xi, k):
            return multilayer.reflection_shift(stack_with_slab, pol, xi, k)
        magnitude = None
    else:
        def reflect(pol, xi, k):
            return (multilayer.stack_reflection(stack_with_slab, pol, xi, k)
                    - multilayer.stack_reflection(stack_without_slab, pol, xi, k))

        def magnitude(pol, xi, k):
            return (np.abs(multilayer.stack_reflection(stack_with_slab, pol, xi, k))
                    + np.abs(multilayer.stack_reflection(stack_without_slab, pol, xi, k)))

    res = _double_integral(atom, reflect, z, spec, derivative=True, magnitude=magnitude)
    return CpResult(-res.value, res.error_estimate, res.evaluations)


def retarded_mirror_potential(atom, z):
    """Large-distance perfect-mirror limit ``-3 hbar c alpha(0) / (32 pi^2 eps0 z^4)``."""
    return -3.0 * hbar * c * atom.static_polarizability / (32.0 * pi**2 * epsilon_0 * z**4)
