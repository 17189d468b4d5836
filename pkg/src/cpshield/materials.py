"""Dielectric response of the layers and the atomic polarizability.

Permittivities are evaluated on the imaginary frequency axis, where the
Casimir-Polder integrand lives. The real-axis response is only needed for
the skin-depth estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0, hbar, mu_0

# Gold Drude parameters. The damping rate quoted next to the Drude formula
# (4.08e13 rad/s) is used; the rounded 4e13 rad/s is available via config.
GOLD_PLASMA_FREQUENCY = 1.38e16
GOLD_DAMPING = 4.08e13
SILICON_PERMITTIVITY = 5.0

# Doped-silicon conductivity giving a ~17 um skin depth at the Rb D2 line for
# eps = 5 (0.14 Ohm cm, typical of moderately doped wafers).
SILICON_CONDUCTIVITY = 700.0

RB_DIPOLE_MOMENT = 5.05e-29
RB_TRANSITION_FREQUENCY = 2.4e15
RB_MASS = 1.4e-25

_KINDS = ("vacuum", "constant", "drude")


@dataclass(frozen=True)
class DielectricModel:
    """Relative permittivity model.

    Parameters
    ----------
    kind : {"vacuum", "constant", "drude"}
    eps_const : float
        Static permittivity for ``kind="constant"``.
    omega_p, gamma : float
        Plasma frequency and damping rate in rad/s for ``kind="drude"``.
    """

    kind: str = "vacuum"
    eps_const: float = 1.0
    omega_p: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown dielectric kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "constant" and not self.eps_const >= 1.0:
            raise ValueError(f"constant permittivity must be >= 1, got {self.eps_const}")
        if self.kind == "drude" and (self.omega_p < 0 or self.gamma < 0):
            raise ValueError("Drude parameters must be non-negative")

    @classmethod
    def vacuum(cls):
        return cls("vacuum")

    @classmethod
    def constant(cls, eps):
        return cls("constant", eps_const=float(eps))

    @classmethod
    def drude(cls, omega_p, gamma):
        return cls("drude", omega_p=float(omega_p), gamma=float(gamma))

    @property
    def is_vacuum(self):
        return (self.kind == "vacuum"
                or (self.kind == "constant" and self.eps_const == 1.0)
                or (self.kind == "drude" and self.omega_p == 0.0))

    def permittivity_imag(self, xi):
        return permittivity_imag(self, xi)

    def permittivity_real(self, omega):
        return permittivity_real(self, omega)


GOLD = DielectricModel.drude(GOLD_PLASMA_FREQUENCY, GOLD_DAMPING)
SILICON = DielectricModel.constant(SILICON_PERMITTIVITY)
VACUUM = DielectricModel.vacuum()


def permittivity_imag(model, xi):
    """Permittivity at imaginary frequency ``i*xi``.

    The Drude form ``1 + omega_p**2 / (xi * (xi + gamma))`` diverges at
    ``xi = 0``; callers integrating over frequency must use an open rule.

    Raises
    ------
    ValueError
        For a Drude model sampled at ``xi <= 0``.
    """
    xi = np.asarray(xi, dtype=float)
    if model.kind == "vacuum":
        out = np.ones_like(xi)
    elif model.kind == "constant":
        out = np.full_like(xi, model.eps_const)
    else:
        if np.any(xi <= 0):
            raise ValueError("Drude permittivity is singular at xi = 0")
        out = 1.0 + model.omega_p**2 / (xi * (xi + model.gamma))
    return out if out.ndim else float(out)


def permittivity_real(model, omega):
    """Complex permittivity at real angular frequency ``omega``."""
    omega = np.asarray(omega, dtype=float)
    if model.kind == "vacuum":
        out = np.ones_like(omega, dtype=complex)
    elif model.kind == "constant":
        out = np.full_like(omega, model.eps_const, dtype=complex)
    else:
        out = 1.0 - model.omega_p**2 / (omega * (omega + 1j * model.gamma))
    return out if out.ndim else complex(out)


def skin_depth(model, sigma, omega):
    """Skin depth ``2 sqrt(eps0 eps(omega) / mu0) / sigma`` of a conductor.

    Only meaningful when ``omega >> eps(omega) eps0 / sigma``; that regime is
    not checked. The real part of the permittivity is used.

    Raises
    ------
    ValueError
        If ``sigma <= 0`` or the permittivity has a non-positive real part.
    """
    if not sigma > 0:
        raise ValueError(f"conductivity must be positive, got {sigma}")
    eps = np.real(permittivity_real(model, omega))
    if np.any(eps <= 0):
        raise ValueError("skin-depth formula needs Re eps(omega) > 0")
    return 2.0 * np.sqrt(epsilon_0 * eps / mu_0) / sigma


@dataclass(frozen=True)
class AtomModel:
    """Two-level atom with a single dominant transition.

    Parameters
    ----------
    mu_ij : float
        Transition dipole moment (C m).
    omega_ij : float
        Transition angular frequency (rad/s).
    mass : float
        Atomic mass (kg).
    """

    mu_ij: float = RB_DIPOLE_MOMENT
    omega_ij: float = RB_TRANSITION_FREQUENCY
    mass: float = RB_MASS

    def __post_init__(self):
        for name in ("mu_ij", "omega_ij", "mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def static_polarizability(self):
        return polarizability_imag(self, 0.0)

    def polarizability_imag(self, xi):
        return polarizability_imag(self, xi)


RUBIDIUM = AtomModel()


def polarizability_imag(atom, xi):
    """Ground-state polarizability at imaginary frequency (C^2 m^2 / J)."""
    xi = np.asarray(xi, dtype=float)
    out = (2.0 / (3.0 * hbar)) * atom.omega_ij * atom.mu_ij**2 / (atom.omega_ij**2 + xi**2)
    return out if out.ndim else float(out)
