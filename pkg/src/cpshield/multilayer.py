"""Planar multilayer reflection coefficients on the imaginary frequency axis.

At ``omega = i*xi`` the normal wavevector in layer ``j`` becomes
``beta_j = i*kappa_j`` with ``kappa_j = sqrt(eps_j(i xi) xi^2 / c^2 + k^2)``
real and positive, so every coefficient below is real and the propagation
phase ``exp(2 i beta_j d_j)`` turns into the decay ``exp(-2 kappa_j d_j)``.

All functions broadcast over ``xi`` and ``k_par`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c

from .materials import VACUUM, DielectricModel, permittivity_imag

TE = "TE"
TM = "TM"
POLARIZATIONS = (TE, TM)

_SINGULAR = 1e-14


@dataclass(frozen=True)
class Layer:
    material: DielectricModel
    thickness: float = math.inf

    @property
    def semi_infinite(self):
        return math.isinf(self.thickness)


@dataclass(frozen=True)
class LayerStack:
    """Layers ordered from the atom side downwards.

    The first and last layers are semi-infinite, all others finite. A
    ``perfect_mirror`` stack ignores its layers and reflects with
    ``r_TE = -1``, ``r_TM = +1`` exactly.
    """

    layers: tuple
    perfect_mirror: bool = False

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.perfect_mirror:
            return
        if len(self.layers) < 2:
            raise ValueError("a layer stack needs at least two layers")
        if not (self.layers[0].semi_infinite and self.layers[-1].semi_infinite):
            raise ValueError("outermost layers must be semi-infinite")
        for layer in self.layers[1:-1]:
            if layer.semi_infinite or not layer.thickness > 0:
                raise ValueError(f"interior layer needs a finite positive thickness, got {layer.thickness}")

    @classmethod
    def mirror(cls):
        return cls((Layer(VACUUM),), perfect_mirror=True)

    @classmethod
    def from_materials(cls, materials, thicknesses):
        """Build from ``n`` materials and the ``n - 2`` interior thicknesses."""
        materials = list(materials)
        thicknesses = list(thicknesses)
        if len(thicknesses) != len(materials) - 2:
            raise ValueError("need one thickness per interior layer")
        inner = [Layer(m, d) for m, d in zip(materials[1:-1], thicknesses)]
        return cls((Layer(materials[0]), *inner, Layer(materials[-1])))

    def __len__(self):
        return len(self.layers)

    def truncated(self):
        """The stack with its last layer removed (pushed to infinity)."""
        if self.perfect_mirror or len(self.layers) < 3:
            raise ValueError("truncation needs a stack of at least three layers")
        last = replace(self.layers[-2], thickness=math.inf)
        return LayerStack((*self.layers[:-2], last))

    @property
    def is_vacuum(self):
        return not self.perfect_mirror and all(layer.material.is_vacuum for layer in self.layers)


def kappa(material, xi, k_par):
    """Decay constant normal to the layers, ``sqrt(eps xi^2/c^2 + k^2)``."""
    eps = permittivity_imag(material, xi)
    return np.sqrt(eps * (np.asarray(xi) / c) ** 2 + np.asarray(k_par) ** 2)


def fresnel_r(polarization, eps_i, eps_j, kappa_i, kappa_j):
    """Single-interface reflection from medium ``i`` into medium ``j``."""
    if polarization == TE:
        return (kappa_i - kappa_j) / (kappa_i + kappa_j)
    if polarization == TM:
        return (eps_j * kappa_i - eps_i * kappa_j) / (eps_j * kappa_i + eps_i * kappa_j)
    raise ValueError(f"unknown polarization {polarization!r}")


def fresnel_t(polarization, eps_i, eps_j, r_ij):
    if polarization == TE:
        return 1.0 + r_ij
    if polarization == TM:
        return (eps_i / eps_j) * (1.0 + r_ij)
    raise ValueError(f"unknown polarization {polarization!r}")


def compose_reflection(r_ij, t_ij, t_ji, r_ji, r_jk, kappa_j, d_j):
    """Reflection of interface ``ij`` backed by layer ``j`` of thickness ``d_j``.

    ``r_jk`` is the reflection seen from inside ``j`` at its far side (itself
    possibly a composite).

    Raises
    ------
    ZeroDivisionError
        If the multiple-reflection denominator vanishes, which passive media
        cannot produce.
    """
    decay = np.exp(-2.0 * kappa_j * d_j)
    denom = 1.0 - r_ji * r_jk * decay
    if np.any(np.abs(denom) < _SINGULAR):
        raise ZeroDivisionError("singular multilayer denominator; check layer inputs")
    return r_ij + t_ij * t_ji * r_jk * decay / denom


def _layer_data(stack, xi, k_par):
    eps = [np.asarray(permittivity_imag(layer.material, xi)) for layer in stack.layers]
    kap = [np.sqrt(e * (xi / c) ** 2 + k_par**2) for e in eps]
    return eps, kap


def _interface(polarization, eps, kap, i, j):
    r_ij = fresnel_r(polarization, eps[i], eps[j], kap[i], kap[j])
    r_ji = fresnel_r(polarization, eps[j], eps[i], kap[j], kap[i])
    t_ij = fresnel_t(polarization, eps[i], eps[j], r_ij)
    t_ji = fresnel_t(polarization, eps[j], eps[i], r_ji)
    return r_ij, r_ji, t_ij, t_ji


def _mirror_value(polarization, xi, k_par):
    shape = np.broadcast(np.asarray(xi), np.asarray(k_par)).shape
    return np.full(shape, -1.0 if polarization == TE else 1.0)


def stack_reflection(stack, polarization, xi, k_par):
    """Reflection coefficient of the whole stack seen from the first layer.

    Interfaces are folded in from the bottom up, each step applying
    :func:`compose_reflection`.
    """
    xi = np.asarray(xi, dtype=float)
    k_par = np.asarray(k_par, dtype=float)
    if stack.perfect_mirror:
        return _mirror_value(polarization, xi, k_par)
    eps, kap = _layer_data(stack, xi, k_par)
    n = len(stack.layers)
    r = fresnel_r(polarization, eps[n - 2], eps[n - 1], kap[n - 2], kap[n - 1])
    for j in range(n - 2, 0, -1):
        r_ij, r_ji, t_ij, t_ji = _interface(polarization, eps, kap, j - 1, j)
        r = compose_reflection(r_ij, t_ij, t_ji, r_ji, r, kap[j], stack.layers[j].thickness)
    return r


def reflection_shift(stack, polarization, xi, k_par):
    """``r(stack) - r(stack.truncated())`` without subtractive cancellation.

    Each composition step is a Moebius map ``g(x)``, so the difference
    ``g(a) - g(b)`` is propagated in closed form.
    """
    xi = np.asarray(xi, dtype=float)
    k_par = np.asarray(k_par, dtype=float)
    if stack.perfect_mirror or len(stack.layers) < 3:
        raise ValueError("reflection shift needs a stack of at least three layers")
    eps, kap = _layer_data(stack, xi, k_par)
    n = len(stack.layers)
    a = fresnel_r(polarization, eps[n - 2], eps[n - 1], kap[n - 2], kap[n - 1])
    b = np.zeros_like(a)
    delta = a
    for j in range(n - 2, 0, -1):
        r_ij, r_ji, t_ij, t_ji = _interface(polarization, eps, kap, j - 1, j)
        decay = np.exp(-2.0 * kap[j] * stack.layers[j].thickness)
        den_a = 1.0 - r_ji * a * decay
        den_b = 1.0 - r_ji * b * decay
        delta = t_ij * t_ji * decay * delta / (den_a * den_b)
        a = r_ij + t_ij * t_ji * a * decay / den_a
        b = r_ij + t_ij * t_ji * b * decay / den_b
    return delta


def four_layer_reflection(stack, polarization, xi, k_par):
    """Explicit closed form of the four-layer reflection coefficient.

    Written out term by term rather than by recursion; serves as a cross-check
    of :func:`stack_reflection`.
    """
    if stack.perfect_mirror or len(stack.layers) != 4:
        raise ValueError("the explicit formula applies to four-layer stacks only")
    xi = np.asarray(xi, dtype=float)
    k_par = np.asarray(k_par, dtype=float)
    eps, kap = _layer_data(stack, xi, k_par)

    def r(i, j):
        return fresnel_r(polarization, eps[i], eps[j], kap[i], kap[j])

    r12, r21, r23, r32, r34 = r(0, 1), r(1, 0), r(1, 2), r(2, 1), r(2, 3)
    s2 = np.exp(-2.0 * kap[1] * stack.layers[1].thickness)
    s3 = np.exp(-2.0 * kap[2] * stack.layers[2].thickness)
    inner = s3 * (r32 + 1.0) * r34 + r23 * (1.0 + s3 * r34)
    num = s2 * (r12 + 1.0) * (r21 + 1.0) * inner
    den = s3 * r32 * r34 + s2 * r21 * inner - 1.0
    return r12 - num / den
