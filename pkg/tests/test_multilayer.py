import math

import mpmath as mp
import numpy as np
import pytest
from scipy.constants import c

from cpshield.materials import GOLD, SILICON, VACUUM, DielectricModel, permittivity_imag
from cpshield.multilayer import (
    TE,
    TM,
    Layer,
    LayerStack,
    compose_reflection,
    four_layer_reflection,
    fresnel_r,
    fresnel_t,
    kappa,
    reflection_shift,
    stack_reflection,
)

RNG_SEED = 20240611


def shield_stack(d_au=50e-9, d_vac=5e-6, gold=GOLD):
    return LayerStack.from_materials([VACUUM, gold, VACUUM, SILICON], [d_au, d_vac])


def random_draws(n, seed=RNG_SEED):
    rng = np.random.default_rng(seed)
    xi = 10 ** rng.uniform(11, 17, n)
    k = 10 ** rng.uniform(3, 9, n)
    eps = 10 ** rng.uniform(0, 4, (3, n))
    return xi, k, eps


# kappa ---------------------------------------------------------------------

def test_kappa_normal_incidence_vacuum():
    assert kappa(VACUUM, 2.4e15, 0.0) == pytest.approx(2.4e15 / c, rel=1e-15)


def test_kappa_static_limit():
    assert kappa(SILICON, 1e-3, 1e6) == pytest.approx(1e6, rel=1e-15)


def test_kappa_reference_value():
    # sqrt(5 (2.4e15/c)^2 + 1e14) = 2.0505e7 rad/m (2.0494e7 with c = 3e8).
    expected = math.sqrt(5 * (2.4e15 / c) ** 2 + 1e14)
    assert kappa(SILICON, 2.4e15, 1e7) == pytest.approx(expected, rel=1e-14)
    assert kappa(SILICON, 2.4e15, 1e7) == pytest.approx(2.0505e7, rel=1e-4)


# single interface ----------------------------------------------------------

@pytest.mark.parametrize("pol", [TE, TM])
def test_no_interface_no_reflection(pol):
    assert fresnel_r(pol, 3.0, 3.0, 2e6, 2e6) == 0.0
    assert fresnel_t(pol, 3.0, 3.0, 0.0) == 1.0


def test_perfect_mirror_limits():
    big = 1e30
    xi, k = 1e15, 1e6
    k0 = math.sqrt((xi / c) ** 2 + k**2)
    kj = math.sqrt(big * (xi / c) ** 2 + k**2)
    assert fresnel_r(TE, 1.0, big, k0, kj) == pytest.approx(-1.0, abs=1e-12)
    assert fresnel_r(TM, 1.0, big, k0, kj) == pytest.approx(1.0, abs=1e-12)
    assert fresnel_t(TE, 1.0, big, -1.0) == 0.0


def test_vacuum_silicon_normal_incidence():
    xi = 1e15
    k0, k5 = kappa(VACUUM, xi, 0.0), kappa(SILICON, xi, 0.0)
    s5 = math.sqrt(5)
    r_te = fresnel_r(TE, 1.0, 5.0, k0, k5)
    r_tm = fresnel_r(TM, 1.0, 5.0, k0, k5)
    assert r_te == pytest.approx((1 - s5) / (1 + s5), rel=1e-14)
    assert r_te == pytest.approx(-0.381966, abs=1e-6)
    assert r_tm == pytest.approx((5 - s5) / (5 + s5), rel=1e-14)
    assert fresnel_t(TM, 1.0, 5.0, r_tm) == pytest.approx(2 / (5 + s5), rel=1e-14)
    assert fresnel_t(TE, 1.0, 5.0, r_te) == pytest.approx(2 / (1 + s5), rel=1e-14)


def test_unknown_polarization():
    with pytest.raises(ValueError):
        fresnel_r("TX", 1.0, 2.0, 1.0, 2.0)


# composition ---------------------------------------------------------------

def test_compose_limits():
    assert compose_reflection(0.3, 1.3, 0.7, -0.3, 0.0, 1e6, 1e-6) == 0.3
    assert compose_reflection(0.3, 1.3, 0.7, -0.3, 0.5, 1e6, math.inf) == 0.3


def test_compose_singular_denominator():
    with pytest.raises(ZeroDivisionError):
        compose_reflection(0.0, 1.0, 1.0, 1.0, 1.0, 1e6, 0.0)


@pytest.mark.parametrize("pol", [TE, TM])
def test_zero_thickness_collapses_to_direct_interface(pol):
    xi, k, eps = random_draws(1000)
    kap = [np.sqrt(e * (xi / c) ** 2 + k**2) for e in eps]
    r12 = fresnel_r(pol, eps[0], eps[1], kap[0], kap[1])
    r21 = fresnel_r(pol, eps[1], eps[0], kap[1], kap[0])
    r23 = fresnel_r(pol, eps[1], eps[2], kap[1], kap[2])
    t12 = fresnel_t(pol, eps[0], eps[1], r12)
    t21 = fresnel_t(pol, eps[1], eps[0], r21)
    composed = compose_reflection(r12, t12, t21, r21, r23, kap[1], 0.0)
    direct = fresnel_r(pol, eps[0], eps[2], kap[0], kap[2])
    np.testing.assert_allclose(composed, direct, rtol=1e-10, atol=1e-15)


# stacks --------------------------------------------------------------------

def test_stack_validation():
    with pytest.raises(ValueError):
        LayerStack((Layer(VACUUM),))
    with pytest.raises(ValueError):
        LayerStack((Layer(VACUUM), Layer(GOLD, 1e-8)))
    with pytest.raises(ValueError):
        LayerStack((Layer(VACUUM), Layer(GOLD), Layer(SILICON)))
    with pytest.raises(ValueError):
        LayerStack.from_materials([VACUUM, GOLD, SILICON], [0.0])


@pytest.mark.parametrize("pol", [TE, TM])
def test_two_layer_stack_is_plain_fresnel(pol):
    stack = LayerStack.from_materials([VACUUM, SILICON], [])
    xi, k = 1e15, 3e6
    expected = fresnel_r(pol, 1.0, 5.0, kappa(VACUUM, xi, k), kappa(SILICON, xi, k))
    assert stack_reflection(stack, pol, xi, k) == expected


@pytest.mark.parametrize("pol", [TE, TM])
def test_distant_slab_leaves_isolated_shield(pol):
    xi = np.geomspace(1e12, 1e17, 30)[:, None]
    k = np.geomspace(1e4, 1e9, 30)[None, :]
    far = stack_reflection(shield_stack(d_vac=1.0), pol, xi, k)
    sheet = stack_reflection(LayerStack.from_materials([VACUUM, GOLD, VACUUM], [50e-9]), pol, xi, k)
    np.testing.assert_allclose(far, sheet, rtol=1e-12, atol=1e-300)


def test_perfect_mirror_stack():
    m = LayerStack.mirror()
    xi = np.array([1e12, 1e15])
    assert np.all(stack_reflection(m, TE, xi, 1e6) == -1.0)
    assert np.all(stack_reflection(m, TM, xi, 1e6) == 1.0)


def _random_four_layer(rng):
    eps = 10 ** rng.uniform(0, 4, 3)
    kinds = [VACUUM, DielectricModel.constant(eps[0]), DielectricModel.constant(eps[1]),
             DielectricModel.constant(eps[2])]
    if rng.uniform() < 0.5:
        kinds[1] = DielectricModel.drude(10 ** rng.uniform(14, 17), 10 ** rng.uniform(12, 14))
    d = 10 ** rng.uniform(-9, -5, 2)
    return LayerStack.from_materials(kinds, d)


@pytest.mark.parametrize("pol", [TE, TM])
def test_recursion_matches_explicit_four_layer_formula(pol):
    rng = np.random.default_rng(RNG_SEED)
    worst = 0.0
    for _ in range(1000):
        stack = _random_four_layer(rng)
        xi = 10 ** rng.uniform(11, 17)
        k = 10 ** rng.uniform(3, 9)
        a = stack_reflection(stack, pol, xi, k)
        b = four_layer_reflection(stack, pol, xi, k)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    assert worst < 1e-12


def test_explicit_formula_requires_four_layers():
    with pytest.raises(ValueError):
        four_layer_reflection(LayerStack.from_materials([VACUUM, SILICON], []), TE, 1e15, 1e6)


@pytest.mark.parametrize("pol", [TE, TM])
@pytest.mark.parametrize("stack", [shield_stack(), shield_stack(10e-9, 1e-6),
                                   LayerStack.from_materials([VACUUM, GOLD], []),
                                   LayerStack.from_materials([VACUUM, SILICON, GOLD, SILICON], [1e-7, 1e-8])])
def test_reflection_bounded_by_one(stack, pol):
    xi = np.geomspace(1e10, 1e18, 81)[:, None]
    k = np.geomspace(1e2, 1e10, 81)[None, :]
    r = stack_reflection(stack, pol, xi, k)
    assert np.all(np.isfinite(r))
    assert np.all(np.abs(r) <= 1.0 + 1e-15)


@pytest.mark.parametrize("pol", [TE, TM])
@pytest.mark.parametrize("xi,k", [(1e13, 1e5), (2.4e15, 1e7), (1e16, 1e8), (1e12, 1e4)])
def test_thicker_shield_approaches_gold_halfspace(pol, xi, k):
    half = stack_reflection(LayerStack.from_materials([VACUUM, GOLD], []), pol, xi, k)
    gaps = [abs(stack_reflection(shield_stack(d), pol, xi, k) - half)
            for d in np.geomspace(5e-9, 1e-6, 40)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


# cancellation-free difference ----------------------------------------------

def _mp_reflection(eps, d, pol, xi, k):
    """Composite reflection in 50-digit arithmetic, straight from the formulas."""
    mp.mp.dps = 50
    xi, k = mp.mpf(xi), mp.mpf(k)
    cc = mp.mpf(c)
    kap = [mp.sqrt(e * (xi / cc) ** 2 + k**2) for e in eps]

    def r(i, j):
        if pol == TE:
            return (kap[i] - kap[j]) / (kap[i] + kap[j])
        return (eps[j] * kap[i] - eps[i] * kap[j]) / (eps[j] * kap[i] + eps[i] * kap[j])

    def t(i, j):
        return 1 + r(i, j) if pol == TE else eps[i] / eps[j] * (1 + r(i, j))

    n = len(eps)
    out = r(n - 2, n - 1)
    for j in range(n - 2, 0, -1):
        s = mp.exp(-2 * kap[j] * d[j - 1])
        out = r(j - 1, j) + t(j - 1, j) * t(j, j - 1) * out * s / (1 - r(j, j - 1) * out * s)
    return out


@pytest.mark.parametrize("pol", [TE, TM])
@pytest.mark.parametrize("xi,k", [(1e13, 1e5), (1e14, 3e5), (2.4e15, 1e7)])
def test_reflection_shift_against_high_precision(pol, xi, k):
    stack = shield_stack()
    eps = [mp.mpf(float(permittivity_imag(layer.material, xi))) for layer in stack.layers]
    full = _mp_reflection(eps, [mp.mpf(50e-9), mp.mpf(5e-6)], pol, xi, k)
    trunc = _mp_reflection(eps[:3], [mp.mpf(50e-9)], pol, xi, k)
    expected = float(full - trunc)
    assert reflection_shift(stack, pol, xi, k) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize("pol", [TE, TM])
def test_reflection_shift_matches_subtraction_when_well_conditioned(pol):
    stack = LayerStack.from_materials([VACUUM, SILICON, VACUUM, SILICON], [1e-7, 2e-7])
    xi = np.geomspace(1e13, 1e16, 20)[:, None]
    k = np.geomspace(1e5, 1e7, 20)[None, :]
    naive = stack_reflection(stack, pol, xi, k) - stack_reflection(stack.truncated(), pol, xi, k)
    np.testing.assert_allclose(reflection_shift(stack, pol, xi, k), naive, rtol=1e-9, atol=1e-15)
