import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import hbar

from cpshield.casimir_polder import cp_delta_force
from cpshield.experiment import (
    CpDeltaCriterion,
    ExperimentGeometry,
    FixedForceCriterion,
    LatticeSpec,
    Materials,
    bloch_frequency,
    bloch_frequency_shift,
    criterion_force,
    exclusion_boundary,
    force_budget,
    force_for_frequency,
    is_excluded,
    recoil_energy,
    shielded_stack,
    unit_yukawa_delta,
    unshielded_stack,
    wannier_stark_width,
)
from cpshield.materials import RUBIDIUM, VACUUM
from cpshield.yukawa import REFERENCE_POINTS, YukawaParams

GEOM = ExperimentGeometry()
LATTICE = LatticeSpec()
M = RUBIDIUM.mass


@pytest.fixture(scope="module")
def budget():
    return force_budget(GEOM, RUBIDIUM)


# geometry ------------------------------------------------------------------

def test_slab_centre_distance():
    assert GEOM.Z == pytest.approx(3e-6 + 50e-9 + 5e-6 + 5e-6, rel=1e-15)
    assert GEOM.slab().Z == GEOM.Z


def test_geometry_validation():
    with pytest.raises(ValueError):
        ExperimentGeometry(z=0.0)
    with pytest.raises(ValueError):
        ExperimentGeometry(rho_Si=-1.0)


def test_stacks():
    s = shielded_stack(GEOM, Materials())
    assert len(s) == 4 and s.layers[1].thickness == GEOM.d_Au and s.layers[2].thickness == GEOM.d_vac
    assert unshielded_stack(GEOM, Materials()).layers[1].material == VACUUM


# force budget ----------------------------------------------------------------

def test_budget_rows(budget):
    expected = {f"{n}({m})" for n in REFERENCE_POINTS for m in ("Si", "Au")}
    expected |= {"CP", "CP(Si)", "N(Si)", "N(Au)", "E"}
    assert set(budget) == expected


def test_budget_delta_identities(budget):
    for name in REFERENCE_POINTS:
        assert budget[f"{name}(Si)"].delta_force == budget[f"{name}(Si)"].force
        assert budget[f"{name}(Au)"].delta_force == 0.0
    assert budget["CP(Si)"].delta_force == budget["CP(Si)"].force
    assert budget["N(Si)"].delta_force == budget["N(Si)"].force
    assert budget["N(Au)"].delta_force == 0.0
    assert budget["E"].delta_force == 0.0
    assert budget["E"].force == pytest.approx(M * 9.81, rel=1e-15)


def test_budget_cp_delta_matches_direct_call(budget):
    s = shielded_stack(GEOM, Materials())
    assert budget["CP"].delta_force == cp_delta_force(RUBIDIUM, s, s.truncated(), GEOM.z).value


def test_budget_without_slab_mass_or_yukawa():
    geom = GEOM.with_(rho_Si=0.0)
    points = {k: p.scaled(0.0) for k, p in REFERENCE_POINTS.items()}
    b = force_budget(geom, RUBIDIUM, yukawa_points=points)
    for name, row in b.items():
        if name in ("CP", "CP(Si)", "N(Au)", "E"):
            assert row.force > 0
        else:
            assert row.force == 0.0 and row.delta_force == 0.0


def test_budget_ordering_at_reference_point(budget):
    assert budget["E"].force > 10 * budget["CP"].force
    assert budget["CP"].force > 10 * max(budget["Y1(Si)"].force, budget["Y1(Au)"].force)
    assert budget["Y1(Si)"].delta_force > 10 * budget["Y2(Si)"].delta_force
    assert budget["Y2(Si)"].delta_force > 10 * abs(budget["CP"].delta_force)


def test_budget_accepts_list_of_points():
    b = force_budget(GEOM, RUBIDIUM, yukawa_points=[YukawaParams(1.0, 1e-6)])
    assert "Y1(Si)" in b.rows and "Y2(Si)" not in b.rows


def test_shield_reduces_cp_change(budget):
    assert abs(budget["CP"].delta_force) < 1e-3 * budget["CP(Si)"].delta_force


# Bloch oscillations ------------------------------------------------------------

def test_bloch_frequency_of_gravity():
    nu = bloch_frequency(M * 9.81, LATTICE)
    assert nu == pytest.approx(M * 9.81 * 500e-9 / (2 * math.pi * hbar), rel=1e-15)
    assert 1.0e3 <= nu <= 1.1e3


def test_sensitivity_force():
    f = force_for_frequency(1e-4, LATTICE)
    assert 1.2e-31 <= f <= 1.4e-31
    assert bloch_frequency(f, LATTICE) == pytest.approx(1e-4, rel=1e-14)


def test_recoil_energy():
    e_r = recoil_energy(LATTICE, M)
    assert e_r == pytest.approx((hbar * 2 * math.pi / 500e-9) ** 2 / (2 * M), rel=1e-15)
    assert e_r == pytest.approx(6.13e-30, rel=0.03)


def test_wannier_stark_width():
    w = wannier_stark_width(LATTICE, M, M * 9.81)
    assert w == pytest.approx(0.26 * recoil_energy(LATTICE, M) / (2 * M * 9.81), rel=1e-15)
    assert w == pytest.approx(0.594e-6, rel=2e-3)
    assert wannier_stark_width(LATTICE, M, 2 * M * 9.81) == pytest.approx(w / 2, rel=1e-15)


@pytest.mark.parametrize("func", [bloch_frequency, lambda f, lat: wannier_stark_width(lat, M, f)])
@pytest.mark.parametrize("force", [0.0, -1e-25])
def test_nonpositive_force_rejected(func, force):
    with pytest.raises(ValueError):
        func(force, LATTICE)


def test_lattice_validation():
    with pytest.raises(ValueError):
        LatticeSpec(spacing=0.0)
    with pytest.raises(ValueError):
        recoil_energy(LATTICE, 0.0)


@settings(max_examples=50, deadline=None)
@given(f0=st.floats(1e-30, 1e-20), f1=st.floats(-1e-30, 1e-30), f2=st.floats(-1e-30, 1e-30))
def test_shifts_are_additive(f0, f1, f2):
    total = bloch_frequency_shift(f0, f0 + f1 + f2, LATTICE)
    split = bloch_frequency_shift(f0, f0 + f1, LATTICE) + bloch_frequency_shift(f0 + f1, f0 + f1 + f2, LATTICE)
    assert total == pytest.approx(split, rel=1e-9, abs=1e-12 * abs(f0) * 500e-9 / hbar)


@settings(max_examples=50, deadline=None)
@given(f=st.floats(1e-35, 1e-20), scale=st.floats(0.1, 10.0))
def test_bloch_frequency_linear_in_force_and_spacing(f, scale):
    lat = LatticeSpec(spacing=500e-9 * scale)
    assert bloch_frequency(f, lat) == pytest.approx(scale * bloch_frequency(f, LATTICE), rel=1e-12)
    assert force_for_frequency(bloch_frequency(f, LATTICE), LATTICE) == pytest.approx(f, rel=1e-12)


# exclusion ----------------------------------------------------------------------

LAMBDAS = list(np.geomspace(0.1e-6, 10e-6, 25))


@pytest.fixture(scope="module")
def thresholds():
    return {s: criterion_force(CpDeltaCriterion(s), GEOM, RUBIDIUM) for s in (True, False)}


def test_zero_criterion_gives_zero_alpha():
    boundary = exclusion_boundary(GEOM, RUBIDIUM, Materials(), LAMBDAS, FixedForceCriterion(0.0))
    assert [a for _, a in boundary] == [0.0] * len(LAMBDAS)


def test_boundary_decreases_with_range(thresholds):
    boundary = exclusion_boundary(GEOM, RUBIDIUM, Materials(), LAMBDAS, CpDeltaCriterion(True),
                                  threshold=thresholds[True])
    alphas = [a for _, a in boundary]
    assert all(b < a for a, b in zip(alphas, alphas[1:]))


def test_shielded_boundary_below_unshielded(thresholds):
    sh = exclusion_boundary(GEOM, RUBIDIUM, Materials(), LAMBDAS, None, threshold=thresholds[True])
    un = exclusion_boundary(GEOM, RUBIDIUM, Materials(), LAMBDAS, None, threshold=thresholds[False])
    assert all(a < b for (_, a), (_, b) in zip(sh, un))


@settings(max_examples=30, deadline=None)
@given(f0=st.floats(1e-40, 1e-25), k=st.floats(0.01, 100.0))
def test_boundary_linear_in_criterion(f0, k):
    a = exclusion_boundary(GEOM, RUBIDIUM, Materials(), LAMBDAS[:5], FixedForceCriterion(f0))
    b = exclusion_boundary(GEOM, RUBIDIUM, Materials(), LAMBDAS[:5], FixedForceCriterion(k * f0))
    for (_, x), (_, y) in zip(a, b):
        assert y == pytest.approx(k * x, rel=1e-12)


def test_boundary_point_sits_on_threshold(thresholds):
    thr = thresholds[True]
    [(lam, alpha)] = exclusion_boundary(GEOM, RUBIDIUM, Materials(), [2e-6], None, threshold=thr)
    assert is_excluded(YukawaParams(alpha * 1.001, lam), thr, GEOM, M)
    assert not is_excluded(YukawaParams(alpha * 0.999, lam), thr, GEOM, M)


def test_reference_point_classes(thresholds):
    thr = thresholds[True]
    inside = {n: is_excluded(p, thr, GEOM, M) for n, p in REFERENCE_POINTS.items()}
    assert inside == {"Y1": True, "Y2": True, "Y3": False, "Y4": False}
    assert thr == pytest.approx(9.7605e-35, rel=1e-4)


def test_reference_point_classes_with_slab_at_2p5_um():
    # Closer slab: Y3 lies just inside (about 9%) the shielded region.
    geom = GEOM.with_(d_vac=2.5e-6)
    thr = criterion_force(CpDeltaCriterion(True), geom, RUBIDIUM)
    inside = {n: is_excluded(p, thr, geom, M) for n, p in REFERENCE_POINTS.items()}
    assert inside == {"Y1": True, "Y2": True, "Y3": True, "Y4": False}
    y3 = REFERENCE_POINTS["Y3"]
    margin = y3.alpha * unit_yukawa_delta(geom, M, y3.lam) / thr
    assert 1.0 < margin < 1.2


def test_grid_validation():
    with pytest.raises(ValueError):
        exclusion_boundary(GEOM, RUBIDIUM, Materials(), [2e-6, 1e-6], FixedForceCriterion(1.0))
    with pytest.raises(ValueError):
        exclusion_boundary(GEOM, RUBIDIUM, Materials(), [0.0, 1e-6], FixedForceCriterion(1.0))


def test_underflowing_points_are_dropped_with_warning():
    with pytest.warns(RuntimeWarning, match="underflows"):
        boundary = exclusion_boundary(GEOM, RUBIDIUM, Materials(), [1e-9, 1e-6], FixedForceCriterion(1e-31))
    assert [lam for lam, _ in boundary] == [1e-6]


def test_criterion_labels():
    assert CpDeltaCriterion(True).label == "cp_shielded"
    assert CpDeltaCriterion(False).label == "cp_unshielded"
    assert FixedForceCriterion(1.325e-31).label == "fixed_1.325e-31N"
