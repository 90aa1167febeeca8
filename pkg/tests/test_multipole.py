from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from scipy.constants import hbar

from vdwmodes import multipole as mp
from vdwmodes.dielectrics import VACUUM, DielectricModel, gold, polystyrene
from vdwmodes.errors import (ConvergenceWarning, DomainError, NumericalError,
                             ResonanceError)
from vdwmodes.pfa import PlanarPair, halfspace_energy_per_area
from vdwmodes.quadrature import QuadSpec

DIPOLE = mp.Truncation(L_max=1, m_max=1, bandwidth=0)


def dipole_shifts(z, fc):
    """Hand-derived dipole resonances over an image plane (m = 0, m = +-1)."""
    D3 = (2 * (1 + z)) ** 3
    return 1 / 3 - fc * (2 / 3) / D3, 1 / 3 - fc * (1 / 3) / D3


# ------------------------------------------------------------------ response

def test_depolarization_values():
    assert mp.depolarization(1) == pytest.approx(1 / 3)
    assert mp.depolarization(2) == pytest.approx(2 / 5)
    assert mp.depolarization(50) == pytest.approx(50 / 101)
    with pytest.raises(DomainError):
        mp.depolarization(0)


def test_homogeneous_polarizability_conductor():
    a = 1.7
    assert mp.homogeneous_polarizability(1, a, 0.0) == pytest.approx(a**3)
    assert mp.homogeneous_polarizability(2, a, 0.0) == pytest.approx(a**5)
    assert abs(mp.homogeneous_polarizability(1, a, -1e12)) < 1e-11
    with pytest.raises(ResonanceError):
        mp.homogeneous_polarizability(1, a, 1 / 3)


def _u(x, y):
    return 1 / (1 - x / y)


@pytest.mark.parametrize("l", [1, 2, 5])
def test_coated_polarizability_limits(l):
    ei, ec, ea = 2.5, 7.0, 1.3
    hom = lambda e: mp.homogeneous_polarizability(l, 1.0, _u(e, ea))
    args = (_u(ei, ec), _u(ea, ec), _u(ec, ea))
    assert mp.coated_polarizability(l, 1.0, 1.0, *args) == pytest.approx(hom(ec), rel=1e-12)
    assert mp.coated_polarizability(l, 1.0, 0.0, *args) == pytest.approx(hom(ei), rel=1e-9)
    same = (_u(ec * (1 + 1e-9), ec), _u(ea, ec), _u(ec, ea))
    assert mp.coated_polarizability(l, 1.0, 0.3, *same) == pytest.approx(hom(ec), rel=1e-6)
    with pytest.raises(DomainError):
        mp.coated_polarizability(l, 1.0, 1.5, *args)


def test_sphere_polarizability_units_of_R():
    s = mp.SphereSystem.solid(1e-8, 1e-8, gold(), gold())
    a = mp.sphere_polarizabilities(s, [1e10, 1e20], [1, 2])
    # near-static metal: alpha_l / R^(2l+1) -> 1; far above omega_p -> 0
    np.testing.assert_allclose(a[0], 1.0, rtol=1e-6)
    assert np.all(np.abs(a[1]) < 1e-6)


# ------------------------------------------------------------------ geometry

def test_system_validation():
    g = gold()
    with pytest.raises(DomainError):
        mp.SphereSystem(0.0, 0.0, 1.0, g, g, g)
    with pytest.raises(DomainError):
        mp.SphereSystem(1.0, 2.0, 1.0, g, g, g)
    with pytest.raises(DomainError):
        mp.SphereSystem.solid(1.0, 0.0, g, g)
    with pytest.raises(DomainError):
        mp.SphereSystem.solid(1.0, 1.0, VACUUM, DielectricModel.constant(2.0)).omega_ref


@pytest.mark.parametrize("z", [0.1, 1.0, 3.0])
def test_dipole_block_by_hand(z):
    b0, b1 = mp.coupling_matrix(0, 1, z), mp.coupling_matrix(1, 1, z)
    n_perp, n_par = dipole_shifts(z, 1.0)
    assert b0.H(1.0)[0, 0] == pytest.approx(n_perp, rel=1e-14)
    assert b1.H(1.0)[0, 0] == pytest.approx(n_par, rel=1e-14)
    assert b0.H(1.0)[0, 0] < 1 / 3


def test_coupling_symmetric_and_decaying():
    for m in (0, 3):
        A = mp.coupling_matrix(m, 12, 0.2).A
        np.testing.assert_array_equal(A, A.T)
    for m in (0, 1, 5):
        assert np.abs(mp.coupling_matrix(m, 10, 1e6).A).max() < 1e-15
    with pytest.raises(DomainError):
        mp.coupling_matrix(3, 2, 1.0)
    with pytest.raises(DomainError):
        mp.coupling_matrix(0, 2, 0.0)


def test_coupling_overflow_free():
    A = mp.coupling_matrix(0, 128, 0.01).A
    assert np.all(np.isfinite(A))


# ------------------------------------------------------------------ spectra

def _const_system(z, eps=3.0):
    return mp.SphereSystem.solid(1.0, z, DielectricModel.drude(1.0),
                                 DielectricModel.constant(eps))


def test_decoupled_spectrum_multiplicities():
    spec = mp.spectral_modes(_const_system(1e6, 1e9), 5)
    vals = spec.with_multiplicity()
    expect = np.sort(np.concatenate([[l / (2 * l + 1)] * (2 * l + 1) for l in range(1, 6)]))
    np.testing.assert_allclose(vals, expect, atol=1e-10)


def test_zero_contrast_spectrum_exact():
    spec = mp.spectral_modes(_const_system(0.05, 1.0), 6)
    for m in range(7):
        l = np.arange(max(m, 1), 7)
        np.testing.assert_array_equal(np.sort(spec.values(m)), l / (2 * l + 1))
        np.testing.assert_array_equal(spec.values(-m), spec.values(m))


def test_lowest_mode_softens_as_gap_closes():
    lows = [mp.spectral_modes(_const_system(z), 20, contrast=1.0).values(0).min()
            for z in (1.0, 0.5, 0.1)]
    assert lows[0] < 1 / 3
    assert lows[0] > lows[1] > lows[2]


@pytest.mark.parametrize("z", [0.05, 0.1, 0.5, 2.0])
def test_modes_bracketed(z):
    n = mp.spectral_modes(_const_system(z), 16, contrast=1.0).with_multiplicity()
    assert np.all((n > 0) & (n < 1))


def test_spectral_modes_need_constant_contrast(au):
    with pytest.raises(DomainError):
        mp.spectral_modes(mp.SphereSystem.solid(1.0, 1.0, au, au), 4)
    coated = mp.SphereSystem(1.0, 0.5, 1.0, polystyrene(), au, au)
    with pytest.raises(DomainError):
        mp.spectral_modes(coated, 4, contrast=1.0)


# ------------------------------------------------------------------ determinant

def test_log_g_dipole_by_hand(au):
    R, z = 1e-8, 0.5
    s = mp.SphereSystem.solid(R, z * R, au, au)
    xi = au.omega_p
    eps = au(xi)
    alpha = (1 / 3) * (eps - 1) / (eps / 3 + 2 / 3)
    fc = (eps - 1) / (eps + 1)
    D3 = (2 * (1 + z)) ** 3
    expect = math.log(1 - 2 * fc * alpha / D3) + 2 * math.log(1 - fc * alpha / D3)
    got = mp.log_G_normalized(s, xi, truncation=DIPOLE)
    assert got == pytest.approx(expect, rel=1e-13)
    assert got < 0


def test_log_g_limits(au):
    far = mp.SphereSystem.solid(1e-8, 1e-2, au, au)
    assert abs(mp.log_G_normalized(far, au.omega_p, L_max=8)) < 1e-12
    free = mp.SphereSystem.solid(1e-8, 1e-9, au, VACUUM)
    assert mp.log_G_normalized(free, au.omega_p, L_max=8) == 0.0
    with pytest.raises(DomainError):
        mp.log_G_normalized(far, 0.0)


# ------------------------------------------------------------------ energies

def test_dipole_energy_closed_form():
    """Constant-contrast substrate: U = (hbar wp / 2) sum (sqrt n - sqrt n0)."""
    wp, z, fc = 1e16, 0.3, 0.5
    s = mp.SphereSystem.solid(1e-8, z * 1e-8, DielectricModel.drude(wp),
                              DielectricModel.constant(3.0))
    n_perp, n_par = dipole_shifts(z, fc)
    exact = 0.5 * hbar * wp * (math.sqrt(n_perp) + 2 * math.sqrt(n_par) - 3 * math.sqrt(1 / 3))
    assert mp.energy_mode_sum(s, 1) == pytest.approx(exact, rel=1e-12)
    ap = mp.energy_argument_principle(s, quad=QuadSpec(32, 1e-10), truncation=DIPOLE)
    assert ap == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 5.0])
def test_mode_sum_matches_argument_principle(au0, z):
    s = mp.SphereSystem.solid(1e-8, z * 1e-8, au0, au0)
    full = mp.Truncation(16, 16, 15)
    ms = mp.energy_mode_sum(s, 16)
    ap = mp.energy_argument_principle(s, quad=QuadSpec(64, 1e-9), truncation=full)
    assert ms < 0
    assert abs(ms - ap) / abs(ap) < 1e-3


def test_mode_sum_decoupled_and_no_contrast(au0):
    far = mp.SphereSystem.solid(1e-8, 1e-2, au0, au0)
    assert abs(mp.energy_mode_sum(far, 6)) < 1e-12 * hbar * au0.omega_p
    s = mp.SphereSystem.solid(1e-8, 1e-9, au0, VACUUM)
    assert mp.energy_mode_sum(s, 6) == 0.0


def test_mode_sum_domain(au):
    with pytest.raises(DomainError):
        mp.energy_mode_sum(mp.SphereSystem.solid(1e-8, 1e-9, au, au), 4)
    with pytest.raises(DomainError):
        mp.energy_mode_sum(mp.SphereSystem(1e-8, 5e-9, 1e-9, polystyrene(), au, au), 4)


def test_mode_sum_negative_mode_reported(monkeypatch):
    real = mp.coupling_matrix

    def inflated(m, L_max, z):
        b = real(m, L_max, z)
        return mp.CouplingBlock(b.m, b.L_max, 1e3 * b.A, b.c, b.n0)

    monkeypatch.setattr(mp, "coupling_matrix", inflated)
    s = mp.SphereSystem.solid(1.0, 0.1, DielectricModel.drude(1.0),
                              DielectricModel.constant(1e12))
    with pytest.raises(NumericalError, match="block m="):
        mp.energy_mode_sum(s, 8)


def test_argument_principle_far_limit(au):
    s = mp.SphereSystem.solid(1e-8, 1e-2, au, au)
    assert abs(mp.multipole_energy(s).reduced) < 1e-12


@pytest.mark.parametrize("z", [0.1, 1.0, 10.0])
def test_coat_equal_R_is_solid_gold(au, z):
    R = 1e-8
    coated = mp.SphereSystem(R, R, z * R, polystyrene(), au, au)
    solid = mp.SphereSystem.solid(R, z * R, au, au)
    q = QuadSpec(32, None)
    a = mp.energy_argument_principle(coated, quad=q)
    b = mp.energy_argument_principle(solid, quad=q)
    assert a == pytest.approx(b, rel=1e-6)


def test_coat_zero_is_solid_core(au):
    R, ps = 1e-8, polystyrene()
    q = QuadSpec(32, None)
    a = mp.energy_argument_principle(mp.SphereSystem(R, 0.0, R, ps, au, au), quad=q)
    b = mp.energy_argument_principle(mp.SphereSystem.solid(R, R, ps, au), quad=q)
    assert a == pytest.approx(b, rel=1e-6)


def test_universal_reduced_units(au):
    q = QuadSpec(32, None)
    r = [mp.multipole_energy(mp.SphereSystem.shell(R, 0.05 * R, 0.3 * R, au, au), quad=q).reduced
         for R in (1e-8, 3.7e-7)]
    assert r[0] == pytest.approx(r[1], rel=1e-10)


def test_energy_negative_and_force_attractive(au):
    R = 1e-8
    q = QuadSpec(16, None)
    zs = [0.01, 0.1, 1.0, 10.0]
    U = [mp.energy_argument_principle(mp.SphereSystem.solid(R, z * R, au, au), quad=q)
         for z in zs]
    assert all(u < 0 for u in U)
    assert all(abs(a) > abs(b) for a, b in zip(U, U[1:]))
    for z in (0.1, 3.0):
        assert mp.force(mp.SphereSystem.solid(R, z * R, au, au), quad=q) > 0


def test_force_matches_energy_slope(au):
    R, z = 1e-8, 0.5
    q = QuadSpec(32, None)
    s = mp.SphereSystem.solid(R, z * R, au, au)
    t = mp.auto_truncation(z)
    e = [mp.multipole_energy(s.with_gap(z * R * (1 + k)), quad=q, truncation=t).energy
         for k in (-0.01, 0.01)]
    fd = (e[1] - e[0]) / (0.02 * z * R)
    assert mp.force(s, quad=q) == pytest.approx(fd, rel=1e-4)


def test_pfa_limit_small_gap(au):
    """Solid sphere at d = 3e-3 R: F within 10% of -2 pi R E_p(d)."""
    R, d = 1e-8, 3e-3 * 1e-8
    F = mp.force(mp.SphereSystem.solid(R, d, au, au), quad=QuadSpec(16, None))
    pfa = -2 * math.pi * R * halfspace_energy_per_area(PlanarPair(au, au, d))
    assert abs(F / pfa - 1) < 0.1


# ------------------------------------------------------------------ truncation

def test_auto_truncation_shape():
    t = mp.auto_truncation(1.0, tol=1e-4)
    assert t.L_max == max(8, math.ceil(math.log(1e4) / (2 * math.log(2))))
    assert t.bandwidth <= t.L_max - 1
    assert mp.auto_truncation(1e-3).L_max > mp.auto_truncation(1e-2).L_max
    assert mp.auto_truncation(1e-9, L_cap=100).L_max == 100


def test_banded_engine_matches_dense(au):
    s = mp.SphereSystem.solid(1e-8, 0.05e-8, au, au)
    L = 40
    dense = mp.Truncation(L, L, L - 1)
    band = mp.auto_truncation(0.05, L_max=L)
    x = [0.3 * au.omega_p, au.omega_p]
    np.testing.assert_allclose(mp.log_G_normalized(s, x, truncation=band),
                               mp.log_G_normalized(s, x, truncation=dense), rtol=1e-6)


def test_far_field_converges_quickly(au):
    s = mp.SphereSystem.solid(1e-8, 1e-7, au, au)
    q = QuadSpec(32, None)
    e4 = mp.energy_argument_principle(s, quad=q, truncation=mp.Truncation(4, 4, 3))
    e64 = mp.energy_argument_principle(s, quad=q, truncation=mp.Truncation(64, 64, 63))
    assert abs(e4 / e64 - 1) < 1e-4
    U, L, rel = mp.converge_Lmax(s, 1e-4)
    assert rel < 1e-4 and L <= 8


def test_converge_self_consistent(au):
    s = mp.SphereSystem.solid(1e-8, 1e-8, au, au)
    U, L, rel = mp.converge_Lmax(s, 1e-4)
    ref, _, _ = mp.converge_Lmax(s, 1e-12, L_start=64, L_cap=64)
    assert abs(U / ref - 1) < 1e-4


def test_converge_cap_warns(au):
    s = mp.SphereSystem.solid(1e-8, 1e-10, au, au)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        U, L, rel = mp.converge_Lmax(s, 1e-6, L_cap=16)
    assert L == 16 and rel > 1e-6
    assert any(issubclass(w.category, ConvergenceWarning) for w in caught)
    with pytest.raises(DomainError):
        mp.converge_Lmax(s, 0.0)
