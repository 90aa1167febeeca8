"""Planar baselines: half-space and film energies, Hamaker constant, PFA.

Energies per unit area use the non-retarded surface-mode sum

    E_p(d) = (hbar / 4 pi^2) int_0^inf q dq int_0^inf dxi
             ln[1 - r_1(q, i xi) r_2(q, i xi) exp(-2 q d)]

with ``r = f_c`` for a half space and the finite-film reflection
``f_c (1 - e^{-2 q delta}) / (1 - f_c^2 e^{-2 q delta})``. For two half
spaces the q-integral is done in closed form,
``E_p = -(hbar / 16 pi^2 d^2) int dxi Li3(f_1 f_2)``.

Hamaker normalization. ``hamaker_constant`` returns the conventional
constant A with ``E_p = -A / (12 pi d^2)``. The coefficient that enters the
small-separation law ``E = -A12 [2 pi R1 R2/(R1+R2)]^(1-n/2) Gamma(1+n/2)
L^n d^-(1+n/2)`` is ``A12 = A / (12 pi)`` (see :func:`a12_from_hamaker`).
Forces are reported positive for attraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.constants import elementary_charge, epsilon_0, hbar, m_e
from scipy.special import bernoulli, gamma, zeta

from .dielectrics import VACUUM, DielectricModel, contrast_factor
from .errors import AccuracyError, DomainError

__all__ = [
    "PlanarPair",
    "FILM2D_COEFF",
    "polylog3",
    "halfspace_energy_per_area",
    "halfspace_force_per_area",
    "hamaker_constant",
    "a12_from_hamaker",
    "pfa_sphere_force",
    "analytic_smallsep_energy",
    "film2d_force",
    "film2d_force_reduced",
    "halfspace_film_energy_per_area",
]

FILM2D_COEFF = 0.1556


@dataclass(frozen=True)
class PlanarPair:
    """Two half spaces (or a half space and a film) a distance ``d`` apart."""

    material_1: DielectricModel
    material_2: DielectricModel
    d: float
    ambient: DielectricModel = VACUUM
    delta: float | None = None

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("separation d must be > 0")
        if self.delta is not None and self.delta < 0:
            raise DomainError("film thickness must be >= 0")


# --------------------------------------------------------------------------
# Li3 on [-1, 1]

_NLOG = 24
# zeta(3 - k) for k >= 3: zeta(0) = -1/2, zeta(-n) = -B_(n+1) / (n+1)
_ZETA_NEG = np.array([0.0, 0.0, 0.0, -0.5]
                     + [-bernoulli(k - 2)[-1] / (k - 2) for k in range(4, _NLOG)])


def _li3_pos(x):
    """Li3 for 0 <= x <= 1."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= 0.5
    xs = x[small]
    k = np.arange(1, 60)
    out[small] = np.sum(xs[:, None] ** k / k**3.0, axis=1) if xs.size else xs
    xb = x[~small]
    if xb.size:
        mu = np.log(xb)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(mu < 0, np.log(-mu), 0.0)
        val = zeta(3) + zeta(2) * mu + (1.5 - lg) * mu**2 / 2
        term = mu**2 / 2
        for j in range(3, _NLOG):
            term = term * mu / j
            val = val + _ZETA_NEG[j] * term
        out[~small] = val
    return out


def polylog3(x):
    """Trilogarithm Li3(x) for real ``-1 <= x <= 1``."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xa) > 1):
        raise DomainError("polylog3 implemented for |x| <= 1")
    out = np.empty_like(xa)
    pos = xa >= 0
    out[pos] = _li3_pos(xa[pos])
    # Li3(x) + Li3(-x) = Li3(x^2) / 4
    xn = xa[~pos]
    if xn.size:
        out[~pos] = _li3_pos(xn**2) / 4 - _li3_pos(-xn)
    return out if np.ndim(x) else float(out[0])


# --------------------------------------------------------------------------
# frequency grid


def _omega_ref(*models: DielectricModel) -> float:
    w = max(m.characteristic_frequency for m in models)
    if w == 0.0:
        raise DomainError(
            "all materials are non-dispersive; the non-retarded energy diverges")
    return w


def _log_trapezoid(f, lo: float, hi: float, step: float):
    """int_0^inf f(xi) dxi with xi = exp(s), trapezoid in s."""
    s = np.arange(lo, hi + step / 2, step)
    x = np.exp(s)
    return float(np.sum(f(x) * x) * step)


def _xi_integral(f, w_ref: float, tol: float | None = 1e-8, step: float = 0.05):
    """Trapezoid in log xi; halving the step must change the result by < tol."""
    lo, hi = math.log(w_ref) - 40.0, math.log(w_ref) + 12.0
    if tol is None:
        return _log_trapezoid(f, lo, hi, step)
    coarse = _log_trapezoid(f, lo, hi, 2 * step)
    fine = _log_trapezoid(f, lo, hi, step)
    rel = abs(fine - coarse) / max(abs(fine), 1e-300)
    if rel > tol:
        raise AccuracyError(f"xi quadrature changed by {rel:.2e} on refinement", achieved=rel)
    return fine


def _fc_product(m1, m2, amb, xi):
    return np.asarray(contrast_factor(m1, amb, xi)) * np.asarray(contrast_factor(m2, amb, xi))


def _li3_integral(m1, m2, amb) -> float:
    """int_0^inf dxi Li3(f_1 f_2) (rad/s)."""
    if all(m.is_constant for m in (m1, m2, amb)):
        if _fc_product(m1, m2, amb, 1.0) == 0:
            return 0.0
    w = _omega_ref(m1, m2, amb)
    return _xi_integral(lambda xi: polylog3(_fc_product(m1, m2, amb, xi)), w)


# --------------------------------------------------------------------------
# half spaces


def halfspace_energy_per_area(pair: PlanarPair) -> float:
    """Non-retarded interaction energy per unit area (J/m^2), < 0 for attraction."""
    return -_li3_integral(pair.material_1, pair.material_2, pair.ambient) * hbar / (
        16 * math.pi**2 * pair.d**2)


def halfspace_force_per_area(pair: PlanarPair) -> float:
    """Attractive pressure -dE_p/dd (Pa), positive for attraction."""
    return -2.0 * halfspace_energy_per_area(pair) / pair.d


def hamaker_constant(material_1: DielectricModel, material_2: DielectricModel,
                     ambient: DielectricModel = VACUUM, l_max: int = 50,
                     return_tail: bool = False):
    """Conventional Hamaker constant A (J), ``E_p = -A / (12 pi d^2)``.

    Evaluated as the series ``(3 hbar / 4 pi) sum_l l^-3 int dxi (f_1 f_2)^l``
    truncated at ``l_max``. With ``return_tail=True`` a bound on the omitted
    terms is returned as well: ``sum_{l > l_max} p^l / l^3`` is at most
    ``min(p^(l_max+1) / (1-p), 1) / (2 l_max^2)`` for ``p = |f_1 f_2|``.
    """
    if l_max < 1:
        raise DomainError("l_max must be >= 1")
    pref = 3 * hbar / (4 * math.pi)
    if all(m.is_constant for m in (material_1, material_2, ambient)):
        if _fc_product(material_1, material_2, ambient, 1.0) == 0:
            return (0.0, 0.0) if return_tail else 0.0
    w = _omega_ref(material_1, material_2, ambient)
    l = np.arange(1, l_max + 1)

    def series(xi):
        p = _fc_product(material_1, material_2, ambient, xi)
        return np.sum(p[:, None] ** l / l**3.0, axis=1)

    def tail(xi):
        p = np.abs(_fc_product(material_1, material_2, ambient, xi))
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = p ** (l_max + 1) / (1 - p)
        bound = np.where(p < 1, np.minimum(geo, 1.0), 1.0)
        return bound / (2 * l_max**2)

    A = pref * _xi_integral(series, w)
    if return_tail:
        # the bound has a kink where it saturates; no refinement check
        return A, pref * _xi_integral(tail, w, tol=None)
    return A


def a12_from_hamaker(A: float) -> float:
    """Coefficient of the small-separation law from the conventional constant."""
    return A / (12 * math.pi)


# --------------------------------------------------------------------------
# PFA and the small-separation law


def pfa_sphere_force(R: float, z: float, E_p, with_correction: bool = False) -> float:
    """Proximity force on a sphere (N), positive for attraction.

    ``E_p`` is a callable giving the planar energy per area at gap ``h``.
    The leading term is ``-2 pi R E_p(z)``; ``with_correction`` multiplies
    it by ``1 - int_z^{z+R} E_p dh / (R E_p(z))``.
    """
    if not (R > 0 and z > 0):
        raise DomainError("R and z must be > 0")
    e0 = float(E_p(z))
    lead = -2 * math.pi * R * e0
    if not with_correction or e0 == 0.0:
        return lead
    integral, _ = integrate.quad(lambda h: float(E_p(h)), z, z + R, limit=200)
    return lead * (1.0 - integral / (R * e0))


def analytic_smallsep_energy(n: int, R1: float, R2: float, L: float, d: float,
                             A12: float) -> float:
    """Small-separation energy of spheres (n=0), cylinders (1), half spaces (2).

    ``R2 = inf`` is accepted (sphere or cylinder facing a plane).
    """
    if n not in (0, 1, 2):
        raise DomainError("n must be 0 (spheres), 1 (cylinders) or 2 (half spaces)")
    if not d > 0:
        raise DomainError("d must be > 0")
    if n >= 1 and not L > 0:
        raise DomainError("length L must be > 0 for n >= 1")
    if n == 2:
        geom = 1.0
    else:
        if not (R1 > 0 and R2 > 0):
            raise DomainError("radii must be > 0")
        r_eff = R1 if math.isinf(R2) else (R2 if math.isinf(R1) else R1 * R2 / (R1 + R2))
        geom = (2 * math.pi * r_eff) ** (1 - n / 2)
    Ln = L**n if n else 1.0
    return -A12 * geom * gamma(1 + n / 2) * Ln * d ** (-(1 + n / 2))


# --------------------------------------------------------------------------
# films


def _sheet_energy_scale(drude: DielectricModel | None, n_density: float | None) -> float:
    """sqrt(n hbar^2 e^2 / m_e) in Gaussian units, i.e. hbar omega_p / sqrt(4 pi) (J)."""
    if (drude is None) == (n_density is None):
        raise DomainError("give exactly one of drude= or n_density=")
    if drude is not None:
        if drude.kind != "drude":
            raise DomainError("film model must be a Drude metal")
        wp = drude.omega_p
    else:
        if not n_density > 0:
            raise DomainError("electron density must be > 0")
        wp = math.sqrt(n_density * elementary_charge**2 / (epsilon_0 * m_e))
    return hbar * wp / math.sqrt(4 * math.pi)


def film2d_force_reduced(delta_over_R: float, d_over_R: float) -> float:
    """R F / (hbar omega_p) of a thin metal film (2D plasma) over a metal."""
    if not (delta_over_R > 0 and d_over_R > 0):
        raise DomainError("delta/R and d/R must be > 0")
    return FILM2D_COEFF / math.sqrt(4 * math.pi) * math.sqrt(delta_over_R) / d_over_R**2.5


def film2d_force(R: float, d: float, delta: float, drude: DielectricModel | None = None,
                 n_density: float | None = None) -> float:
    """R F (J = N m) for a 2D film of thickness delta on a sphere of radius R.

    ``n_density`` (m^-3) may replace ``drude``; then omega_p follows from
    omega_p^2 = n e^2 / (eps_0 m_e).
    """
    if not (R > 0 and d > 0 and delta > 0):
        raise DomainError("R, d and delta must be > 0")
    scale = _sheet_energy_scale(drude, n_density)
    return FILM2D_COEFF * scale * math.sqrt(delta / R) / (d / R) ** 2.5


def halfspace_film_energy_per_area(d: float, delta: float, film: DielectricModel,
                                   halfspace: DielectricModel,
                                   ambient: DielectricModel = VACUUM,
                                   tol: float = 1e-6) -> float:
    """Energy per area (J/m^2) between a half space and a film of thickness delta."""
    if not d > 0:
        raise DomainError("d must be > 0")
    if delta < 0:
        raise DomainError("film thickness must be >= 0")
    if delta == 0:
        return 0.0
    w = _omega_ref(film, halfspace, ambient)
    # x = 2 q d, so q dq = x dx / (4 d^2); both integrals trapezoid in log
    ratio = delta / d

    def energy(step):
        t = np.arange(-30.0, math.log(60.0) + step / 2, step)
        x = np.exp(t)
        s = np.arange(math.log(w) - 40.0, math.log(w) + 12.0 + step / 2, step)
        xi = np.exp(s)
        ff = np.asarray(contrast_factor(film, ambient, xi))[:, None]
        fh = np.asarray(contrast_factor(halfspace, ambient, xi))[:, None]
        em1 = -np.expm1(-x * ratio)[None, :]      # 1 - exp(-2 q delta)
        den = (1 - ff**2) + ff**2 * em1
        with np.errstate(invalid="ignore", divide="ignore"):
            rf = np.where(den > 0, ff * em1 / den, 1.0)
        integrand = np.log1p(-fh * rf * np.exp(-x)[None, :])
        inner = (integrand * (x * x)[None, :]).sum(axis=1) * step
        return float(np.sum(inner * xi) * step)

    fine, coarse = energy(0.05), energy(0.1)
    rel = abs(fine - coarse) / max(abs(fine), 1e-300)
    if rel > tol:
        raise AccuracyError(f"film quadrature changed by {rel:.2e} on refinement", achieved=rel)
    return hbar / (4 * math.pi**2) * fine / (4 * d**2)
