"""Multipolar surface-mode method for a (coated) sphere above a substrate.

The sphere of radius ``R`` has its centre at height ``h = R + z`` above the
planar substrate; the substrate is represented by an image sphere at
``-h`` whose multipoles are mirrored and weighted by the contrast factor
``f_c``. For every azimuthal index ``m`` the multipole moments obey a
linear system whose determinant vanishes at the coupled surface-plasmon
frequencies. Energies are obtained either

* from the determinant on the imaginary axis (argument principle):
  ``U = hbar/(2 pi) int_0^inf dxi sum_m log det[1 - X_m(i xi)]``; or
* by summing zero-point shifts of explicitly computed modes, which is
  possible when the sphere is an undamped Drude metal in vacuum.

All internal lengths are in units of ``R`` and all frequencies in units of
``SphereSystem.omega_ref``, so reduced energies ``U / (hbar omega_ref)``
depend on ``z/R`` and ``delta/R`` only.

Coupling convention. With ``D = 2h/R`` and ``K_ll' = (l+l')! /
sqrt((l+m)!(l-m)!(l'+m)!(l'-m)!)``, the symmetrized block is

    A^m_ll' = -(-1)^(l+l') sqrt(c_l c_l') K_ll' / D^(l+l'+1),
    c_l = l / (2l+1),   H^m = diag(n_l) + f_c A^m.

Internally the sign pattern ``(-1)^(l+l')`` is removed by the similarity
``diag((-1)^l)``, which leaves determinants and eigenvalues untouched.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
from scipy.constants import hbar
from scipy.special import gammaln

from .dielectrics import VACUUM, DielectricModel, contrast_factor, eval_epsilon
from .errors import ConvergenceWarning, DomainError, NumericalError, ResonanceError
from .quadrature import QuadSpec, half_line_rule, integrate_half_line

__all__ = [
    "SphereSystem",
    "CouplingBlock",
    "ModeSpectrum",
    "Truncation",
    "MultipoleEnergy",
    "depolarization",
    "homogeneous_polarizability",
    "coated_polarizability",
    "coupling_matrix",
    "spectral_modes",
    "auto_truncation",
    "sphere_polarizabilities",
    "log_G_normalized",
    "multipole_energy",
    "energy_argument_principle",
    "energy_mode_sum",
    "force",
    "converge_Lmax",
]


# --------------------------------------------------------------------------
# geometry and materials


@dataclass(frozen=True)
class SphereSystem:
    """Coated sphere above a substrate. Lengths in metres.

    ``delta`` is the coat thickness: ``delta == R`` is a solid sphere of
    the coat material, ``delta == 0`` a solid sphere of the core material.
    """

    R: float
    delta: float
    z: float
    core: DielectricModel
    coat: DielectricModel
    substrate: DielectricModel
    ambient: DielectricModel = VACUUM

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError("sphere radius must be > 0")
        if not 0 <= self.delta <= self.R:
            raise DomainError("coat thickness must lie in [0, R]")
        if not self.z > 0:
            raise DomainError("gap z must be > 0")

    @classmethod
    def solid(cls, R, z, material, substrate, ambient=VACUUM):
        return cls(R, R, z, material, material, substrate, ambient)

    @classmethod
    def shell(cls, R, delta, z, coat, substrate, ambient=VACUUM):
        """Empty shell: the core is filled with the ambient medium."""
        return cls(R, delta, z, ambient, coat, substrate, ambient)

    def with_gap(self, z) -> "SphereSystem":
        return replace(self, z=z)

    @property
    def z_over_R(self) -> float:
        return self.z / self.R

    @property
    def is_homogeneous(self) -> bool:
        return self.delta in (0.0, self.R) or self.core == self.coat

    @property
    def sphere_material(self) -> DielectricModel:
        """Material of a homogeneous sphere."""
        if not self.is_homogeneous:
            raise DomainError("coated sphere has no single material")
        return self.core if self.delta == 0.0 else self.coat

    @property
    def omega_ref(self) -> float:
        """Frequency unit (rad/s): the fastest dispersion among the materials."""
        models = [self.coat, self.substrate, self.ambient]
        if self.delta < self.R:
            models.append(self.core)
        w = max(mod.characteristic_frequency for mod in models)
        if w == 0.0:
            raise DomainError(
                "all materials are non-dispersive; the non-retarded energy diverges")
        return w


# --------------------------------------------------------------------------
# single-sphere response


def depolarization(l):
    """Sphere depolarization factor n_l = l / (2l + 1)."""
    la = np.asarray(l)
    if np.any(la < 1):
        raise DomainError("multipole order l must be >= 1")
    out = la / (2.0 * la + 1.0)
    return out if out.ndim else float(out)


def homogeneous_polarizability(l, a, u):
    """alpha_l = -c_l / (u - n_l) with c_l = l a^(2l+1) / (2l+1)."""
    n = depolarization(l)
    c = n * np.power(float(a), 2 * np.asarray(l) + 1)
    den = np.asarray(u) - n
    if np.any(den == 0):
        raise ResonanceError("u equals n_l: sphere resonance")
    return -c / den


def coated_polarizability(l, R, delta, u_ic, u_ac, u_ca):
    """Multipole polarizability of a sphere of radius R with a coat delta.

    ``u_xy = 1 / (1 - eps_x / eps_y)`` with i = core, c = coat, a = ambient.
    ``delta = R`` gives the homogeneous coat-material sphere (u = u_ca) and
    ``delta = 0`` the homogeneous core sphere.
    """
    if not 0 <= delta <= R:
        raise DomainError("coat thickness must lie in [0, R]")
    l = np.asarray(l)
    n = depolarization(l)
    x = np.exp((2 * l + 1) * np.log1p(-delta / R)) if delta < R else np.zeros_like(n)
    num = (n - u_ic) - (n - u_ac) * x
    den = (n - u_ic) * (n - u_ca) + n * (1 - n) * x
    if np.any(den == 0):
        raise ResonanceError("coated-sphere polarizability pole")
    return n * np.power(float(R), 2 * l + 1) * num / den


def _u(x, y):
    return 1.0 / (1.0 - x / y)


def sphere_polarizabilities(system: SphereSystem, xi, l):
    """alpha_l(i xi) in units of R^(2l+1); shape ``(len(xi), len(l))``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    l = np.asarray(l, dtype=float)
    n = l / (2 * l + 1)
    ea = np.asarray(eval_epsilon(system.ambient, xi))[:, None]
    if system.is_homogeneous:
        es = np.asarray(eval_epsilon(system.sphere_material, xi))[:, None]
        # -n / (u - n) rewritten without u so that eps = inf is harmless
        with np.errstate(invalid="ignore", divide="ignore"):
            alpha = n * (es - ea) / (n * es + (1 - n) * ea)
        return np.where(np.isinf(es), 1.0, alpha) * np.ones_like(n)
    ei = np.asarray(eval_epsilon(system.core, xi))[:, None]
    ec = np.asarray(eval_epsilon(system.coat, xi))[:, None]
    if np.any(np.isinf(ec)) or np.any(np.isinf(ei)):
        raise DomainError("coated sphere needs finite permittivities (xi > 0)")
    same = ei == ec
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = coated_polarizability(
            l, 1.0, system.delta / system.R, _u(ei, ec), _u(ea, ec), _u(ec, ea))
        hom = n * (ec - ea) / (n * ec + (1 - n) * ea)
    return np.where(same, hom, alpha)


# --------------------------------------------------------------------------
# coupling blocks


def _log_k(l, lp, m):
    return gammaln(l + lp + 1) - 0.5 * (
        gammaln(l + m + 1) + gammaln(l - m + 1) + gammaln(lp + m + 1) + gammaln(lp - m + 1))


def _orders(m, L_max):
    return np.arange(max(m, 1), L_max + 1, dtype=float)


@dataclass(frozen=True)
class CouplingBlock:
    """Dense multipole coupling for one azimuthal index, lengths in units of R."""

    m: int
    L_max: int
    A: np.ndarray
    c: np.ndarray
    n0: np.ndarray

    @property
    def l(self):
        return _orders(self.m, self.L_max).astype(int)

    def H(self, contrast: float) -> np.ndarray:
        return np.diag(self.n0) + contrast * self.A


def coupling_matrix(m: int, L_max: int, z_over_R: float) -> CouplingBlock:
    """Symmetrized image coupling block A^m for orders max(m,1) <= l <= L_max."""
    if not z_over_R > 0:
        raise DomainError("z/R must be > 0")
    if not 0 <= m <= L_max:
        raise DomainError("need 0 <= m <= L_max")
    l = _orders(m, L_max)
    c = l / (2 * l + 1)
    logD = math.log(2.0 * (1.0 + z_over_R))
    lp, lq = l[:, None], l[None, :]
    mag = np.exp(_log_k(lp, lq, m) - (lp + lq + 1) * logD + 0.5 * np.log(np.outer(c, c)))
    sign = 1.0 - 2.0 * ((lp + lq) % 2)
    A = -sign * mag
    return CouplingBlock(m, L_max, 0.5 * (A + A.T), c, c.copy())


@dataclass(frozen=True)
class ModeSpectrum:
    """Eigenvalues n_s^m of H^m for m = 0..L_max (m < 0 mirrors m > 0)."""

    modes: tuple
    z_over_R: float
    L_max: int
    contrast: float

    def values(self, m: int) -> np.ndarray:
        return np.array([n for mm, _, n in self.modes if mm == abs(m)])

    def with_multiplicity(self) -> np.ndarray:
        """All eigenvalues, counting m != 0 twice (for +m and -m)."""
        out = []
        for mm, _, n in self.modes:
            out.extend([n] * (1 if mm == 0 else 2))
        return np.sort(np.array(out))


def _constant_contrast(system: SphereSystem) -> float:
    if system.substrate.is_constant and system.ambient.is_constant:
        return float(contrast_factor(system.substrate, system.ambient, 1.0))
    raise DomainError(
        "substrate contrast is frequency dependent; pass contrast= explicitly "
        "or use the argument-principle energy")


def spectral_modes(system: SphereSystem, L_max: int,
                   contrast: float | None = None) -> ModeSpectrum:
    """Geometric resonances u(omega_s) = n_s^m of a homogeneous sphere."""
    if not system.is_homogeneous:
        raise DomainError("spectral modes exist only for a homogeneous sphere")
    fc = _constant_contrast(system) if contrast is None else float(contrast)
    modes = []
    for m in range(L_max + 1):
        block = coupling_matrix(m, L_max, system.z_over_R)
        try:
            ev = np.linalg.eigvalsh(block.H(fc))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed for block m={m}") from exc
        modes.extend((m, s, float(v)) for s, v in enumerate(ev))
    return ModeSpectrum(tuple(modes), system.z_over_R, L_max, fc)


# --------------------------------------------------------------------------
# truncation and the banded determinant engine


@dataclass(frozen=True)
class Truncation:
    """Multipole cut-offs: orders l <= L_max, azimuthal |m| <= m_max, and
    the half-bandwidth kept in |l - l'|."""

    L_max: int
    m_max: int
    bandwidth: int


def auto_truncation(z_over_R: float, L_max: int | None = None, tol: float = 1e-4,
                    L_cap: int = 8192) -> Truncation:
    """Cut-offs from the decay of the coupling, ~ (1 + z/R)^-(l+l').

    ``L_max`` is chosen so that (1+z/R)^(-2 L_max) < tol; the azimuthal
    range grows like (z/R)^-1/2 (the size of the near-contact patch); the
    band keeps entries up to ~2 standard widths of the binomial profile.
    """
    if L_max is None:
        L_max = math.ceil(math.log(1 / tol) / (2 * math.log1p(z_over_R)))
        L_max = min(max(L_max, 8), L_cap)
    m_max = min(L_max, math.ceil(5.0 / math.sqrt(z_over_R)) + 4)
    bandwidth = min(L_max - 1, math.ceil(2.0 * math.sqrt(L_max)) + 10)
    return Truncation(int(L_max), int(m_max), int(max(bandwidth, 0)))


class _Band:
    """exp(log K - (l+l'+1) log D) for one m, upper banded LAPACK storage."""

    def __init__(self, m: int, trunc: Truncation, z_over_R: float):
        l = _orders(m, trunc.L_max)
        N = l.size
        bw = min(trunc.bandwidth, N - 1)
        k = np.arange(bw, -1, -1)[:, None]       # row r holds A[j-k, j]
        j = np.arange(N)[None, :]
        i = j - k
        valid = i >= 0
        ic = np.where(valid, i, 0)
        li, lj = l[ic], l[j]
        logD = math.log(2.0 * (1.0 + z_over_R))
        with np.errstate(over="ignore"):
            band = np.exp(_log_k(li, lj, m) - (li + lj + 1) * logD)
        self.band = np.where(valid, band, 0.0)
        self.rows = ic
        self.l = l
        self.m = m
        self.bw = bw

    def dense(self):
        N = self.l.size
        full = np.zeros((N, N))
        for r in range(self.bw + 1):
            k = self.bw - r
            idx = np.arange(k, N)
            full[idx - k, idx] = self.band[r, k:]
            full[idx, idx - k] = self.band[r, k:]
        return full

    def logdet(self, weight: np.ndarray, xi_label: float) -> float:
        """log det(I - diag(w) K diag(w)) with w = f_c alpha_l (this block's l)."""
        if np.all(weight == 0):
            return 0.0
        s = np.sign(weight)
        if np.all(s >= 0) or np.all(s <= 0):
            sgn = 1.0 if np.any(s > 0) else -1.0
            a = np.sqrt(np.abs(weight))
            ab = -sgn * self.band * a[None, :] * a[self.rows]
            ab[self.bw] += 1.0
            try:
                chol = sla.cholesky_banded(ab, lower=False, check_finite=False)
                return 2.0 * float(np.sum(np.log(chol[self.bw])))
            except np.linalg.LinAlgError:
                pass
        # general route: I - diag(w) K is similar to the symmetric form
        G = np.eye(self.l.size) - weight[:, None] * self.dense()
        sign, ld = np.linalg.slogdet(G)
        if not (sign > 0 and np.isfinite(ld)):
            raise NumericalError(
                f"non-positive multipole determinant (m={self.m}, xi/omega_ref={xi_label:.4g})")
        return float(ld)


def _log_g_nodes(system: SphereSystem, x, trunc: Truncation) -> np.ndarray:
    """sum_m log det for each reduced frequency x = xi / omega_ref."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = x * system.omega_ref
    fc = np.asarray(contrast_factor(system.substrate, system.ambient, xi))
    out = np.zeros(x.size)
    if np.all(fc == 0):
        return out
    l_all = np.arange(1, trunc.L_max + 1, dtype=float)
    weights = fc[:, None] * sphere_polarizabilities(system, xi, l_all)
    for m in range(trunc.m_max + 1):
        band = _Band(m, trunc, system.z_over_R)
        w_m = weights[:, max(m, 1) - 1:]
        mult = 1.0 if m == 0 else 2.0
        for q in range(x.size):
            out[q] += mult * band.logdet(w_m[q], x[q])
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite log-determinant")
    return out


def log_G_normalized(system: SphereSystem, xi, L_max: int | None = None,
                     truncation: Truncation | None = None):
    """sum_m log det[1 + f_c alpha_l A^m] at imaginary frequency ``xi`` (rad/s).

    This is log[G / prod_l (1/alpha_l)]: zero for a decoupled sphere and
    negative for attraction.
    """
    xa = np.asarray(xi, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("xi must be > 0")
    trunc = truncation or auto_truncation(system.z_over_R, L_max)
    out = _log_g_nodes(system, xa.ravel() / system.omega_ref, trunc)
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


# --------------------------------------------------------------------------
# energies


@dataclass(frozen=True)
class MultipoleEnergy:
    """Energy with the numerical settings that produced it."""

    energy: float          # J
    reduced: float         # U / (hbar omega_ref)
    omega_ref: float       # rad/s
    truncation: Truncation
    nodes: int
    quad_rel_change: float


def multipole_energy(system: SphereSystem, L_max: int | None = None,
                     quad: QuadSpec = QuadSpec(),
                     truncation: Truncation | None = None) -> MultipoleEnergy:
    trunc = truncation or auto_truncation(system.z_over_R, L_max)
    # U / (hbar w_ref) = (1/2pi) int_0^inf dx log G(i x w_ref)
    val, nodes, rel = integrate_half_line(
        lambda x: _log_g_nodes(system, x, trunc), 1.0, quad)
    red = val / (2 * math.pi)
    w = system.omega_ref
    return MultipoleEnergy(red * hbar * w, red, w, trunc, nodes, rel)


def energy_argument_principle(system: SphereSystem, L_max: int | None = None,
                              quad: QuadSpec = QuadSpec(),
                              truncation: Truncation | None = None) -> float:
    """Non-retarded interaction energy (J) from the imaginary-axis determinant.

    The overall sign is fixed so that like materials attract (U < 0).
    """
    return multipole_energy(system, L_max, quad, truncation).energy


def _undamped_drude(model: DielectricModel) -> bool:
    return model.kind == "drude" and model.gamma == 0.0


def energy_mode_sum(system: SphereSystem, L_max: int) -> float:
    """Zero-point energy shift (hbar/2) sum_s [omega_s(z) - omega_s(inf)] in J.

    Needs a homogeneous undamped Drude sphere in vacuum, so that
    u(omega) = omega^2 / omega_p^2. Two substrates are supported:

    * constant permittivity: the modes are omega_p sqrt(n_s^m) with n_s^m
      the eigenvalues of H^m;
    * the same undamped Drude metal: f_c = 1 / (1 - 2u) makes the mode
      condition quadratic in u; its 2N roots replace the N sphere modes and
      the N-fold substrate surface plasmon at u = 1/2.
    """
    if not system.is_homogeneous:
        raise DomainError("mode sum needs a homogeneous sphere")
    mat = system.sphere_material
    amb = system.ambient
    if not _undamped_drude(mat) or not (amb.is_constant and amb.eps == 1.0):
        raise DomainError("mode sum needs an undamped Drude sphere in vacuum")
    sub = system.substrate
    if sub.is_constant:
        fc, quadratic = float(contrast_factor(sub, amb, 1.0)), False
    elif _undamped_drude(sub) and sub.omega_p == mat.omega_p:
        fc, quadratic = None, True
    else:
        raise DomainError("substrate must be constant or the sphere's undamped Drude metal")

    total = 0.0
    for m in range(L_max + 1):
        block = coupling_matrix(m, L_max, system.z_over_R)
        n0 = block.n0
        if quadratic:
            N = n0.size
            # 2u^2 q - u (1 + 2 n) q + (n + A) q = 0, linearized
            comp = np.block([
                [np.zeros((N, N)), np.eye(N)],
                [-(np.diag(n0) + block.A) / 2.0, np.diag(1.0 + 2.0 * n0) / 2.0],
            ])
            u = np.linalg.eigvals(comp)
            if np.any(np.abs(u.imag) > 1e-9 * np.abs(u).max()) or np.any(u.real <= 0):
                raise NumericalError(
                    f"unstable coupled modes in block m={m}; use the argument-principle energy")
            shift = np.sum(np.sqrt(u.real)) - np.sum(np.sqrt(n0)) - N * math.sqrt(0.5)
        else:
            ev = np.linalg.eigvalsh(block.H(fc))
            if np.any(ev < 0):
                raise NumericalError(
                    f"negative mode eigenvalue in block m={m} (truncation breakdown); "
                    "use the argument-principle energy")
            shift = np.sum(np.sqrt(ev)) - np.sum(np.sqrt(n0))
        total += (1.0 if m == 0 else 2.0) * shift
    return 0.5 * hbar * mat.omega_p * total


def force(system: SphereSystem, L_max: int | None = None, quad: QuadSpec = QuadSpec(),
          step: float = 1e-3, truncation: Truncation | None = None) -> float:
    """Attractive force dU/dz (N) by central differences, h = step * z.

    Positive values pull the sphere toward the substrate. The multipole
    cut-offs and the quadrature order are frozen at the central gap so that
    both difference points use the same discretization.
    """
    z = system.z
    h = step * z
    trunc = truncation or auto_truncation(system.z_over_R, L_max)
    if quad.tol is not None:
        quad = quad.fixed(multipole_energy(system, quad=quad, truncation=trunc).nodes)
    up = multipole_energy(system.with_gap(z + h), quad=quad, truncation=trunc).energy
    down = multipole_energy(system.with_gap(z - h), quad=quad, truncation=trunc).energy
    return (up - down) / (2 * h)


def converge_Lmax(system: SphereSystem, tol_rel: float, L_start: int = 4,
                  L_cap: int = 256, quad: QuadSpec = QuadSpec(nodes=32, tol=None)):
    """Double L_max until successive energies agree to ``tol_rel``.

    Returns ``(energy_J, L_used, achieved_rel)``. Hitting ``L_cap`` first
    emits a :class:`ConvergenceWarning` and returns the last estimate.
    """
    if not tol_rel > 0:
        raise DomainError("tol_rel must be > 0")
    L = max(1, L_start)
    prev = energy_argument_principle(system, quad=quad,
                                     truncation=auto_truncation(system.z_over_R, L))
    while True:
        L2 = min(2 * L, L_cap)
        cur = energy_argument_principle(system, quad=quad,
                                        truncation=auto_truncation(system.z_over_R, L2))
        rel = abs(cur - prev) / abs(cur) if cur != 0 else 0.0
        if rel < tol_rel:
            return cur, L2, rel
        if L2 >= L_cap:
            warnings.warn(
                f"L_max cap {L_cap} reached with relative change {rel:.2e} > {tol_rel:.1e}",
                ConvergenceWarning, stacklevel=2)
            return cur, L2, rel
        L, prev = L2, cur
