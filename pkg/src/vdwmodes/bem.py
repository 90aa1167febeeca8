"""Surface-charge (boundary-element) method for arbitrary closed bodies.

The induced surface charge of a homogeneous body obeys, at panel
centroids,

    (2 pi / lambda) sigma_i = sum_j R_ij sigma_j,
    R_ij = n_i . (r_i - r_j) dS_j / |r_i - r_j|^3,   R_ii = 0,

with ``lambda = (eps - eps_a) / (eps + eps_a)``. Eigenvalues ``m_s`` of R
give geometric resonances ``u(omega_s) = n_s = (1 - m_s / 2 pi) / 2``.

Two kernels are available. ``"centroid"`` is the point formula above.
``"panel"`` (default) replaces it for nearby pairs on the same body by
the panel-averaged normal field of the uniformly charged flat source
polygon. Collocating at the centroid of a flat panel misses the curvature
concentrated on its edges, an O(h) error; averaging over the target panel
recovers it while keeping ``R_ii = 0``.

Pairs facing each other across a gap (different bodies, or a panel and a
mirror image) keep the point formula unless closer than half a panel size.
Averaging both panels would filter a gap mode of wavevector q by roughly
sinc^2(qh/2), whereas sampling the smooth kernel only aliases at order
exp(-2 pi D / h) for separation D.

Eigen-analysis uses ``S = D^(1/2) R D^(-1/2)``, ``D = diag(dS)``. S is
similar to R but not symmetric, so eigenvalues come from a general solver
and only their real parts are kept. Energies are computed in the
subspace of charge-neutral distributions (one constraint per body), which
removes the n = 0 total-charge mode of every body.

A planar substrate at z = 0 is represented by mirrored panels carrying
``-f_c`` times the charge of their originals.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

from .dielectrics import VACUUM, DielectricModel, contrast_factor
from .errors import DomainError, GeometryError, NumericalError, ProximityWarning
from .mesh import Mesh, mirror_image, transform
from .quadrature import QuadSpec, integrate_half_line
from .results import ScanResult

__all__ = [
    "InteractionMatrix",
    "BemSpectrum",
    "solid_angle",
    "build_R",
    "image_matrix",
    "spectrum",
    "neutral_basis",
    "energy_two_objects_same_drude",
    "energy_two_objects",
    "energy_object_substrate",
    "energy_object_substrate_mode_sum",
    "force_object_substrate",
    "place_above",
    "substrate_body",
    "SHAPES",
    "lateral_scan",
    "rotation_scan",
    "MAX_PANELS",
]

MAX_PANELS = 2200
NEAR_FACTOR = 4.0
GAP_FACTOR = 0.5
PANEL_QUAD = 2
_BLOCK = 256
GRADE_FACTOR = 1.75
SHAPES = ("cube", "standing", "lying", "cylinder")


# --------------------------------------------------------------------------
# kernels


def solid_angle(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Signed solid angle of flat polygons seen from points, pairwise.

    ``points`` is ``(M, 3)`` and ``verts`` ``(M, 4, 3)``, counter-clockwise
    about the polygon normal (triangles repeat vertex 0). The sign is
    positive on the side the normal points to; it equals the normal
    component of the field of a unit surface density on the polygon.
    """
    P = np.asarray(points, dtype=float)
    rel = np.asarray(verts, dtype=float) - P[:, None, :]
    dist = np.linalg.norm(rel, axis=2)
    omega = np.zeros(P.shape[0])
    # fan triangles (0,1,2) and (0,2,3), van Oosterom-Strackee formula
    for k in (1, 2):
        a, b, c = rel[:, 0], rel[:, k], rel[:, k + 1]
        la, lb, lc = dist[:, 0], dist[:, k], dist[:, k + 1]
        num = np.einsum("ij,ij->i", a, np.cross(b, c))
        den = (la * lb * lc + np.einsum("ij,ij->i", a, b) * lc
               + np.einsum("ij,ij->i", a, c) * lb + np.einsum("ij,ij->i", b, c) * la)
        omega -= 2.0 * np.arctan2(num, den)
    return omega


def _gauss_points(verts: np.ndarray, q: int):
    """q x q Gauss points on bilinear panels and their normalized weights."""
    t, w = np.polynomial.legendre.leggauss(q)
    s, w = (t + 1) / 2, w / 2
    S, T = (a.ravel() for a in np.meshgrid(s, s, indexing="ij"))
    W = np.outer(w, w).ravel()
    v0, v1, v2, v3 = (verts[:, k][:, None, :] for k in range(4))
    S, T = S[None, :, None], T[None, :, None]
    X = (1 - S) * (1 - T) * v0 + S * (1 - T) * v1 + S * T * v2 + (1 - S) * T * v3
    jac = np.linalg.norm(np.cross((1 - T) * (v1 - v0) + T * (v2 - v3),
                                  (1 - S) * (v3 - v0) + S * (v2 - v1)), axis=2) * W[None, :]
    return X, jac / jac.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class _Panels:
    c: np.ndarray
    n: np.ndarray
    a: np.ndarray
    v: np.ndarray | None
    obj: np.ndarray

    @classmethod
    def of(cls, meshes) -> "_Panels":
        meshes = list(meshes)
        if not meshes:
            raise GeometryError("need at least one mesh")
        verts = None
        if all(m.vertices is not None for m in meshes):
            verts = np.concatenate([m.vertices for m in meshes])
        return cls(np.concatenate([m.centroids for m in meshes]),
                   np.concatenate([m.normals for m in meshes]),
                   np.concatenate([m.areas for m in meshes]),
                   verts,
                   np.concatenate([np.full(len(m), k) for k, m in enumerate(meshes)]))


def _kernel(tgt: _Panels, src: _Panels, kernel: str, exclude_self: bool,
            image: bool = False) -> np.ndarray:
    """R_ij between target panels i and source panels j (see module notes).

    ``centroid``: n_i . (r_i - r_j) dS_j / |r_i - r_j|^3.
    ``panel``: for pairs closer than ``NEAR_FACTOR`` panel sizes on the
    same body (``GAP_FACTOR`` across bodies or for images), the flux
    of panel j's field through panel i divided by dS_i. By reciprocity
    this is (dS_j / dS_i) times the mean over panel j of the solid angle
    of panel i (negated), which is bounded and cheap to integrate.
    """
    if kernel not in ("panel", "centroid"):
        raise DomainError(f"unknown kernel {kernel!r}")
    if kernel == "panel" and (src.v is None or tgt.v is None):
        raise DomainError("panel kernel needs mesh vertices; use kernel='centroid'")
    Nt, Ns = tgt.a.size, src.a.size
    out = np.empty((Nt, Ns))
    size = np.sqrt(np.maximum(src.a[None, :], tgt.a[:, None]))
    if kernel == "panel":
        X, W = _gauss_points(src.v, PANEL_QUAD)
    for i0 in range(0, Nt, _BLOCK):
        i1 = min(i0 + _BLOCK, Nt)
        d = tgt.c[i0:i1, None, :] - src.c[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        if exclude_self:
            idx = np.arange(i0, i1)
            r2[idx - i0, idx] = np.inf
        tiny = r2 < (1e-10 * size[i0:i1]) ** 2
        if np.any(tiny):
            i, j = np.argwhere(tiny)[0]
            raise GeometryError(f"coincident panel centroids: panels {i0 + i} and {j}")
        blk = np.einsum("ik,ijk->ij", tgt.n[i0:i1], d) * src.a[None, :] / r2**1.5
        if kernel == "panel":
            same = (tgt.obj[i0:i1, None] == src.obj[None, :]) & (not image)
            factor = np.where(same, NEAR_FACTOR, GAP_FACTOR)
            # margin keeps grid-aligned ties on the same side under rigid motions
            ii, jj = np.nonzero(r2 < (factor * size[i0:i1]) ** 2 * (1 + 1e-9))
            if ii.size:
                Q = X.shape[1]
                om = solid_angle(X[jj].reshape(-1, 3), np.repeat(tgt.v[i0 + ii], Q, axis=0))
                mean = np.einsum("pq,pq->p", om.reshape(-1, Q), W[jj])
                blk[ii, jj] = -mean * src.a[jj] / tgt.a[i0 + ii]
        out[i0:i1] = blk
    return out


@dataclass(frozen=True)
class InteractionMatrix:
    """Dense R with per-row object ids and panel areas."""

    R: np.ndarray
    areas: np.ndarray
    object_ids: np.ndarray
    kernel: str

    @property
    def S(self) -> np.ndarray:
        """Similarity transform D^(1/2) R D^(-1/2)."""
        s = np.sqrt(self.areas)
        return self.R * s[:, None] / s[None, :]

    @property
    def N(self) -> int:
        return self.areas.size


def build_R(meshes, kernel: str = "panel") -> InteractionMatrix:
    """Assemble R for the union of ``meshes`` (a Mesh or a list of them)."""
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    p = _Panels.of(meshes)
    R = _kernel(p, p, kernel, exclude_self=True)
    np.fill_diagonal(R, 0.0)
    return InteractionMatrix(R, p.a, p.obj, kernel)


def image_matrix(meshes, kernel: str = "panel") -> np.ndarray:
    """R^img: field at each panel from the mirror image (z -> -z) of every panel."""
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    p = _Panels.of(meshes)
    q = _Panels.of([mirror_image(m) for m in meshes])
    return _kernel(p, q, kernel, exclude_self=False, image=True)


# --------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class BemSpectrum:
    """Sorted n_s values of one configuration."""

    n: np.ndarray
    descriptor: dict
    max_imag: float

    @property
    def m(self) -> np.ndarray:
        return 2 * math.pi * (1 - 2 * self.n)


def neutral_basis(areas: np.ndarray, object_ids: np.ndarray):
    """Householder data for the charge-neutral subspace of each body.

    Returns ``(vs, keep)``: reflectors (one per body, acting on the
    symmetrized variables) and the indices spanning the neutral subspace.
    """
    vs, drop = [], []
    for k in np.unique(object_ids):
        idx = np.nonzero(object_ids == k)[0]
        w = np.zeros(areas.size)
        w[idx] = np.sqrt(areas[idx])
        w /= np.linalg.norm(w)
        first = idx[0]
        v = w.copy()
        v[first] += 1.0 if w[first] >= 0 else -1.0
        v /= np.linalg.norm(v)
        vs.append(v)
        drop.append(first)
    keep = np.setdiff1d(np.arange(areas.size), drop)
    return vs, keep


def _compress(M: np.ndarray, vs, keep) -> np.ndarray:
    """Q^T M Q with Q the neutral-subspace columns of prod_k (I - 2 v_k v_k^T)."""
    X = M.copy()
    for v in vs:
        X -= 2.0 * np.outer(v, v @ X)
        X -= 2.0 * np.outer(X @ v, v)
    return X[np.ix_(keep, keep)]


def _neutral(im: InteractionMatrix, *others):
    vs, keep = neutral_basis(im.areas, im.object_ids)
    s = np.sqrt(im.areas)
    out = [_compress(im.S, vs, keep)]
    for M in others:
        out.append(_compress(M * s[:, None] / s[None, :], vs, keep))
    return out


def _eigs(S: np.ndarray, label: str):
    try:
        ev = np.linalg.eigvals(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed ({label})") from exc
    return ev


def spectrum(meshes, kernel: str = "panel", neutral: bool = False,
             max_panels: int = MAX_PANELS, descriptor: dict | None = None) -> BemSpectrum:
    """n_s of the configuration, sorted ascending.

    The raw spectrum (``neutral=False``) satisfies sum n_s = N/2; the
    neutral one drops one total-charge mode per body.
    """
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    N = sum(len(m) for m in meshes)
    if N > max_panels:
        raise DomainError(
            f"{N} panels exceed the dense eigen-solve cap of {max_panels}; "
            "use fewer panels or raise max_panels")
    im = build_R(meshes, kernel)
    S = _neutral(im)[0] if neutral else im.S
    m = _eigs(S, "spectrum")
    n = np.sort((1 - m.real / (2 * math.pi)) / 2)
    imag = float(np.abs(m.imag).max() / (4 * math.pi)) if m.size else 0.0
    return BemSpectrum(n, dict(descriptor or {}), imag)


# --------------------------------------------------------------------------
# energies


def _require_undamped_drude(model: DielectricModel):
    if model.kind != "drude" or model.gamma != 0.0:
        raise DomainError("mode-sum energies need an undamped Drude material")


def _sqrt_modes(n: np.ndarray, label: str) -> float:
    """sum sqrt(n_s); complex-conjugate pairs contribute 2 Re sqrt(n_s)."""
    n = np.asarray(n, dtype=complex)
    if np.any(n.real < 0):
        raise NumericalError(
            f"negative resonance n_s = {n.real.min():.3g} ({label}); the discretization "
            "is too coarse for this separation: add panels or increase the gap")
    return float(np.sum(np.sqrt(n)).real)


def _modes(S: np.ndarray, label: str) -> np.ndarray:
    return (1 - _eigs(S, label) / (2 * math.pi)) / 2


def _neutral_modes(meshes, kernel: str, max_panels: int) -> np.ndarray:
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    N = sum(len(m) for m in meshes)
    if N > max_panels:
        raise DomainError(f"{N} panels exceed the dense eigen-solve cap of {max_panels}")
    return _modes(_neutral(build_R(meshes, kernel))[0], "isolated body")


def energy_two_objects_same_drude(meshA: Mesh, meshB: Mesh, drude: DielectricModel,
                                  kernel: str = "panel", max_panels: int = MAX_PANELS,
                                  isolated: tuple | None = None) -> float:
    """Zero-point energy shift (J) of two bodies of one undamped Drude metal.

    ``U = (hbar w_p / 2) [sum sqrt(n_s) - sum sqrt(n_s^A) - sum sqrt(n_s^B)]``
    over charge-neutral modes. ``isolated`` may pass precomputed
    ``(sum sqrt n^A, sum sqrt n^B)`` to reuse them along a scan.
    """
    _require_undamped_drude(drude)
    im = build_R([meshA, meshB], kernel)
    nA = len(meshA)
    if not im.R[:nA, nA:].any() and not im.R[nA:, :nA].any():
        return 0.0
    if len(meshA) + len(meshB) > max_panels:
        raise DomainError(f"{len(meshA) + len(meshB)} panels exceed the cap of {max_panels}")
    both = _sqrt_modes(_modes(_neutral(im)[0], "two objects"), "coupled pair")
    if isolated is None:
        isolated = (_sqrt_modes(_neutral_modes(meshA, kernel, max_panels), "body A"),
                    _sqrt_modes(_neutral_modes(meshB, kernel, max_panels), "body B"))
    return 0.5 * hbar * drude.omega_p * (both - isolated[0] - isolated[1])


def _lam(model: DielectricModel, ambient: DielectricModel, xi):
    """(eps - eps_a) / (eps + eps_a), with 1 for eps = inf."""
    return np.asarray(contrast_factor(model, ambient, xi))


def _logdet(M: np.ndarray, xi: float) -> float:
    sign, ld = np.linalg.slogdet(M)
    if not (sign > 0 and np.isfinite(ld)):
        raise NumericalError(f"non-positive BEM determinant at xi = {xi:.4g} rad/s")
    return float(ld)


def _omega_ref(*models) -> float:
    w = max(m.characteristic_frequency for m in models)
    if w == 0.0:
        raise DomainError("all materials are non-dispersive; the energy diverges")
    return w


def energy_two_objects(meshA: Mesh, meshB: Mesh, matA: DielectricModel,
                       matB: DielectricModel, ambient: DielectricModel = VACUUM,
                       kernel: str = "panel", quad: QuadSpec = QuadSpec()) -> float:
    """Two-body energy (J) from the imaginary-axis determinant.

    ``U = (hbar / 2 pi) int dxi log[det(1 - K) / (det(1 - K_AA) det(1 - K_BB))]``
    with ``K = diag(lambda) S / 2 pi``. Works for dissimilar materials.
    """
    im = build_R([meshA, meshB], kernel)
    S = _neutral(im)[0]
    _, keep = neutral_basis(im.areas, im.object_ids)
    isA = im.object_ids[keep] == 0
    w = _omega_ref(matA, matB, ambient)

    def integrand(xs):
        out = []
        for xi in xs:
            lam = np.where(isA, _lam(matA, ambient, xi), _lam(matB, ambient, xi))
            M = np.eye(S.shape[0]) - lam[:, None] * S / (2 * math.pi)
            full = _logdet(M, xi)
            a = _logdet(M[np.ix_(isA, isA)], xi)
            b = _logdet(M[np.ix_(~isA, ~isA)], xi)
            out.append(full - a - b)
        return np.array(out)

    val, _, _ = integrate_half_line(integrand, w, quad)
    return hbar / (2 * math.pi) * val


def place_above(mesh: Mesh, gap: float) -> Mesh:
    """Translate ``mesh`` vertically so that its lowest point sits at z = gap."""
    if not gap > 0:
        raise DomainError("gap must be > 0")
    return transform(mesh, translation=(0.0, 0.0, gap - mesh.zmin))


def _proximity_check(mesh: Mesh, gap: float):
    if gap < 0.02 * mesh.max_diameter:
        warnings.warn(
            f"gap {gap:.3g} is below 2% of the body diameter {mesh.max_diameter:.3g}; "
            "results there depend strongly on the panel size",
            ProximityWarning, stacklevel=3)


class _SubstrateProblem:
    """Cached direct interaction of one body; image part built per gap."""

    def __init__(self, mesh: Mesh, body, substrate, ambient, kernel):
        self.mesh, self.body, self.substrate, self.ambient = mesh, body, substrate, ambient
        self.kernel = kernel
        self.im = build_R(mesh, kernel)
        self.vs, self.keep = neutral_basis(self.im.areas, self.im.object_ids)
        self.S = _compress(self.im.S, self.vs, self.keep)
        self.w = _omega_ref(body, substrate, ambient)

    def image(self, gap: float) -> np.ndarray:
        placed = place_above(self.mesh, gap)
        Ri = image_matrix(placed, self.kernel)
        s = np.sqrt(self.im.areas)
        return _compress(Ri * s[:, None] / s[None, :], self.vs, self.keep)

    def log_ratio(self, xs, Si: np.ndarray, reference: bool = True) -> np.ndarray:
        out = []
        eye = np.eye(self.S.shape[0])
        for xi in xs:
            lam = float(_lam(self.body, self.ambient, xi))
            fc = float(contrast_factor(self.substrate, self.ambient, xi))
            full = _logdet(eye - lam / (2 * math.pi) * (self.S - fc * Si), xi)
            ref = _logdet(eye - lam / (2 * math.pi) * self.S, xi) if reference else 0.0
            out.append(full - ref)
        return np.array(out)


def energy_object_substrate(mesh: Mesh, body: DielectricModel, substrate: DielectricModel,
                            gap: float, ambient: DielectricModel = VACUUM,
                            kernel: str = "panel", quad: QuadSpec = QuadSpec()) -> float:
    """Energy (J) of a body a distance ``gap`` above a planar substrate.

    ``U = (hbar / 2 pi) int_0^inf dxi log[det(1 - K - K_img) / det(1 - K)]``
    with ``K = lambda S / 2 pi`` and ``K_img = -lambda f_c S_img / 2 pi``.
    """
    _proximity_check(mesh, gap)
    if substrate == ambient:
        return 0.0
    prob = _SubstrateProblem(mesh, body, substrate, ambient, kernel)
    Si = prob.image(gap)
    val, _, _ = integrate_half_line(lambda x: prob.log_ratio(x, Si), prob.w, quad)
    return hbar / (2 * math.pi) * val


def force_object_substrate(mesh: Mesh, body: DielectricModel, substrate: DielectricModel,
                           gap: float, ambient: DielectricModel = VACUUM,
                           kernel: str = "panel", quad: QuadSpec = QuadSpec(nodes=16, tol=None),
                           step: float = 1e-3) -> float:
    """Attractive force dU/d(gap) (N) by central differences, h = step * gap.

    The body's own determinant does not depend on the gap and cancels.
    """
    _proximity_check(mesh, gap)
    if substrate == ambient:
        return 0.0
    prob = _SubstrateProblem(mesh, body, substrate, ambient, kernel)
    h = step * gap
    Sp, Sm = prob.image(gap + h), prob.image(gap - h)
    if quad.tol is not None:
        S0 = prob.image(gap)
        _, nodes, _ = integrate_half_line(lambda x: prob.log_ratio(x, S0), prob.w, quad)
        quad = quad.fixed(nodes)
    vals = [integrate_half_line(lambda x: prob.log_ratio(x, Sx, reference=False),
                                prob.w, quad)[0] for Sx in (Sp, Sm)]
    return hbar / (2 * math.pi) * (vals[0] - vals[1]) / (2 * h)


def energy_object_substrate_mode_sum(mesh: Mesh, drude: DielectricModel, gap: float,
                                     kernel: str = "panel") -> float:
    """Mode-sum energy (J) for an undamped Drude body over the same metal.

    With ``t = 1 - 2u`` both ``2 pi / lambda`` and ``1 / f_c`` equal ``t``,
    so the modes solve ``2 pi t^2 q - t S q + S_img q = 0``. The 2N roots
    replace the N body modes and the N-fold substrate plasmon at u = 1/2.
    """
    _require_undamped_drude(drude)
    _proximity_check(mesh, gap)
    prob = _SubstrateProblem(mesh, drude, drude, VACUUM, kernel)
    Si = prob.image(gap)
    N = prob.S.shape[0]
    comp = np.block([[np.zeros((N, N)), np.eye(N)],
                     [-Si / (2 * math.pi), prob.S / (2 * math.pi)]])
    u = (1 - _eigs(comp, "substrate companion")) / 2
    n0 = _modes(prob.S, "isolated body")
    shift = _sqrt_modes(u, "body over substrate") - _sqrt_modes(n0, "isolated body") \
        - N * math.sqrt(0.5)
    return 0.5 * hbar * drude.omega_p * shift


# --------------------------------------------------------------------------
# scans


def substrate_body(shape: str, L: float, gap: float, target_panels: int = 1000,
                   graded: bool = True) -> Mesh:
    """Mesh of a standard body for substrate scans, centred at the origin.

    ``cube`` (L^3), ``standing`` (L x L x 2L), ``lying`` (2L x L x L) and
    ``cylinder`` (radius L / sqrt(pi), height L, the cube's base area).
    With ``graded`` the bottom face is refined to ``GRADE_FACTOR * gap``
    when that is finer than the uniform spacing, which keeps the gap modes
    resolved at small separations.
    """
    from .mesh import gen_box, gen_cylinder

    if shape not in SHAPES:
        raise DomainError(f"shape must be one of {', '.join(SHAPES)}")
    if not (L > 0 and gap > 0):
        raise DomainError("L and gap must be > 0")
    dims = {"cube": (L, L, L), "standing": (L, L, 2 * L), "lying": (2 * L, L, L)}
    if shape == "cylinder":
        r = L / math.sqrt(math.pi)
        area = 2 * math.pi * r * r + 2 * math.pi * r * L
    else:
        a, b, c = dims[shape]
        area = 2 * (a * b + b * c + a * c)
    h = math.sqrt(area / target_panels)
    hb = GRADE_FACTOR * gap if graded and GRADE_FACTOR * gap < h else None
    if shape == "cylinder":
        return gen_cylinder("circle", L / math.sqrt(math.pi), L, target_panels, h_bottom=hb)
    return gen_box(*dims[shape], target_panels, h_bottom=hb)


def _stack(lower: Mesh, upper: Mesh, gap: float, shift=(0.0, 0.0)):
    """Place ``lower`` with its top at z = 0 and ``upper`` with its bottom at z = gap."""
    a = transform(lower, translation=(0.0, 0.0, -lower.zmax)).with_object_id(0)
    b = transform(upper, translation=(shift[0], shift[1], gap - upper.zmin)).with_object_id(1)
    return a, b


def _map(fn, items, threads: int):
    """Ordered map, concurrent when ``threads > 1``."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def lateral_scan(meshA: Mesh, meshB: Mesh, gap: float, direction: str, offsets,
                 drude: DielectricModel, kernel: str = "panel",
                 max_panels: int = MAX_PANELS, threads: int = 1) -> ScanResult:
    """Energy of B above A versus horizontal displacement ``l``.

    ``direction='side'`` moves B along x (parallel to a side face of a
    box); ``'diagonal'`` moves it along (x + y) / sqrt 2. Rows follow the
    order of ``offsets``; a failing offset is recorded in ``warn``.
    """
    if direction not in ("side", "diagonal"):
        raise DomainError("direction must be 'side' or 'diagonal'")
    if not gap > 0:
        raise DomainError("gap must be > 0")
    unit = np.array([1.0, 0.0]) if direction == "side" else np.array([1.0, 1.0]) / math.sqrt(2)
    iso = (_sqrt_modes(_neutral_modes(meshA, kernel, max_panels), "body A"),
           _sqrt_modes(_neutral_modes(meshB, kernel, max_panels), "body B"))
    res = ScanResult("l", ["l", "U_J", "U_reduced", "warn"],
                     metadata={"panels": len(meshA) + len(meshB), "kernel": kernel,
                               "method": "neutral mode sum", "direction": direction,
                               "gap": gap})

    def point(l):
        try:
            a, b = _stack(meshA, meshB, gap, tuple(unit * l))
            U = energy_two_objects_same_drude(a, b, drude, kernel, max_panels, iso)
            return dict(l=float(l), U_J=U, U_reduced=U / (hbar * drude.omega_p), warn="")
        except (NumericalError, GeometryError, DomainError) as exc:
            return dict(l=float(l), U_J=float("nan"), U_reduced=float("nan"),
                        warn=f"error: {exc}")

    for row in _map(point, list(offsets), threads):
        res.add(**row)
    return res


def rotation_scan(cross: str, size: float, lengths, gap: float, angles,
                  drude: DielectricModel, target_panels: int = 1000,
                  kernel: str = "panel", max_panels: int = MAX_PANELS,
                  threads: int = 1) -> ScanResult:
    """Energy of two stacked horizontal cylinders versus relative angle.

    Both cylinders lie along x (cross-section ``size``: diameter for a
    circle, side for a square) and are rotated relative to each other about
    the vertical line through their centres.
    """
    from .mesh import gen_cylinder, rotation_matrix

    if cross not in ("circle", "square"):
        raise DomainError("cross must be 'circle' or 'square'")
    if not gap > 0:
        raise DomainError("gap must be > 0")
    for th in angles:
        if not 0 <= th <= math.pi / 2 + 1e-12:
            raise DomainError("angles must lie in [0, pi/2]")
    res = ScanResult("theta", ["length", "theta", "U_J", "U_reduced", "warn"],
                     metadata={"cross": cross, "size": size, "gap": gap, "kernel": kernel,
                               "method": "neutral mode sum"})
    lay = rotation_matrix((0, 1, 0), math.pi / 2)
    for length in lengths:
        dim = size / 2 if cross == "circle" else size
        cyl = transform(gen_cylinder(cross, dim, length, target_panels), rotation=lay)
        iso = _sqrt_modes(_neutral_modes(cyl, kernel, max_panels), "cylinder")
        res.metadata[f"panels_length_{length:g}"] = 2 * len(cyl)

        def point(th, cyl=cyl, iso=iso, length=length):
            try:
                top = transform(cyl, rotation=rotation_matrix((0, 0, 1), th))
                a, b = _stack(cyl, top, gap)
                U = energy_two_objects_same_drude(a, b, drude, kernel, max_panels, (iso, iso))
                return dict(length=float(length), theta=float(th), U_J=U,
                            U_reduced=U / (hbar * drude.omega_p), warn="")
            except (NumericalError, GeometryError, DomainError) as exc:
                return dict(length=float(length), theta=float(th), U_J=float("nan"),
                            U_reduced=float("nan"), warn=f"error: {exc}")

        for row in _map(point, list(angles), threads):
            res.add(**row)
    return res
