"""Flat-panel discretizations of closed surfaces.

Every panel is a planar polygon (quadrilateral, or triangle stored with its
first vertex repeated) carrying a centroid, an outward unit normal and an
area. Generators centre bodies at the origin; use :func:`transform` to
place them. Boxes and cylinders accept a graded layout (``h_bottom``): the
face at ``z = -Lz/2`` is meshed at spacing ``h_bottom`` and the side rows
grow geometrically toward the coarse spacing. This resolves the short
wavelengths that dominate when that face is close to a substrate.

File format: a header line ``N``, then ``N`` rows ``x y z nx ny nz area``
(metres); ``#`` starts a comment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, GeometryError

__all__ = [
    "Panel",
    "Mesh",
    "from_polygons",
    "concatenate",
    "gen_sphere",
    "gen_box",
    "gen_cylinder",
    "rotation_matrix",
    "transform",
    "mirror_image",
    "save_mesh",
    "load_mesh",
]


@dataclass(frozen=True)
class Panel:
    centroid: np.ndarray
    normal: np.ndarray
    area: float


@dataclass(frozen=True, eq=False)
class Mesh:
    """Panels of one closed surface.

    ``vertices`` has shape ``(N, 4, 3)`` (triangles repeat vertex 0) and is
    ``None`` for meshes read from a file; such meshes only support the
    centroid kernel.
    """

    centroids: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    vertices: np.ndarray | None = field(default=None, repr=False)
    object_id: int = 0
    closed: bool = True
    image: bool = False

    def __post_init__(self):
        c, n, a = self.centroids, self.normals, self.areas
        if c.ndim != 2 or c.shape[1] != 3 or n.shape != c.shape or a.shape != (c.shape[0],):
            raise GeometryError("inconsistent panel array shapes")
        if np.any(a <= 0) or not np.all(np.isfinite(a)):
            raise GeometryError("panel areas must be finite and > 0")
        if np.any(np.abs(np.linalg.norm(n, axis=1) - 1) > 1e-9):
            raise GeometryError("panel normals must be unit vectors")
        if self.vertices is not None and self.vertices.shape != (c.shape[0], 4, 3):
            raise GeometryError("vertices must have shape (N, 4, 3)")
        for arr in (c, n, a, self.vertices):
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self):
        return self.areas.size

    def panel(self, i: int) -> Panel:
        return Panel(self.centroids[i], self.normals[i], float(self.areas[i]))

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def vector_area(self) -> np.ndarray:
        return (self.normals * self.areas[:, None]).sum(axis=0)

    @property
    def closure_error(self) -> float:
        """|sum n dS| / sum dS; zero for a closed surface."""
        return float(np.linalg.norm(self.vector_area) / self.total_area)

    @property
    def volume(self) -> float:
        """Enclosed volume from the divergence theorem."""
        return float(np.sum(np.einsum("ij,ij->i", self.normals, self.centroids) * self.areas) / 3)

    def points(self) -> np.ndarray:
        return self.centroids if self.vertices is None else self.vertices.reshape(-1, 3)

    @property
    def zmin(self) -> float:
        return float(self.points()[:, 2].min())

    @property
    def zmax(self) -> float:
        return float(self.points()[:, 2].max())

    @property
    def max_diameter(self) -> float:
        """Bounding-box diagonal, an upper bound on the diameter."""
        p = self.points()
        return float(np.linalg.norm(p.max(axis=0) - p.min(axis=0)))

    def with_object_id(self, object_id: int) -> "Mesh":
        return replace(self, object_id=object_id)


# --------------------------------------------------------------------------
# polygon geometry


def _polygon_arrays(polys: np.ndarray):
    """Planarize (N,4,3) polygons; return vertices, centroids, normals, areas."""
    v = np.asarray(polys, dtype=float)
    nxt = np.roll(v, -1, axis=1)
    vec = 0.5 * np.cross(v, nxt).sum(axis=1)
    area = np.linalg.norm(vec, axis=1)
    if np.any(area <= 0):
        raise GeometryError("degenerate panel with zero area")
    nrm = vec / area[:, None]
    mean = v.mean(axis=1, keepdims=True)
    off = np.einsum("nkj,nj->nk", v - mean, nrm)
    v = v - off[:, :, None] * nrm[:, None, :]
    # fan triangles (0, k, k+1) give the area centroid
    cen = np.zeros((v.shape[0], 3))
    wsum = np.zeros(v.shape[0])
    for k in (1, 2):
        a, b, c = v[:, 0], v[:, k], v[:, k + 1]
        w = 0.5 * np.einsum("nj,nj->n", np.cross(b - a, c - a), nrm)
        cen += w[:, None] * (a + b + c) / 3
        wsum += w
    cen /= wsum[:, None]
    return v, cen, nrm, wsum


def from_polygons(polys, object_id: int = 0, closed: bool = True) -> Mesh:
    """Mesh from an ``(N, 4, 3)`` array of counter-clockwise (seen from outside)
    polygons; triangles repeat their first vertex."""
    v, c, n, a = _polygon_arrays(np.asarray(polys, dtype=float))
    return Mesh(c, n, a, v, object_id=object_id, closed=closed)


def concatenate(meshes, object_id: int = 0) -> Mesh:
    verts = None
    if all(m.vertices is not None for m in meshes):
        verts = np.concatenate([m.vertices for m in meshes])
    return Mesh(np.concatenate([m.centroids for m in meshes]),
                np.concatenate([m.normals for m in meshes]),
                np.concatenate([m.areas for m in meshes]),
                verts, object_id=object_id)


def _grid_quads(P: np.ndarray) -> np.ndarray:
    """Quads of a structured (n1+1, n2+1, 3) grid of points."""
    return np.stack([P[:-1, :-1], P[1:, :-1], P[1:, 1:], P[:-1, 1:]], axis=2).reshape(-1, 4, 3)


def _tri(a, b, c):
    return np.stack([a, b, c, a], axis=-2)


# --------------------------------------------------------------------------
# spacings


def _nodes(length: float, h: float) -> np.ndarray:
    n = max(1, int(round(length / h)))
    return np.linspace(0.0, length, n + 1)


def _graded_steps(length: float, h0: float, h1: float, ratio: float) -> np.ndarray:
    """Steps growing from h0 by ``ratio`` up to h1, rescaled to sum to length."""
    if h0 >= h1 or ratio <= 1:
        return np.diff(_nodes(length, h1))
    steps, s = [], h0
    while sum(steps) < length:
        steps.append(s)
        s = min(s * ratio, h1)
    steps = np.array(steps)
    if len(steps) > 1 and steps.sum() - length > 0.5 * steps[-1]:
        steps = steps[:-1]
    return steps * (length / steps.sum())


def _check_positive(**kw):
    for k, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise DomainError(f"{k} must be finite and > 0")


# --------------------------------------------------------------------------
# sphere


_CUBE_FRAMES = [
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (0, 1, 0), (1, 0, 0)),
]


def gen_sphere(R: float, target_panels: int = 1000, object_id: int = 0) -> Mesh:
    """Equiangular cube-projected sphere with about ``target_panels`` flat quads.

    Vertices are pushed out slightly so that the faceted surface encloses
    the volume of the true sphere.
    """
    _check_positive(R=R)
    if target_panels < 24:
        raise DomainError("a sphere needs at least 24 panels")
    k = max(2, int(round(math.sqrt(target_panels / 6))))
    t = np.tan(np.linspace(-math.pi / 4, math.pi / 4, k + 1))
    quads = []
    for n, t1, t2 in _CUBE_FRAMES:
        n, t1, t2 = map(np.array, (n, t1, t2))
        P = n + t[:, None, None] * t1 + t[None, :, None] * t2
        P /= np.linalg.norm(P, axis=2, keepdims=True)
        quads.append(_grid_quads(P))
    quads = np.concatenate(quads)
    unit = from_polygons(quads)
    scale = R * (4 * math.pi / 3 / unit.volume) ** (1 / 3)
    return from_polygons(quads * scale, object_id=object_id)


# --------------------------------------------------------------------------
# box and cylinder


def _coarse_h(total_area: float, target_panels: int) -> float:
    if target_panels < 6:
        raise DomainError("target_panels must be >= 6")
    return math.sqrt(total_area / target_panels)


def _rect(origin, e1, e2, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Quads on the rectangle origin + s1 e1 + s2 e2; e1 x e2 is the outward normal."""
    P = (np.asarray(origin)[None, None, :] + s1[:, None, None] * np.asarray(e1)
         + s2[None, :, None] * np.asarray(e2))
    return _grid_quads(P)


def _side_rows(height: float, h_bottom: float | None, h: float, ratio: float) -> np.ndarray:
    """Row boundaries (from 0 to height) for side faces."""
    steps = _graded_steps(height, h_bottom, h, ratio) if h_bottom else np.diff(_nodes(height, h))
    return np.concatenate([[0.0], np.cumsum(steps)])


def gen_box(Lx: float, Ly: float, Lz: float, target_panels: int = 1000,
            h_bottom: float | None = None, ratio: float = 1.3, object_id: int = 0) -> Mesh:
    """Rectangular box centred at the origin.

    Uniform layout: square-ish panels of side sqrt(area / target_panels).
    With ``h_bottom`` the bottom face uses that spacing, the side faces use
    rows of geometrically growing height (each row with near-square panels)
    and the top face keeps the coarse spacing.
    """
    _check_positive(Lx=Lx, Ly=Ly, Lz=Lz)
    if h_bottom is not None:
        _check_positive(h_bottom=h_bottom)
    area = 2 * (Lx * Ly + Ly * Lz + Lx * Lz)
    h = _coarse_h(area, target_panels)
    hb = h if h_bottom is None else min(h_bottom, h)
    x0, y0, z0 = -Lx / 2, -Ly / 2, -Lz / 2
    X, Y, Z = np.eye(3)
    quads = [
        _rect((x0, y0, z0), Y, X, _nodes(Ly, hb), _nodes(Lx, hb)),        # bottom, -z
        _rect((x0, y0, -z0), X, Y, _nodes(Lx, h), _nodes(Ly, h)),         # top, +z
    ]
    rows = _side_rows(Lz, h_bottom and hb, h, ratio)
    for r0, r1 in zip(rows[:-1], rows[1:]):
        hr = r1 - r0
        zz = np.array([z0 + r0, z0 + r1])
        sx, sy = _nodes(Lx, hr), _nodes(Ly, hr)
        quads += [
            _rect((x0, y0, 0), X, Z, sx, zz),             # -y face: X x Z = -Y
            _rect((x0, -y0, 0), Z, X, zz, sx),            # +y face
            _rect((x0, y0, 0), Z, Y, zz, sy),             # -x face: Z x Y = -X
            _rect((-x0, y0, 0), Y, Z, sy, zz),            # +x face
        ]
    return from_polygons(np.concatenate(quads), object_id=object_id)


def _equal_area_radius(R: float, n: int) -> float:
    """Circumradius of the regular n-gon whose area is pi R^2."""
    return R * math.sqrt(2 * math.pi / (n * math.sin(2 * math.pi / n)))


def _disk(R: float, h: float, z: float, up: bool) -> np.ndarray:
    """Polar-ring tiling of a disk of radius R; ring areas are exact."""
    K = max(1, int(round(R / h)))
    rho = np.linspace(0.0, R, K + 1)
    polys, r_prev = [], 0.0
    for k in range(1, K + 1):
        mid = 0.5 * (rho[k] + rho[k - 1])
        n = max(6, int(round(2 * math.pi * mid / h)))
        if k == 1:
            # central fan: triangles of area close to h^2
            n = max(4, int(round(math.pi * (rho[1] / h) ** 2)))
        r = math.sqrt(r_prev**2 + 2 * math.pi * (rho[k] ** 2 - rho[k - 1] ** 2)
                      / (n * math.sin(2 * math.pi / n)))
        phi = np.linspace(0, 2 * math.pi, n + 1)
        ring = lambda rr: np.stack([rr * np.cos(phi), rr * np.sin(phi), np.full_like(phi, z)], 1)
        outer = ring(r)
        if k == 1:
            centre = np.array([0.0, 0.0, z])
            for j in range(n):
                polys.append(_tri(centre, outer[j], outer[j + 1]))
        else:
            inner_r = r_prev
            inner = ring(inner_r)
            for j in range(n):
                polys.append(np.stack([inner[j], outer[j], outer[j + 1], inner[j + 1]]))
        r_prev = r
    polys = np.array(polys)
    return polys if up else polys[:, ::-1]


def gen_cylinder(cross: str, size: float, length: float, target_panels: int = 1000,
                 h_bottom: float | None = None, ratio: float = 1.3,
                 object_id: int = 0) -> Mesh:
    """Finite cylinder along z centred at the origin.

    ``cross='circle'`` takes ``size`` as the radius; ``cross='square'``
    takes it as the side length (the result is a box). Circular sections
    use regular polygons with the exact cross-sectional area.
    """
    if cross == "square":
        return gen_box(size, size, length, target_panels, h_bottom, ratio, object_id)
    if cross != "circle":
        raise DomainError(f"unknown cross-section {cross!r}")
    _check_positive(size=size, length=length)
    R = size
    area = 2 * math.pi * R * (R + length)
    h = _coarse_h(area, target_panels)
    hb = h if h_bottom is None else min(h_bottom, h)
    z0 = -length / 2
    polys = [_disk(R, hb, z0, up=False), _disk(R, h, -z0, up=True)]
    rows = _side_rows(length, h_bottom and hb, h, ratio)
    for r0, r1 in zip(rows[:-1], rows[1:]):
        n = max(6, int(round(2 * math.pi * R / (r1 - r0))))
        Rp = _equal_area_radius(R, n)
        phi = np.linspace(0, 2 * math.pi, n + 1)
        P = np.stack([
            np.stack([Rp * np.cos(phi), Rp * np.sin(phi), np.full_like(phi, z0 + zz)], 1)
            for zz in (r0, r1)], axis=1)                    # (n+1, 2, 3)
        polys.append(_grid_quads(P))
    return from_polygons(np.concatenate(polys), object_id=object_id)


# --------------------------------------------------------------------------
# rigid motions


def rotation_matrix(axis, theta: float) -> np.ndarray:
    """Proper rotation by ``theta`` about ``axis`` (Rodrigues)."""
    a = np.asarray(axis, dtype=float)
    na = np.linalg.norm(a)
    if not na > 0:
        raise DomainError("rotation axis must be non-zero")
    a = a / na
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + math.sin(theta) * K + (1 - math.cos(theta)) * K @ K


def transform(mesh: Mesh, rotation=None, translation=None) -> Mesh:
    """Apply ``x -> rotation @ x + translation``; rotation must be proper orthogonal."""
    Q = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
    if Q.shape != (3, 3) or t.shape != (3,):
        raise DomainError("rotation must be 3x3 and translation a 3-vector")
    if not np.allclose(Q @ Q.T, np.eye(3), atol=1e-10) or not np.isclose(np.linalg.det(Q), 1.0):
        raise DomainError("rotation must be proper orthogonal")
    if rotation is None and translation is None:
        return mesh
    verts = None if mesh.vertices is None else mesh.vertices @ Q.T + t
    return replace(mesh, centroids=mesh.centroids @ Q.T + t, normals=mesh.normals @ Q.T,
                   areas=mesh.areas.copy(), vertices=verts)


def mirror_image(mesh: Mesh) -> Mesh:
    """Reflection through the plane z = 0 (the mesh must lie strictly above it)."""
    if mesh.image:
        if mesh.zmax >= 0:
            raise GeometryError("image mesh must lie strictly below z = 0")
    elif mesh.zmin <= 0:
        raise GeometryError("mesh touches or crosses the plane z = 0")
    flip = np.array([1.0, 1.0, -1.0])
    verts = None
    if mesh.vertices is not None:
        # reflection reverses orientation; reversing the vertex order restores
        # counter-clockwise order about the reflected normal
        verts = (mesh.vertices * flip)[:, ::-1]
    return replace(mesh, centroids=mesh.centroids * flip, normals=mesh.normals * flip,
                   areas=mesh.areas.copy(), vertices=verts, image=not mesh.image)


# --------------------------------------------------------------------------
# text I/O


def save_mesh(mesh: Mesh, path) -> None:
    rows = np.column_stack([mesh.centroids, mesh.normals, mesh.areas])
    with open(path, "w") as fh:
        fh.write(f"{len(mesh)}\n")
        np.savetxt(fh, rows, fmt="%.17g")


def load_mesh(path, object_id: int = 0) -> Mesh:
    path = Path(path)
    lines = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if s:
            lines.append((lineno, s))
    if not lines:
        raise GeometryError(f"{path}: empty mesh file")
    try:
        n = int(lines[0][1])
    except ValueError:
        raise GeometryError(f"{path}:{lines[0][0]}: header must be the panel count") from None
    if len(lines) - 1 != n:
        raise GeometryError(f"{path}: header says {n} panels, found {len(lines) - 1}")
    rows = []
    for lineno, s in lines[1:]:
        parts = s.split()
        if len(parts) != 7:
            raise GeometryError(f"{path}:{lineno}: expected 7 columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise GeometryError(f"{path}:{lineno}: {exc}") from None
    arr = np.array(rows).reshape(-1, 7)
    nrm = arr[:, 3:6]
    nrm = nrm / np.linalg.norm(nrm, axis=1, keepdims=True)
    return Mesh(arr[:, :3].copy(), nrm, arr[:, 6].copy(), None, object_id=object_id)
