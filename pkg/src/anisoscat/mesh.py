"""Interface-fitted triangulations of a disk holding star-shaped inclusions.

The outer circle carries ``N_b`` equi-angular nodes (node ``k`` of the ring
sits at angle ``2 pi k / N_b``); every interface carries nodes exactly on
its curve, each tagged with its curve parameter so that refinement and
morphing can move it along the exact geometry.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import triangle as _triangle
from scipy.sparse.linalg import spsolve

from ._validation import check_positive

_POSITIVITY_SAMPLES = 4096


class GeometryError(ValueError):
    """Curves overlap, leave the disk, or have a non-positive radius."""


@dataclass(frozen=True)
class StarCurve:
    """``gamma(theta) = center + r(theta) (cos theta, sin theta)``.

    ``coeffs = (alpha_0, alpha_1, ..., alpha_2M)`` with
    ``r = alpha_0 + sum_m alpha_{2m-1} cos(m theta) + alpha_{2m} sin(m theta)``.
    """

    center: tuple
    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.asarray(self.center, dtype=float).reshape(2))
        a = tuple(float(v) for v in np.asarray(self.coeffs, dtype=float).reshape(-1))
        if len(a) % 2 == 0:
            raise ValueError("radial coefficients must have odd length 2M+1")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "coeffs", a)

    @classmethod
    def circle(cls, radius, center=(0.0, 0.0)):
        return cls(center, (radius,))

    @classmethod
    def from_params(cls, params):
        """Build from the flat vector (a1, a2, alpha_0, ..., alpha_2M)."""
        params = np.asarray(params, dtype=float)
        return cls(params[:2], params[2:])

    @property
    def order(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def params(self) -> np.ndarray:
        return np.array(self.center + self.coeffs)

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        a = self.coeffs
        r = np.full(theta.shape, a[0])
        for m in range(1, self.order + 1):
            r = r + a[2 * m - 1] * np.cos(m * theta) + a[2 * m] * np.sin(m * theta)
        return r

    def radius_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        a = self.coeffs
        dr = np.zeros(theta.shape)
        for m in range(1, self.order + 1):
            dr = dr - m * a[2 * m - 1] * np.sin(m * theta) + m * a[2 * m] * np.cos(m * theta)
        return dr

    def point(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        return np.stack([self.center[0] + r * np.cos(theta), self.center[1] + r * np.sin(theta)], axis=-1)

    def tangent(self, theta):
        """d gamma / d theta."""
        theta = np.asarray(theta, dtype=float)
        r, dr = self.radius(theta), self.radius_derivative(theta)
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([dr * c - r * s, dr * s + r * c], axis=-1)

    def normal(self, theta):
        """Outward unit normal (the curve is traversed counter-clockwise)."""
        t = self.tangent(theta)
        n = np.stack([t[..., 1], -t[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def min_radius(self):
        th = 2 * np.pi * np.arange(_POSITIVITY_SAMPLES) / _POSITIVITY_SAMPLES
        return float(self.radius(th).min())

    def max_extent(self):
        th = 2 * np.pi * np.arange(_POSITIVITY_SAMPLES) / _POSITIVITY_SAMPLES
        return float(np.hypot(*self.point(th).T).max())

    def contains(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float)) - np.asarray(self.center)
        rho = np.hypot(x[:, 0], x[:, 1])
        th = np.arctan2(x[:, 1], x[:, 0])
        return rho < self.radius(th)

    def perimeter(self, samples=2048):
        th = 2 * np.pi * np.arange(samples) / samples
        return float(np.linalg.norm(self.tangent(th), axis=-1).mean() * 2 * np.pi)

    def arclength_parameters(self, count, samples=4096):
        """``count`` parameters equidistributed in arclength, starting at theta = 0."""
        th = 2 * np.pi * np.arange(samples + 1) / samples
        speed = np.linalg.norm(self.tangent(th), axis=-1)
        s = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(th))])
        target = s[-1] * np.arange(count) / count
        return np.interp(target, s, th)

    def area(self):
        # (1/2) int r^2 dtheta, exact for the trigonometric radius
        a = np.asarray(self.coeffs)
        return math.pi * (a[0] ** 2 + 0.5 * np.sum(a[1:] ** 2))


def validate_curves(curves, radius, margin=0.0):
    """Raise :class:`GeometryError` unless curves are positive, inside the disk and disjoint."""
    th = 2 * np.pi * np.arange(_POSITIVITY_SAMPLES) / _POSITIVITY_SAMPLES
    pts = []
    for j, c in enumerate(curves):
        if c.min_radius() <= 0:
            raise GeometryError(f"curve {j} has a non-positive radius")
        p = c.point(th)
        if np.hypot(*p.T).max() >= radius * (1 - margin):
            raise GeometryError(f"curve {j} is not strictly inside the disk of radius {radius * (1 - margin)}")
        pts.append(p)
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            if curves[j].contains(pts[i]).any() or curves[i].contains(pts[j]).any():
                raise GeometryError(f"curves {i} and {j} overlap")


@dataclass(frozen=True)
class Interface:
    """Ordered (counter-clockwise) interface nodes and their curve parameters."""

    nodes: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class Mesh2D:
    nodes: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray
    ring: np.ndarray
    radius: float
    curves: tuple
    interfaces: tuple
    mesh_id: str = field(default="", compare=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_boundary(self):
        return len(self.ring)

    def signed_areas(self):
        x = self.nodes[self.triangles]
        d1, d2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def diameters(self):
        x = self.nodes[self.triangles]
        e = np.stack([x[:, 1] - x[:, 0], x[:, 2] - x[:, 1], x[:, 0] - x[:, 2]], axis=1)
        return np.linalg.norm(e, axis=-1).max(axis=1)

    def max_diameter(self):
        return float(self.diameters().max())

    def centroids(self):
        return self.nodes[self.triangles].mean(axis=1)

    def interface_normals(self, j):
        inter = self.interfaces[j]
        return self.curves[j].normal(inter.theta)

    def refine(self) -> "Mesh2D":
        return refine(self)

    def morph(self, curves) -> "Mesh2D":
        return morph(self, curves)

    def to_text(self) -> str:
        """Plain-text export: header, then node, triangle and ring records."""
        buf = io.StringIO()
        buf.write("# anisoscat mesh v1\n")
        buf.write(f"# radius {self.radius!r} nodes {self.n_nodes} triangles {len(self.triangles)} ring {self.n_boundary}\n")
        for k, (x, y) in enumerate(self.nodes):
            buf.write(f"N {k} {x!r} {y!r}\n")
        for k, (t, g) in enumerate(zip(self.triangles, self.tags)):
            buf.write(f"T {k} {t[0]} {t[1]} {t[2]} {g}\n")
        for k, v in enumerate(self.ring):
            buf.write(f"B {k} {v}\n")
        for j, inter in enumerate(self.interfaces):
            for v, th in zip(inter.nodes, inter.theta):
                buf.write(f"I {j + 1} {v} {th!r}\n")
        return buf.getvalue()


def _ring_segments(start, count):
    idx = np.arange(count) + start
    return np.stack([idx, np.roll(idx, -1)], axis=-1)


def _mesh_id(nodes, triangles):
    import hashlib

    h = hashlib.sha1(nodes.tobytes())
    h.update(triangles.tobytes())
    return h.hexdigest()[:12]


def boundary_count(radius, h):
    return max(16, int(math.ceil(2 * math.pi * radius / h)))


def generate(curves, radius, h, n_boundary=None, quality=30.0) -> Mesh2D:
    """Constrained Delaunay mesh of the disk with the curves as internal boundaries.

    Triangle areas are capped at that of an equilateral triangle of side
    ``h``; no Steiner points are inserted on the outer circle or the
    interfaces, so every boundary node lies on the exact geometry.
    """
    check_positive(radius, "radius")
    check_positive(h, "h")
    if h >= radius / 4:
        raise GeometryError(f"mesh size {h} must be below R/4 = {radius / 4}")
    curves = tuple(curves)
    validate_curves(curves, radius)
    nb = boundary_count(radius, h) if n_boundary is None else int(n_boundary)
    th_b = 2 * np.pi * np.arange(nb) / nb
    verts = [radius * np.stack([np.cos(th_b), np.sin(th_b)], axis=-1)]
    segs = [_ring_segments(0, nb)]
    params = []
    offset = nb
    for c in curves:
        cnt = max(16, int(math.ceil(c.perimeter() / h)))
        th = c.arclength_parameters(cnt)
        params.append(th)
        verts.append(c.point(th))
        segs.append(_ring_segments(offset, cnt))
        offset += cnt
    regions = [[0.95 * radius, 0.0, 0, 0]]
    for j, c in enumerate(curves):
        regions.append([c.center[0], c.center[1], j + 1, 0])
    area = math.sqrt(3) / 4 * h * h
    pslg = dict(
        vertices=np.concatenate(verts),
        segments=np.concatenate(segs).astype(np.int32),
        regions=np.array(regions, dtype=float),
    )
    out = _triangle.triangulate(pslg, f"pq{quality:g}a{area:.17g}AYYQ")
    nodes = np.ascontiguousarray(out["vertices"], dtype=float)
    tris = np.ascontiguousarray(out["triangles"], dtype=np.int64)
    tags = np.rint(out["triangle_attributes"][:, 0]).astype(np.int64)
    if len(nodes) >= offset and not np.array_equal(nodes[:offset], pslg["vertices"]):
        raise GeometryError("triangulator moved input vertices")
    # exact boundary positions
    nodes[:nb] = radius * np.stack([np.cos(th_b), np.sin(th_b)], axis=-1)
    interfaces = []
    start = nb
    for c, th in zip(curves, params):
        idx = np.arange(start, start + len(th))
        nodes[idx] = c.point(th)
        interfaces.append(Interface(idx, th))
        start += len(th)
    mesh = Mesh2D(nodes, _orient(nodes, tris), tags, np.arange(nb), float(radius), curves, tuple(interfaces))
    return _stamp(mesh)


def _stamp(mesh):
    object.__setattr__(mesh, "mesh_id", _mesh_id(mesh.nodes, mesh.triangles))
    for arr in (mesh.nodes, mesh.triangles, mesh.tags, mesh.ring):
        arr.setflags(write=False)
    return mesh


def _orient(nodes, tris):
    x = nodes[tris]
    d1, d2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
    neg = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    tris = tris.copy()
    tris[neg, 1], tris[neg, 2] = tris[neg, 2].copy(), tris[neg, 1].copy()
    return tris


def _angle_mid(a, b):
    d = (b - a) % (2 * np.pi)
    return (a + 0.5 * d) % (2 * np.pi)


def refine(mesh: Mesh2D) -> Mesh2D:
    """Split every triangle into four through its edge midpoints.

    Midpoints of outer-ring and interface edges are placed on the exact
    circle / curve at the parameter midpoint, so the ring stays
    equi-angular and interface nodes stay on their curves.
    """
    tris = mesh.triangles
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    key = np.sort(edges, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n0 = mesh.n_nodes
    mids = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    edge_index = {(int(a), int(b)): k for k, (a, b) in enumerate(uniq)}

    def lookup(a, b):
        return edge_index[(min(a, b), max(a, b))]

    # outer ring: node k at angle 2 pi k / N_b
    nb = mesh.n_boundary
    new_ring = np.empty(2 * nb, dtype=np.int64)
    for k in range(nb):
        a, b = int(mesh.ring[k]), int(mesh.ring[(k + 1) % nb])
        e = lookup(a, b)
        ang = 2 * np.pi * (2 * k + 1) / (2 * nb)
        mids[e] = mesh.radius * np.array([np.cos(ang), np.sin(ang)])
        new_ring[2 * k] = a
        new_ring[2 * k + 1] = n0 + e
    new_interfaces = []
    for j, inter in enumerate(mesh.interfaces):
        cnt = len(inter.nodes)
        nodes_j = np.empty(2 * cnt, dtype=np.int64)
        theta_j = np.empty(2 * cnt)
        for k in range(cnt):
            a, b = int(inter.nodes[k]), int(inter.nodes[(k + 1) % cnt])
            e = lookup(a, b)
            th = _angle_mid(inter.theta[k], inter.theta[(k + 1) % cnt])
            mids[e] = mesh.curves[j].point(th)
            nodes_j[2 * k], theta_j[2 * k] = a, inter.theta[k]
            nodes_j[2 * k + 1], theta_j[2 * k + 1] = n0 + e, th
        new_interfaces.append(Interface(nodes_j, theta_j))
    m = n0 + inverse.reshape(3, -1).T  # midpoints of edges (01, 12, 20)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    m01, m12, m20 = m[:, 0], m[:, 1], m[:, 2]
    new_tris = np.concatenate(
        [
            np.stack([a, m01, m20], axis=1),
            np.stack([m01, b, m12], axis=1),
            np.stack([m20, m12, c], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ]
    )
    new_tags = np.tile(mesh.tags, 4)
    nodes = np.concatenate([mesh.nodes, mids])
    out = Mesh2D(
        nodes,
        _orient(nodes, new_tris),
        new_tags,
        new_ring,
        mesh.radius,
        mesh.curves,
        tuple(new_interfaces),
    )
    return _stamp(out)


def laplacian(nodes, tris):
    """P1 stiffness matrix of the scalar Laplacian (used for mesh morphing)."""
    x = nodes[tris]
    d = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (d[:, 2, 0] * (-d[:, 1, 1]) - d[:, 2, 1] * (-d[:, 1, 0]))
    k = np.einsum("tid,tjd->tij", d, d) / (4 * area[:, None, None])
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = len(nodes)
    return sp.csr_matrix((k.ravel(), (rows, cols)), shape=(n, n))


def morph(mesh: Mesh2D, curves) -> Mesh2D:
    """Same topology, interface nodes moved onto ``curves`` at their parameters.

    The interior displacement is the discrete harmonic extension of the
    interface displacement with the outer circle held fixed.
    """
    curves = tuple(curves)
    if len(curves) != len(mesh.curves):
        raise GeometryError("morphing needs the same number of curves")
    validate_curves(curves, mesh.radius)
    n = mesh.n_nodes
    disp = np.zeros((n, 2))
    fixed = np.zeros(n, dtype=bool)
    fixed[mesh.ring] = True
    for c, inter in zip(curves, mesh.interfaces):
        disp[inter.nodes] = c.point(inter.theta) - mesh.nodes[inter.nodes]
        fixed[inter.nodes] = True
    free = np.nonzero(~fixed)[0]
    if free.size:
        lap = laplacian(mesh.nodes, mesh.triangles)
        kff = lap[free][:, free].tocsc()
        rhs = -lap[free][:, fixed] @ disp[fixed]
        disp[free] = np.column_stack([spsolve(kff, rhs[:, 0]), spsolve(kff, rhs[:, 1])])
    nodes = mesh.nodes + disp
    for c, inter in zip(curves, mesh.interfaces):
        nodes[inter.nodes] = c.point(inter.theta)
    out = Mesh2D(nodes, mesh.triangles.copy(), mesh.tags.copy(), mesh.ring.copy(), mesh.radius, curves, mesh.interfaces)
    if (out.signed_areas() <= 0).any():
        raise GeometryError("morph inverted triangles; perturbation too large for this mesh")
    return _stamp(out)


def node_velocity(mesh: Mesh2D, j: int, field_on_interface) -> np.ndarray:
    """Harmonic extension of an interface velocity field (zero on the outer circle).

    ``field_on_interface`` has shape (len(interface j), 2). Returns (n_nodes, 2).
    """
    n = mesh.n_nodes
    vel = np.zeros((n, 2))
    fixed = np.zeros(n, dtype=bool)
    fixed[mesh.ring] = True
    for inter in mesh.interfaces:
        fixed[inter.nodes] = True
    vel[mesh.interfaces[j].nodes] = field_on_interface
    free = np.nonzero(~fixed)[0]
    if free.size:
        lap = laplacian(mesh.nodes, mesh.triangles)
        kff = lap[free][:, free].tocsc()
        rhs = -lap[free][:, fixed] @ vel[fixed]
        vel[free] = np.column_stack([spsolve(kff, rhs[:, 0]), spsolve(kff, rhs[:, 1])])
    return vel
