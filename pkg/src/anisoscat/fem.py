"""P1 finite elements for time-harmonic elasticity in a disk closed by the DtN map.

Unknowns are nodal displacements, two per node (``dof = 2 * node + c``).
The matrix is

    K = sum_T  area_T (B^T C B - omega^2 rho M_T)  -  2 pi R F^H W F,

where ``F`` is the trapezoidal Fourier analysis of ring values onto the
``(P_n, S_n)`` basis and ``W`` the block-diagonal stack of DtN matrices.
A displacement jump ``u_inner = u_outer + f`` across an interface is
eliminated by keeping one set of dofs and moving ``K_T f`` of every
inclusion element to the right-hand side, so one factorization serves the
scattering problem, the transmission problems and every derivative solve.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import dtn2d
from .incident import IncidentField, eval_incident, eval_incident_gradient, traction
from .material import IsotropicBackground, StiffnessTensor2D
from .mesh import Mesh2D


class AssemblyError(ValueError):
    pass


class NyquistError(AssemblyError):
    """More DtN modes requested than the boundary ring can resolve."""


class SolverError(RuntimeError):
    pass


# degree-4 symmetric rule on the reference triangle (weights sum to 1)
_A1, _B1, _W1 = 0.445948490915965, 0.108103018168070, 0.223381589678011
_A2, _B2, _W2 = 0.091576213509771, 0.816847572980459, 0.109951743655322
QUAD_BARY = np.array(
    [[_A1, _A1, _B1], [_A1, _B1, _A1], [_B1, _A1, _A1], [_A2, _A2, _B2], [_A2, _B2, _A2], [_B2, _A2, _A2]]
)
QUAD_W = np.array([_W1] * 3 + [_W2] * 3)

_GAUSS_EDGE = (np.array([0.5 - math.sqrt(15) / 10, 0.5, 0.5 + math.sqrt(15) / 10]), np.array([5, 8, 5]) / 18.0)


def p1_geometry(nodes, tris):
    """Areas (T,) and shape-function gradients (T, 3, 2)."""
    x = nodes[tris]
    d1, d2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    inv = np.empty((len(tris), 2, 2))
    inv[:, 0, 0], inv[:, 0, 1] = d2[:, 1] / det, -d2[:, 0] / det
    inv[:, 1, 0], inv[:, 1, 1] = -d1[:, 1] / det, d1[:, 0] / det
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("ak,tkd->tad", ref, inv)
    return 0.5 * det, grads


def strain_matrix(grads):
    """Engineering-strain operator B (T, 3, 6): (e11, e22, 2 e12) = B @ u_local."""
    t = grads.shape[0]
    b = np.zeros((t, 3, 6))
    b[:, 0, 0::2] = grads[:, :, 0]
    b[:, 1, 1::2] = grads[:, :, 1]
    b[:, 2, 0::2] = grads[:, :, 1]
    b[:, 2, 1::2] = grads[:, :, 0]
    return b


_MASS_REF = (np.ones((3, 3)) + np.eye(3)) / 12.0


def element_matrices(mesh: Mesh2D, materials, omega):
    """Per-element stiffness and mass, shape (T, 6, 6) each (real)."""
    area, grads = p1_geometry(mesh.nodes, mesh.triangles)
    b = strain_matrix(grads)
    voigt = np.stack([materials[int(g)].voigt for g in mesh.tags])
    rho = np.array([np.real(materials[int(g)].rho) for g in mesh.tags])
    ke = area[:, None, None] * np.einsum("tki,tkl,tlj->tij", b, voigt, b)
    me = np.zeros_like(ke)
    for c in range(2):
        me[:, c::2, c::2] = _MASS_REF
    me *= (rho * area)[:, None, None]
    return ke, me


def element_dofs(tris):
    return np.stack([2 * tris[:, a] + c for a in range(3) for c in range(2)], axis=1)


def scatter_matrix(mats, dofs, n):
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    return sp.csr_matrix((mats.ravel(), (rows, cols)), shape=(n, n))


def scatter_vector(vecs, dofs, n):
    out = np.zeros(n, dtype=np.result_type(vecs, complex))
    np.add.at(out, dofs.ravel(), vecs.ravel())
    return out


def ring_analysis(mesh: Mesh2D, n_modes):
    """Trapezoidal analysis operator F, shape (2N+1, 2, 2 N_b).

    ``F[k, 0] @ u_ring`` is the P-coefficient of order ``n = k - N``,
    ``F[k, 1] @ u_ring`` the S-coefficient; ``u_ring`` interleaves (x, y).
    """
    nb = mesh.n_boundary
    th = 2 * np.pi * np.arange(nb) / nb
    r_hat = np.stack([np.cos(th), np.sin(th)], axis=-1)
    t_hat = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    orders = np.arange(-n_modes, n_modes + 1)
    e = np.exp(-1j * np.outer(orders, th)) / nb
    f = np.empty((len(orders), 2, 2 * nb), dtype=complex)
    f[:, 0, 0::2] = e * r_hat[:, 0]
    f[:, 0, 1::2] = e * r_hat[:, 1]
    f[:, 1, 0::2] = e * t_hat[:, 0]
    f[:, 1, 1::2] = e * t_hat[:, 1]
    return orders, f


def resolve_modes(params: dtn2d.DtnParams, n_boundary: int) -> dtn2d.DtnParams:
    """Fix the DtN truncation against the ring size.

    Unset truncation becomes ``min(ceil(k_s R) + 16, (N_b - 1) // 2)``;
    an explicit value that breaks ``2 N + 1 <= N_b`` raises.
    """
    cap = (n_boundary - 1) // 2
    if params.n_modes is None:
        return params.with_modes(min(params.modes, cap))
    if params.n_modes > cap:
        raise NyquistError(f"N_t={params.n_modes} needs at least {2 * params.n_modes + 1} ring nodes, mesh has {n_boundary}")
    return params


def materials_for(mesh: Mesh2D, background: IsotropicBackground, inclusions):
    """Map region tag -> stiffness (tag 0 is the background)."""
    mats = {0: background.stiffness()}
    for j, c in enumerate(inclusions):
        mats[j + 1] = c
    missing = set(np.unique(mesh.tags).tolist()) - set(mats)
    if missing:
        raise AssemblyError(f"no material for region tags {sorted(missing)}")
    return mats


@dataclass
class AssembledSystem:
    mesh: Mesh2D
    materials: dict
    background: IsotropicBackground
    omega: float
    dtn: dtn2d.DtnParams
    K: sp.csc_matrix
    K_volume: sp.csr_matrix
    dtn_block: np.ndarray
    ring_dofs: np.ndarray
    elem_k: np.ndarray
    elem_m: np.ndarray
    elem_dofs: np.ndarray
    _lu: object = field(default=None, repr=False)
    factor_seconds: float = 0.0

    @property
    def n_dofs(self):
        return self.K.shape[0]

    def factorize(self):
        if self._lu is None:
            t0 = time.perf_counter()
            try:
                # the pattern is symmetric, so a symmetric ordering with weak diagonal pivoting fills least
                self._lu = splu(self.K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.1, options=dict(SymmetricMode=True))
            except RuntimeError as exc:  # singular factor
                raise SolverError(f"LU factorization failed on mesh {self.mesh.mesh_id}: {exc}") from exc
            self.factor_seconds = time.perf_counter() - t0
        return self._lu

    def solve(self, rhs):
        lu = self.factorize()
        x = lu.solve(np.asarray(rhs, dtype=complex))
        if not np.all(np.isfinite(x)):
            raise SolverError("non-finite solution; the system is numerically singular")
        return x

    def element_operator(self):
        """Local volume operators K_T - omega^2 M_T, shape (T, 6, 6)."""
        return self.elem_k - self.omega**2 * self.elem_m


def assemble(mesh: Mesh2D, materials, background: IsotropicBackground, omega, dtn: dtn2d.DtnParams):
    """Volume form minus the DtN boundary term on the outer ring."""
    if abs(dtn.radius - mesh.radius) > 1e-12 * mesh.radius:
        raise AssemblyError(f"DtN radius {dtn.radius} differs from mesh radius {mesh.radius}")
    if abs(dtn.omega - omega) > 1e-14 * omega:
        raise AssemblyError("DtN frequency differs from the assembly frequency")
    missing = set(np.unique(mesh.tags).tolist()) - set(materials)
    if missing:
        raise AssemblyError(f"no material for region tags {sorted(missing)}")
    dtn = resolve_modes(dtn, mesh.n_boundary)
    n = 2 * mesh.n_nodes
    ke, me = element_matrices(mesh, materials, omega)
    dofs = element_dofs(mesh.triangles)
    k_vol = scatter_matrix(ke - omega**2 * me, dofs, n)
    orders, f = ring_analysis(mesh, dtn.modes)
    w = np.stack([dtn2d.mode_matrices(dtn, int(k)).W for k in orders])
    ff = f.reshape(-1, f.shape[-1])
    wbig = sp.block_diag(list(w)).toarray()
    block = 2 * np.pi * dtn.radius * (ff.conj().T @ wbig @ ff)
    ring_dofs = np.stack([2 * mesh.ring, 2 * mesh.ring + 1], axis=1).ravel()
    rr, cc = np.meshgrid(ring_dofs, ring_dofs, indexing="ij")
    k_dtn = sp.csr_matrix((block.ravel(), (rr.ravel(), cc.ravel())), shape=(n, n))
    k = (k_vol.astype(complex) - k_dtn).tocsc()
    return AssembledSystem(mesh, materials, background, omega, dtn, k, k_vol, block, ring_dofs, ke, me, dofs)


@dataclass(frozen=True)
class FieldSolution:
    """Nodal displacement plus the inclusion-side offsets at interface nodes."""

    mesh: Mesh2D
    values: np.ndarray
    omega: float
    jumps: tuple = ()
    incidence: object = None

    @property
    def mesh_id(self):
        return self.mesh.mesh_id

    def element_values(self):
        """Nodal values seen by each triangle, shape (T, 3, 2)."""
        v = self.values[self.mesh.triangles].copy()
        for j, fj in enumerate(self.jumps):
            if fj is None:
                continue
            pos = _interface_position(self.mesh, j)
            inside = self.mesh.tags == j + 1
            loc = pos[self.mesh.triangles[inside]]
            hit = loc >= 0
            sub = v[inside]
            sub[hit] += fj[loc[hit]]
            v[inside] = sub
        return v

    def element_gradients(self):
        """Constant displacement gradient per triangle, shape (T, 2, 2)."""
        _, grads = p1_geometry(self.mesh.nodes, self.mesh.triangles)
        return np.einsum("tac,tad->tcd", self.element_values(), grads)

    def ring_values(self):
        return self.values[self.mesh.ring]

    def boundary_trace(self, n_modes, subtract=None):
        vals = self.ring_values()
        if subtract is not None:
            vals = vals - subtract
        return dtn2d.BoundaryTrace.from_samples(vals, n_modes)

    def scaled(self, factor):
        jumps = tuple(None if f is None else f * factor for f in self.jumps)
        return replace(self, values=self.values * factor, jumps=jumps)

    def to_csv(self) -> str:
        rows = ["node,x,y,re_u1,im_u1,re_u2,im_u2,region"]
        region = np.zeros(self.mesh.n_nodes, dtype=int)
        for j, inter in enumerate(self.mesh.interfaces):
            region[inter.nodes] = -1  # interface nodes carry the background-side value
        inside = np.zeros(self.mesh.n_nodes, dtype=int)
        for t, g in zip(self.mesh.triangles, self.mesh.tags):
            inside[t] = np.maximum(inside[t], g)
        region = np.where(region == -1, 0, inside)
        for k, ((x, y), (u1, u2)) in enumerate(zip(self.mesh.nodes, self.values)):
            rows.append(f"{k},{x:.12g},{y:.12g},{u1.real:.12g},{u1.imag:.12g},{u2.real:.12g},{u2.imag:.12g},{region[k]}")
        return "\n".join(rows) + "\n"


def _interface_position(mesh: Mesh2D, j):
    pos = np.full(mesh.n_nodes, -1, dtype=np.int64)
    pos[mesh.interfaces[j].nodes] = np.arange(len(mesh.interfaces[j].nodes))
    return pos


def jump_load(sys: AssembledSystem, jumps):
    """Right-hand side contribution -sum_T (K_T - omega^2 M_T) f_T of interface jumps."""
    mesh = sys.mesh
    n = sys.n_dofs
    rhs = np.zeros(n, dtype=complex)
    ops = None
    for j, fj in enumerate(jumps):
        if fj is None:
            continue
        fj = np.asarray(fj)
        inside = np.nonzero(mesh.tags == j + 1)[0]
        pos = _interface_position(mesh, j)[mesh.triangles[inside]]
        touched = (pos >= 0).any(axis=1)
        el = inside[touched]
        loc = pos[touched]
        floc = np.zeros((len(el), 3, 2), dtype=complex)
        hit = loc >= 0
        floc[hit] = fj[loc[hit]]
        if ops is None:
            ops = sys.element_operator()
        contrib = -np.einsum("tij,tj->ti", ops[el], floc.reshape(len(el), 6))
        rhs += scatter_vector(contrib, sys.elem_dofs[el], n)
    return rhs


def interface_edges(mesh: Mesh2D, j):
    inter = mesh.interfaces[j]
    a = inter.nodes
    return np.stack([a, np.roll(a, -1)], axis=1)


def neumann_load(mesh: Mesh2D, j, density):
    """Nodal load int_Gamma g . phi over the polygonal interface j.

    ``density(points, normals)`` returns g at edge quadrature points (m, 2);
    normals are the outward polygon-edge normals.
    """
    edges = interface_edges(mesh, j)
    xa, xb = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
    d = xb - xa
    length = np.hypot(d[:, 0], d[:, 1])
    nrm = np.stack([d[:, 1], -d[:, 0]], axis=-1) / length[:, None]
    s, w = _GAUSS_EDGE
    pts = xa[:, None, :] + s[None, :, None] * d[:, None, :]
    g = np.asarray(density(pts.reshape(-1, 2), np.repeat(nrm, len(s), axis=0))).reshape(len(edges), len(s), 2)
    wa = (w * (1 - s))[None, :, None] * g * length[:, None, None]
    wb = (w * s)[None, :, None] * g * length[:, None, None]
    load = np.zeros((mesh.n_nodes, 2), dtype=complex)
    np.add.at(load, edges[:, 0], wa.sum(axis=1))
    np.add.at(load, edges[:, 1], wb.sum(axis=1))
    return load.ravel()


def incident_load(sys: AssembledSystem, f: IncidentField):
    """int_{Gamma_R} (T u_in - DtN u_in) . phi with ring trapezoidal weights."""
    mesh = sys.mesh
    f.check_outside(mesh.radius)
    ring = mesh.nodes[mesh.ring]
    nu = ring / mesh.radius
    bg = sys.background
    t_in = traction(eval_incident_gradient(f, ring), nu, bg.lam, bg.mu)
    u_in = eval_incident(f, ring).ravel()
    nb = mesh.n_boundary
    rhs = np.zeros(sys.n_dofs, dtype=complex)
    rhs[sys.ring_dofs] = 2 * np.pi * mesh.radius / nb * t_in.ravel() - sys.dtn_block @ u_in
    return rhs


def solve_scattering(sys: AssembledSystem, incidence: IncidentField) -> FieldSolution:
    """Total field for an incident wave; the scattered trace is ``u - u_in`` on the ring."""
    u = sys.solve(incident_load(sys, incidence))
    return FieldSolution(sys.mesh, u.reshape(-1, 2), sys.omega, (), incidence)


def solve_scattering_many(sys: AssembledSystem, incidences):
    rhs = np.column_stack([incident_load(sys, f) for f in incidences])
    u = sys.solve(rhs)
    return [FieldSolution(sys.mesh, u[:, k].reshape(-1, 2), sys.omega, (), f) for k, f in enumerate(incidences)]


def solve_transmission(sys: AssembledSystem, jump_f, jump_g, extra_load=None) -> FieldSolution:
    """Solve with ``u_inner - u_outer = f`` and a traction jump load on each interface.

    ``jump_f[j]`` holds f at the interface-j nodes (shape (cnt_j, 2)) or None;
    ``jump_g[j]`` is either a callable ``g(points, normals)`` or a precomputed
    nodal load of length ``2 n_nodes``, or None.
    """
    mesh = sys.mesh
    nint = len(mesh.interfaces)
    jump_f = list(jump_f) + [None] * (nint - len(jump_f))
    jump_g = list(jump_g) + [None] * (nint - len(jump_g))
    rhs = jump_load(sys, jump_f)
    for j, g in enumerate(jump_g):
        if g is None:
            continue
        rhs += neumann_load(mesh, j, g) if callable(g) else np.asarray(g)
    if extra_load is not None:
        rhs += extra_load
    u = sys.solve(rhs)
    jumps = tuple(None if f is None else np.asarray(f, dtype=complex) for f in jump_f)
    return FieldSolution(mesh, u.reshape(-1, 2), sys.omega, jumps)


def error_norms(sol: FieldSolution, interior, exterior):
    """(E0, E1): L2 and full H1 norms of the error, degree-4 quadrature per triangle.

    ``interior`` is used on inclusion triangles (any tag > 0), ``exterior``
    on background triangles; both expose ``value(x)`` and ``gradient(x)``.
    """
    mesh = sol.mesh
    area, grads = p1_geometry(mesh.nodes, mesh.triangles)
    vals = sol.element_values()
    gh = np.einsum("tac,tad->tcd", vals, grads)
    x = mesh.nodes[mesh.triangles]
    e0 = e1 = 0.0
    for q, wq in zip(QUAD_BARY, QUAD_W):
        pts = np.einsum("a,tad->td", q, x)
        uh = np.einsum("a,tac->tc", q, vals)
        for fld, sel in ((interior, mesh.tags > 0), (exterior, mesh.tags == 0)):
            if not sel.any():
                continue
            du = fld.value(pts[sel]) - uh[sel]
            dg = fld.gradient(pts[sel]) - gh[sel]
            e0 += np.sum(wq * area[sel] * np.sum(np.abs(du) ** 2, axis=1))
            e1 += np.sum(wq * area[sel] * np.sum(np.abs(dg) ** 2, axis=(1, 2)))
    return math.sqrt(e0), math.sqrt(e0 + e1)


def radiated_power(params: dtn2d.DtnParams, trace: dtn2d.BoundaryTrace):
    """Im int_{Gamma_R} DtN(w) . conj(w) ds, mode by mode (non-negative for radiating data)."""
    out = dtn2d.dtn_apply(params, trace)
    keep = np.abs(trace.orders) <= params.modes
    return float(2 * np.pi * params.radius * np.imag(np.sum(out.coeffs * trace.coeffs[keep].conj())))


def volume_symmetry_defect(sys: AssembledSystem):
    k = sys.K_volume
    d = abs(k - k.T)
    return float(d.max()) / max(float(abs(k).max()), 1e-300)


def isotropic_materials(mesh, background, inclusion_lame_rho):
    """Shortcut for inclusions given as (lam, mu, rho) triples."""
    from .material import isotropic_stiffness

    return materials_for(mesh, background, [isotropic_stiffness(*t) for t in inclusion_lame_rho])


__all__ = [
    "AssembledSystem",
    "FieldSolution",
    "StiffnessTensor2D",
    "assemble",
    "error_norms",
    "solve_scattering",
    "solve_transmission",
]
