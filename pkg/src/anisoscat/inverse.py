"""Shape reconstruction of inclusions from near-field data on the outer circle.

Each inclusion boundary is ``center + r_M(theta) (cos theta, sin theta)``
with parameter vector ``(a1, a2, alpha_0, alpha_1, ..., alpha_2M)``. The
forward map returns the total field at measurement angles on the circle;
its derivative with respect to one parameter is the exterior trace of a
transmission problem whose jumps are built from the forward field and the
boundary velocity ``h_n = d gamma / d Lambda_n``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import dtn2d, fem
from .incident import IncidentField, PlaneWave
from .material import IsotropicBackground, StiffnessTensor2D
from .mesh import GeometryError, Mesh2D, StarCurve, generate, node_velocity, validate_curves


# ---------------------------------------------------------------- shapes


def perturbation_field(order: int, n: int, theta):
    """Boundary velocity d gamma / d Lambda_n (``n`` is 1-based), shape (m, 2)."""
    theta = np.asarray(theta, dtype=float)
    if not 1 <= n <= 2 * order + 3:
        raise ValueError(f"parameter index {n} outside 1..{2 * order + 3}")
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    if n == 1:
        return np.broadcast_to([1.0, 0.0], e.shape).copy()
    if n == 2:
        return np.broadcast_to([0.0, 1.0], e.shape).copy()
    if n == 3:
        return e
    if n % 2 == 0:
        return np.cos((n - 2) // 2 * theta)[..., None] * e
    return np.sin((n - 3) // 2 * theta)[..., None] * e


@dataclass(frozen=True)
class ShapeParams:
    """Parameter vectors of all inclusions, each of length 2M + 3."""

    vectors: tuple
    order: int

    def __post_init__(self):
        vecs = tuple(np.array(v, dtype=float).reshape(-1) for v in self.vectors)
        for v in vecs:
            if len(v) != 2 * self.order + 3:
                raise ValueError(f"parameter vector of length {len(v)} does not match M={self.order}")
            v.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_curves(cls, curves, order):
        vecs = []
        for c in curves:
            v = np.zeros(2 * order + 3)
            p = c.params[: 2 * order + 3]
            v[: len(p)] = p
            vecs.append(v)
        return cls(tuple(vecs), order)

    @classmethod
    def circles(cls, centers, radius, order):
        return cls.from_curves([StarCurve.circle(radius, c) for c in centers], order)

    @property
    def n_obstacles(self):
        return len(self.vectors)

    @property
    def n_params(self):
        return 2 * self.order + 3

    def curves(self):
        return tuple(StarCurve.from_params(v) for v in self.vectors)

    def flat(self):
        return np.concatenate(self.vectors)

    def with_flat(self, x):
        x = np.asarray(x, dtype=float)
        k = self.n_params
        return ShapeParams(tuple(x[i * k : (i + 1) * k] for i in range(self.n_obstacles)), self.order)

    def to_json(self):
        return [v.tolist() for v in self.vectors]


# ---------------------------------------------------------------- scenario and data


@dataclass(frozen=True)
class Scenario:
    """Everything of an experiment except the unknown shapes."""

    background: IsotropicBackground
    inclusions: tuple
    radius: float
    frequencies: tuple
    directions: tuple
    h: float
    n_meas: int = 64
    n_modes: int | None = None
    polarization: tuple = (1.0, 0.0)
    min_radius_fraction: float = 0.05
    max_extent_fraction: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "inclusions", tuple(self.inclusions))
        object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))
        object.__setattr__(self, "directions", tuple(float(a) for a in self.directions))
        if list(self.frequencies) != sorted(self.frequencies):
            raise ValueError("frequencies must be ascending")
        if self.n_meas <= 0 or not self.frequencies or not self.directions:
            raise ValueError("need at least one measurement point, frequency and direction")

    def incidence(self, omega, j):
        cp, cs = self.polarization
        return IncidentField(PlaneWave.from_angle(self.directions[j], cp, cs), omega, self.background)

    def meas_angles(self):
        return 2 * np.pi * np.arange(self.n_meas) / self.n_meas

    def check_shape(self, shape: ShapeParams):
        """Feasibility used by the descent safeguard; raises GeometryError."""
        curves = shape.curves()
        rmin = self.min_radius_fraction * self.radius
        for c in curves:
            if c.min_radius() <= rmin:
                raise GeometryError(f"radius {c.min_radius():.4g} below the safeguard {rmin:.4g}")
            if c.max_extent() >= self.max_extent_fraction * self.radius:
                raise GeometryError("curve leaves the admissible disk")
        validate_curves(curves, self.radius)
        return curves

    def dtn_params(self, omega, extra_modes=0, n_boundary=None):
        p = dtn2d.DtnParams(self.radius, omega, self.background)
        nt = self.n_modes if self.n_modes is not None else p.modes
        if n_boundary is not None and self.n_modes is None:
            nt = min(nt, (n_boundary - 1) // 2 - extra_modes)
        return p.with_modes(nt + extra_modes)


@dataclass(frozen=True)
class MeasurementSet:
    """Total field at ``z_i = R (cos theta_i, sin theta_i)``; values (K, N_inc, N_mea, 2)."""

    theta: np.ndarray
    radius: float
    frequencies: tuple
    directions: tuple
    values: np.ndarray

    def __post_init__(self):
        k, j, m = len(self.frequencies), len(self.directions), len(self.theta)
        if self.values.shape != (k, j, m, 2):
            raise ValueError(f"values shape {self.values.shape} != {(k, j, m, 2)}")

    @property
    def points(self):
        return self.radius * np.stack([np.cos(self.theta), np.sin(self.theta)], axis=-1)

    def norm(self):
        return float(np.linalg.norm(self.values))

    def with_noise(self, level, seed):
        """Multiplicative complex Gaussian noise ``u (1 + level * xi)``."""
        rng = np.random.default_rng(seed)
        xi = rng.standard_normal(self.values.shape) + 1j * rng.standard_normal(self.values.shape)
        return MeasurementSet(self.theta, self.radius, self.frequencies, self.directions, self.values * (1 + level * xi / math.sqrt(2)))


def ring_sampler(mesh: Mesh2D, theta):
    """Matrix (m, N_b) of the piecewise-linear trace on the ring at angles ``theta``."""
    nb = mesh.n_boundary
    s = np.mod(np.asarray(theta, dtype=float), 2 * np.pi) * nb / (2 * np.pi)
    k = np.floor(s).astype(int) % nb
    w = s - np.floor(s)
    out = np.zeros((len(s), nb))
    out[np.arange(len(s)), k] += 1 - w
    out[np.arange(len(s)), (k + 1) % nb] += w
    return out


@dataclass
class ForwardState:
    """Mesh, assembled system and forward solutions at one frequency."""

    shape: ShapeParams
    scenario: Scenario
    omega: float
    mesh: Mesh2D
    system: fem.AssembledSystem
    solutions: dict
    sampler: np.ndarray

    def samples(self, j):
        return self.sampler @ self.solutions[j].ring_values()


def build_mesh(shape: ShapeParams, scenario: Scenario, h=None):
    curves = scenario.check_shape(shape)
    return generate(curves, scenario.radius, scenario.h if h is None else h)


def forward_state(shape, scenario, omega, directions=None, mesh=None, extra_modes=0, h=None):
    """Solve the scattering problems for the given direction indices at one frequency."""
    if mesh is None:
        mesh = build_mesh(shape, scenario, h)
    directions = range(len(scenario.directions)) if directions is None else directions
    dtn = scenario.dtn_params(omega, extra_modes, mesh.n_boundary)
    mats = fem.materials_for(mesh, scenario.background, scenario.inclusions)
    sys = fem.assemble(mesh, mats, scenario.background, omega, dtn)
    idx = list(directions)
    sols = fem.solve_scattering_many(sys, [scenario.incidence(omega, j) for j in idx])
    return ForwardState(shape, scenario, omega, mesh, sys, dict(zip(idx, sols)), ring_sampler(mesh, scenario.meas_angles()))


def forward_map(shape: ShapeParams, scenario: Scenario, h=None, extra_modes=0) -> MeasurementSet:
    """Total field at the measurement points for every frequency and direction."""
    mesh = build_mesh(shape, scenario, h)
    vals = np.empty((len(scenario.frequencies), len(scenario.directions), scenario.n_meas, 2), dtype=complex)
    for k, omega in enumerate(scenario.frequencies):
        st = forward_state(shape, scenario, omega, mesh=mesh, extra_modes=extra_modes)
        for j in range(len(scenario.directions)):
            vals[k, j] = st.samples(j)
    return MeasurementSet(scenario.meas_angles(), scenario.radius, scenario.frequencies, scenario.directions, vals)


def synthetic_data(truth_curves, scenario: Scenario, refine_factor=2.0, extra_modes=8, noise=0.0, seed=0):
    """Data on a finer mesh with more DtN modes than the inversion uses."""
    order = max(c.order for c in truth_curves)
    shape = ShapeParams.from_curves(truth_curves, order)
    data = forward_map(shape, scenario, h=scenario.h / refine_factor, extra_modes=extra_modes)
    return data.with_noise(noise, seed) if noise > 0 else data


# ---------------------------------------------------------------- Fréchet derivative


def _one_sided_node_gradients(mesh: Mesh2D, values, tag, nodes, layers=2):
    """Gradient at ``nodes`` from a quadratic least-squares fit on one side.

    The patch is the ``layers``-ring of triangles carrying ``tag`` around
    each node; fitting a quadratic to the nodal values recovers the
    one-sided gradient to second order, where plain element averaging is
    only first order at a curved interface.
    """
    sel = mesh.triangles[mesh.tags == tag]
    node_tris = {}
    for t, tri in enumerate(sel):
        for a in tri:
            node_tris.setdefault(int(a), []).append(t)
    out = np.empty((len(nodes), 2, 2), dtype=complex)
    for k, p in enumerate(nodes):
        patch = {int(p)}
        for _ in range(layers):
            patch |= {int(a) for q in patch for t in node_tris.get(q, ()) for a in sel[t]}
        if len(patch) < 6:
            raise GeometryError(f"interface node {p} has too few neighbours in region {tag}")
        idx = np.array(sorted(patch))
        d = mesh.nodes[idx] - mesh.nodes[p]
        scale = np.abs(d).max()
        x, y = d[:, 0] / scale, d[:, 1] / scale
        basis = np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y])
        coef, *_ = np.linalg.lstsq(basis, values[idx], rcond=None)
        out[k] = coef[1:3].T / scale
    return out


def _edge_sides(mesh: Mesh2D, edges, inner_tag):
    """Triangle on the inclusion side and on the background side of every edge."""
    tris = mesh.triangles
    n = mesh.n_nodes
    local = np.array([[0, 1], [1, 2], [2, 0]])
    e = np.sort(tris[:, local], axis=2).reshape(-1, 2)
    keys = e[:, 0] * n + e[:, 1]
    owner = np.repeat(np.arange(len(tris)), 3)
    order = np.argsort(keys, kind="stable")
    keys, owner = keys[order], owner[order]
    q = np.sort(edges, axis=1)
    qk = q[:, 0] * n + q[:, 1]
    first = np.searchsorted(keys, qk)
    if np.any(first + 1 >= len(keys)) or np.any(keys[first] != qk) or np.any(keys[first + 1] != qk):
        raise GeometryError("interface edge is not shared by two triangles")
    t1, t2 = owner[first], owner[first + 1]
    swap = mesh.tags[t1] != inner_tag
    inner = np.where(swap, t2, t1)
    outer = np.where(swap, t1, t2)
    if np.any(mesh.tags[inner] != inner_tag) or np.any(mesh.tags[outer] != 0):
        raise GeometryError("interface edge does not separate the inclusion from the background")
    return inner, outer


@dataclass
class _InterfaceCache:
    edges: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    grad_in: np.ndarray
    grad_out: np.ndarray


def _interface_cache(state: ForwardState, l: int, sol: fem.FieldSolution):
    mesh = state.mesh
    edges = fem.interface_edges(mesh, l)
    inner, outer = _edge_sides(mesh, edges, l + 1)
    nodes = mesh.interfaces[l].nodes
    gin = _one_sided_node_gradients(mesh, sol.values, l + 1, nodes)
    gout = _one_sided_node_gradients(mesh, sol.values, 0, nodes)
    return _InterfaceCache(edges, inner, outer, gin, gout)


def transmission_jumps(state: ForwardState, j: int, l: int, n: int, scale=1.0, cache=None):
    """Jump data (f at interface nodes, nodal traction load) of the derivative problem.

    ``f = -(h.nu) [d_nu u]`` at the interface nodes; the traction jump
    ``omega^2 (h.nu) [rho u] - d_tau([sigma] rot h)`` enters weakly, its
    tangential derivative moved onto the test functions.
    """
    mesh = state.mesh
    sol = state.solutions[j]
    if cache is None:
        cache = _interface_cache(state, l, sol)
    curve = mesh.curves[l]
    inter = mesh.interfaces[l]
    order = state.shape.order
    th = inter.theta
    nu = curve.normal(th)
    hv = scale * perturbation_field(order, n, th)
    hn = np.einsum("mi,mi->m", hv, nu)
    dnu_in = np.einsum("mij,mj->mi", cache.grad_in, nu)
    dnu_out = np.einsum("mij,mj->mi", cache.grad_out, nu)
    f = -hn[:, None] * (dnu_in - dnu_out)

    mats = state.system.materials
    c_in, c_out = mats[l + 1], mats[0]
    sig_nodes = c_in.stress(cache.grad_in) - c_out.stress(cache.grad_out)
    drho = float(np.real(c_in.rho) - np.real(c_out.rho))
    u = sol.values
    a, b = cache.edges[:, 0], cache.edges[:, 1]
    xa, xb = mesh.nodes[a], mesh.nodes[b]
    length = np.linalg.norm(xb - xa, axis=1)
    tha = th
    dth = np.mod(np.roll(th, -1) - th, 2 * np.pi)
    s, w = fem._GAUSS_EDGE
    load = np.zeros((mesh.n_nodes, 2), dtype=complex)
    omega2 = state.omega**2
    for sq, wq in zip(s, w):
        tq = tha + sq * dth
        hq = scale * perturbation_field(order, n, tq)
        nq = curve.normal(tq)
        hnq = np.einsum("mi,mi->m", hq, nq)
        uq = (1 - sq) * u[a] + sq * u[b]
        mass = (omega2 * drho * wq * length * hnq)[:, None] * uq
        rot = np.stack([hq[:, 1], -hq[:, 0]], axis=-1)
        sig = (1 - sq) * sig_nodes + sq * np.roll(sig_nodes, -1, axis=0)
        tang = wq * np.einsum("mij,mj->mi", sig, rot)
        np.add.at(load, a, mass * (1 - sq) - tang)
        np.add.at(load, b, mass * sq + tang)
    return f, load.ravel()


def domain_load(state: ForwardState, j: int, velocity):
    """Right-hand side ``-dK u`` for nodes moving with ``velocity`` (n_nodes, 2)."""
    mesh = state.mesh
    sys = state.system
    u = state.solutions[j].values
    tris = mesh.triangles
    area, grads = fem.p1_geometry(mesh.nodes, tris)
    v = velocity[tris]
    moving = np.abs(v).max(axis=(1, 2)) > 0
    el = np.nonzero(moving)[0]
    gv = np.einsum("tai,taj->tij", v[el], grads[el])
    div = gv[:, 0, 0] + gv[:, 1, 1]
    dgrads = -np.einsum("tai,tij->taj", grads[el], gv)
    b = fem.strain_matrix(grads[el])
    db = fem.strain_matrix(dgrads)
    voigt = np.stack([sys.materials[int(g)].voigt for g in mesh.tags[el]])
    dk = div[:, None, None] * sys.elem_k[el] + area[el, None, None] * (
        np.einsum("tki,tkl,tlj->tij", db, voigt, b) + np.einsum("tki,tkl,tlj->tij", b, voigt, db)
    )
    dm = div[:, None, None] * sys.elem_m[el]
    dop = dk - sys.omega**2 * dm
    uloc = u[tris[el]].reshape(len(el), 6)
    contrib = -np.einsum("tij,tj->ti", dop, uloc)
    return fem.scatter_vector(contrib, sys.elem_dofs[el], sys.n_dofs)


def frechet_derivative(state: ForwardState, j: int, l: int, n: int, method="transmission"):
    """d(samples) / d Lambda_n^(l) for direction index ``j``; shape (N_mea, 2).

    ``method="transmission"`` solves the derivative transmission problem;
    ``method="domain"`` differentiates the discrete system along the mesh
    velocity that moves interface ``l`` with ``h_n``.
    """
    return jacobian(state, j, method, params=[(l, n)])[0]


def jacobian(state: ForwardState, j: int, method="transmission", params=None):
    """Derivatives for a list of (obstacle, 1-based index) pairs; shape (P, N_mea, 2)."""
    shape = state.shape
    if params is None:
        params = [(l, n) for l in range(shape.n_obstacles) for n in range(1, shape.n_params + 1)]
    mesh = state.mesh
    nint = len(mesh.interfaces)
    rhs = []
    caches = {}
    for l, n in params:
        if method == "transmission":
            if l not in caches:
                caches[l] = _interface_cache(state, l, state.solutions[j])
            f, load = transmission_jumps(state, j, l, n, cache=caches[l])
            jumps = [None] * nint
            jumps[l] = f
            rhs.append(fem.jump_load(state.system, jumps) + load)
        elif method == "domain":
            inter = mesh.interfaces[l]
            vel = node_velocity(mesh, l, perturbation_field(shape.order, n, inter.theta))
            rhs.append(domain_load(state, j, vel))
        else:
            raise ValueError(f"unknown derivative method {method!r}")
    du = state.system.solve(np.column_stack(rhs)).reshape(mesh.n_nodes, 2, len(params))
    ring = du[mesh.ring]
    return np.einsum("mk,kcp->pmc", state.sampler, ring)


# ---------------------------------------------------------------- objective


def objective_and_gradient(shape: ShapeParams, scenario: Scenario, data: MeasurementSet, freq_index=None, dir_index=None, method="transmission", mesh=None):
    """F = 1/2 sum |J_i - u_i|^2 over the selected frequencies/directions and its gradient.

    The gradient is ``Re sum_i dJ_i . conj(J_i - u_i)``, returned flat in
    obstacle-major order.
    """
    freqs = range(len(scenario.frequencies)) if freq_index is None else np.atleast_1d(freq_index)
    dirs = range(len(scenario.directions)) if dir_index is None else np.atleast_1d(dir_index)
    if mesh is None:
        mesh = build_mesh(shape, scenario)
    f_val = 0.0
    grad = np.zeros(shape.n_obstacles * shape.n_params)
    for k in freqs:
        st = forward_state(shape, scenario, scenario.frequencies[k], directions=dirs, mesh=mesh)
        for j in dirs:
            res = st.samples(j) - data.values[k, j]
            f_val += 0.5 * float(np.sum(np.abs(res) ** 2))
            jac = jacobian(st, j, method)
            grad += np.real(np.einsum("pmc,mc->p", jac, res.conj()))
    return f_val, grad


def objective(shape: ShapeParams, scenario: Scenario, data: MeasurementSet, freq_index=None, dir_index=None, mesh=None):
    """F alone, without the derivative solves."""
    freqs = range(len(scenario.frequencies)) if freq_index is None else np.atleast_1d(freq_index)
    dirs = range(len(scenario.directions)) if dir_index is None else np.atleast_1d(dir_index)
    if mesh is None:
        mesh = build_mesh(shape, scenario)
    f_val = 0.0
    for k in freqs:
        st = forward_state(shape, scenario, scenario.frequencies[k], directions=dirs, mesh=mesh)
        for j in dirs:
            f_val += 0.5 * float(np.sum(np.abs(st.samples(j) - data.values[k, j]) ** 2))
    return f_val


def relative_residual(shape: ShapeParams, scenario: Scenario, data: MeasurementSet):
    sim = forward_map(shape, scenario)
    return float(np.linalg.norm(sim.values - data.values) / data.norm())


# ---------------------------------------------------------------- descent


@dataclass
class DescentResult:
    shape: ShapeParams
    trajectory: list
    rerror: list
    records: list = field(default_factory=list)
    aborted_stages: list = field(default_factory=list)


def step_size(scenario: Scenario, omega, factor=0.005):
    """Default step ``factor / k_p(omega)``."""
    return factor / scenario.background.k_p(omega)


def descend(initial: ShapeParams, data: MeasurementSet, scenario: Scenario, iterations=10, step_factor=0.005, method="transmission", log=None, max_halvings=10, backtrack=False):
    """Fixed-step gradient descent sweeping directions inside ascending frequencies.

    After every frequency stage the relative residual over the whole data
    set is appended to ``rerror`` (the first entry is the initial guess).
    ``log`` is an optional callable receiving one dict per inner iteration.
    Infeasible steps are halved; with ``backtrack`` a step is also halved
    until the current objective does not increase.
    """
    shape = initial
    scenario.check_shape(shape)
    rerror = [relative_residual(shape, scenario, data)]
    traj = [shape]
    records = []
    aborted = []
    t0 = time.perf_counter()
    for m, omega in enumerate(scenario.frequencies):
        eps = step_size(scenario, omega, step_factor)
        stage_ok = True
        for j in range(len(scenario.directions)):
            for i in range(iterations):
                f_val, grad = objective_and_gradient(shape, scenario, data, m, j, method)
                x = shape.flat()
                step = eps
                for halving in range(max_halvings + 1):
                    cand = shape.with_flat(x - step * grad)
                    try:
                        scenario.check_shape(cand)
                    except GeometryError:
                        step /= 2
                        continue
                    if not backtrack or objective(cand, scenario, data, m, j) <= f_val:
                        break
                    step /= 2
                else:
                    aborted.append(m)
                    stage_ok = False
                    break
                shape = cand
                traj.append(shape)
                rec = dict(
                    schema=1,
                    stage=m,
                    direction=j,
                    iteration=i,
                    omega=omega,
                    objective=f_val,
                    grad_norm=float(np.linalg.norm(grad)),
                    step=step,
                    halvings=halving,
                    params=shape.to_json(),
                    wall_time=time.perf_counter() - t0,
                )
                records.append(rec)
                if log is not None:
                    log(rec)
            if not stage_ok:
                break
        rerror.append(relative_residual(shape, scenario, data))
    return DescentResult(shape, traj, rerror, records, aborted)


def jsonl_writer(stream):
    def write(rec):
        stream.write(json.dumps(rec, sort_keys=True) + "\n")

    return write


# ---------------------------------------------------------------- geometry metrics


def symmetric_difference_area(a: StarCurve, b: StarCurve, resolution=600):
    """Area of the symmetric difference of two star-shaped regions (grid count)."""
    th = 2 * np.pi * np.arange(2048) / 2048
    pts = np.concatenate([a.point(th), b.point(th)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    xs = np.linspace(lo[0], hi[0], resolution)
    ys = np.linspace(lo[1], hi[1], resolution)
    gx, gy = np.meshgrid(xs, ys)
    g = np.column_stack([gx.ravel(), gy.ravel()])
    diff = a.contains(g) ^ b.contains(g)
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return float(diff.sum() * cell)


def fit_star_curve(points_fn, center, order, samples=4096):
    """Least-squares radial Fourier fit of a closed curve about ``center``.

    ``points_fn(t)`` returns curve points for parameters ``t``; the curve
    must be star-shaped with respect to ``center``.
    """
    t = 2 * np.pi * np.arange(samples) / samples
    p = points_fn(t) - np.asarray(center)
    ang = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * np.pi)
    r = np.hypot(p[:, 0], p[:, 1])
    cols = [np.ones_like(ang)]
    for m in range(1, order + 1):
        cols += [np.cos(m * ang), np.sin(m * ang)]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), r, rcond=None)
    return StarCurve(center, coef)


# ---------------------------------------------------------------- reference scenario

DESK_TENSOR = np.array([[6.0, 8.0, 2.0], [8.0, 21.0, 10.0], [2.0, 10.0, 30.0]]) * 1e10


def kite(scale=0.6, center=(-1.5, 1.2)):
    def pts(t):
        x = np.cos(t) + 0.65 * np.cos(2 * t) - 0.65
        y = 1.5 * np.sin(t)
        return np.asarray(center) + scale * np.stack([x, y], axis=-1)

    return pts


def ellipse(a=0.9, b=0.55, center=(1.6, -1.1)):
    def pts(t):
        return np.asarray(center) + np.stack([a * np.cos(t), b * np.sin(t)], axis=-1)

    return pts


def desk_scenario(frequencies=(5000.0, 6000.0), directions=None, h=0.125, n_meas=64):
    """Two anisotropic inclusions in rock-like background, frequencies in rad/s."""
    bg = IsotropicBackground.from_velocities(2000.0, 3000.0, 1800.0)
    c = StiffnessTensor2D(DESK_TENSOR, 2400.0)
    if directions is None:
        directions = tuple(np.pi / 4 + np.pi / 2 * np.arange(4))
    return Scenario(bg, (c, c), 5.0, tuple(frequencies), tuple(directions), h, n_meas)


DESK_INITIAL_CENTERS = ((-1.3, 1.0), (1.3, -0.8))


def desk_truth(order=16):
    k = fit_star_curve(kite(), (-1.5 + 0.6 * (-0.3), 1.2), order)
    e = fit_star_curve(ellipse(), (1.6, -1.1), order)
    return k, e
