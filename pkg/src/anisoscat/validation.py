"""Manufactured transmission problems with closed-form solutions and mesh studies.

An inclusion field ``u`` and a radiating exterior field ``u_sc`` are
prescribed; the interface data are ``f = u - u_sc`` and
``g = sigma_C(u) nu - T u_sc``. The FE solution is compared against the
pair on a sequence of uniformly refined meshes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import dtn2d, fem
from .analytic import AnisotropicPlaneWave, RadialGradientField, TransmissionPair
from .incident import stress_traction
from .material import IsotropicBackground, StiffnessTensor2D, isotropic_stiffness
from .mesh import Mesh2D, StarCurve, generate

EXAMPLE2_TENSOR = dict(c11=10.5, c12=3.25, c13=-0.65, c22=13.0, c23=-1.52, c33=4.75, rho=3.0)
ROUNDED_TRIANGLE = StarCurve((0.0, 0.0), (2.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0))


@dataclass(frozen=True)
class ValidationProblem:
    name: str
    background: IsotropicBackground
    inclusion: StiffnessTensor2D
    curve: StarCurve
    radius: float
    omega: float
    h0: float
    pair: TransmissionPair

    def jump_data(self, mesh: Mesh2D):
        """Dirichlet jump at interface nodes and the traction-jump density."""
        inter = mesh.interfaces[0]
        x = mesh.nodes[inter.nodes]
        f = self.pair.interior.value(x) - self.pair.exterior.value(x)
        bg = self.background

        def g(pts, nu):
            inner = np.einsum("mij,mj->mi", self.inclusion.stress(self.pair.interior.gradient(pts)), nu)
            outer = stress_traction(self.pair.exterior.gradient(pts), nu, bg.lam, bg.mu)
            return inner - outer

        return f, g

    def mesh(self, h=None):
        return generate([self.curve], self.radius, self.h0 if h is None else h)

    def materials(self, mesh):
        return fem.materials_for(mesh, self.background, [self.inclusion])

    def solve(self, mesh, n_modes=None):
        params = dtn2d.DtnParams(self.radius, self.omega, self.background, n_modes=n_modes)
        sys = fem.assemble(mesh, self.materials(mesh), self.background, self.omega, params)
        f, g = self.jump_data(mesh)
        return sys, fem.solve_transmission(sys, [f], [g])


def example_isotropic(omega=1.0, radius=2.0, h0=0.4304):
    """Isotropic disk: grad J_0(k_p1 |x|) inside, grad H_0(k_p |x|) outside."""
    bg = IsotropicBackground(1.0, 2.0, 1.0)
    inc = isotropic_stiffness(2.0, 3.0, 3.0)
    kp1 = omega / math.sqrt((2.0 + 2 * 3.0) / 3.0)
    pair = TransmissionPair(RadialGradientField(kp1), RadialGradientField(bg.k_p(omega), radiating=True))
    return ValidationProblem("isotropic-circle", bg, inc, StarCurve.circle(1.0), radius, omega, h0, pair)


def example_anisotropic(omega=1.0, shape="circle"):
    """Anisotropic inclusion carrying its quasi-P plane wave along (1, 1)/sqrt 2."""
    bg = IsotropicBackground(1.0, 2.0, 1.0)
    c = StiffnessTensor2D.from_constants(**EXAMPLE2_TENSOR)
    d = np.array([1.0, 1.0]) / math.sqrt(2.0)
    pair = TransmissionPair(AnisotropicPlaneWave(c, omega, d, 0), RadialGradientField(bg.k_p(omega), radiating=True))
    if shape == "circle":
        return ValidationProblem("anisotropic-circle", bg, c, StarCurve.circle(1.0), 2.0, omega, 0.4304, pair)
    if shape == "triangle":
        return ValidationProblem("anisotropic-triangle", bg, c, ROUNDED_TRIANGLE, 3.0, omega, 1.1474 / 2, pair)
    raise ValueError(f"unknown shape {shape!r}; expected 'circle' or 'triangle'")


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    h: float
    n_nodes: int
    e0: float
    e1: float
    order0: float
    order1: float
    seconds: float


def convergence_study(problem: ValidationProblem, levels=3, n_modes=None, h0=None):
    """E0/E1 on ``levels`` uniformly refined meshes; orders are log2 of successive ratios."""
    mesh = problem.mesh(h0)
    h = problem.h0 if h0 is None else h0
    rows = []
    for lev in range(levels):
        t0 = time.perf_counter()
        _, sol = problem.solve(mesh, n_modes)
        e0, e1 = fem.error_norms(sol, problem.pair.interior, problem.pair.exterior)
        o0 = o1 = float("nan")
        if rows:
            o0 = math.log2(rows[-1].e0 / e0)
            o1 = math.log2(rows[-1].e1 / e1)
        rows.append(ConvergenceRow(lev, h / 2**lev, mesh.n_nodes, e0, e1, o0, o1, time.perf_counter() - t0))
        if lev + 1 < levels:
            mesh = mesh.refine()
    return rows
