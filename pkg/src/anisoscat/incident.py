"""Analytic incident fields for the isotropic background and the traction operator.

Gradients follow the convention ``grad[..., i, j] = d u_i / d x_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special as _sp

from ._validation import check_points, check_positive, check_unit_vector
from .material import IsotropicBackground


class SourceEvaluationError(ValueError):
    """A point source was evaluated at (or numerically on top of) its location."""


def perp(d):
    """Rotate a vector (or stack of vectors) by +90 degrees: (-d2, d1)."""
    d = np.asarray(d)
    return np.stack([-d[..., 1], d[..., 0]], axis=-1)


@dataclass(frozen=True)
class PlaneWave:
    """Superposition ``c_p d e^{i k_p x.d} + c_s d_perp e^{i k_s x.d}``."""

    direction: np.ndarray
    c_p: complex = 1.0
    c_s: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "direction", check_unit_vector(self.direction))

    @classmethod
    def from_angle(cls, angle, c_p=1.0, c_s=0.0):
        return cls(np.array([np.cos(angle), np.sin(angle)]), c_p, c_s)

    def scaled(self, factor):
        return PlaneWave(self.direction, self.c_p * factor, self.c_s * factor)


@dataclass(frozen=True)
class PointSource:
    """Green's tensor column ``Pi(x, y) a`` radiated from ``y``."""

    location: np.ndarray
    polarization: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.location, dtype=float).reshape(2)
        a = np.asarray(self.polarization, dtype=complex).reshape(2)
        object.__setattr__(self, "location", y)
        object.__setattr__(self, "polarization", a)

    def scaled(self, factor):
        return PointSource(self.location, self.polarization * factor)


Incidence = Union[PlaneWave, PointSource]


@dataclass(frozen=True)
class IncidentField:
    kind: Incidence
    omega: float
    background: IsotropicBackground

    def __post_init__(self):
        check_positive(self.omega, "omega")

    def check_outside(self, radius):
        if isinstance(self.kind, PointSource) and np.hypot(*self.kind.location) <= radius:
            raise ValueError(f"point source must lie outside the disk of radius {radius}")

    def value(self, x):
        return eval_incident(self, x)

    def gradient(self, x):
        return eval_incident_gradient(self, x)


def _plane(f: IncidentField, x):
    pw = f.kind
    d = pw.direction
    dp = perp(d)
    kp, ks = f.background.k_p(f.omega), f.background.k_s(f.omega)
    s = x @ d
    ep = pw.c_p * np.exp(1j * kp * s)
    es = pw.c_s * np.exp(1j * ks * s)
    u = ep[:, None] * d + es[:, None] * dp
    g = (1j * kp * ep)[:, None, None] * np.outer(d, d) + (1j * ks * es)[:, None, None] * np.outer(dp, d)
    return u, g


def _radial_derivatives(k, r):
    """Radial derivatives f, f', f'' of f(r) = d/dr Phi_k for Phi_k = (i/4) H_0(k r)."""
    z = k * r
    h1 = _sp.hankel1(1, z)
    dh1 = _sp.h1vp(1, z)
    d2h1 = -dh1 / z - (1.0 - 1.0 / z**2) * h1
    c = -0.25j
    return c * k * h1, c * k**2 * dh1, c * k**3 * d2h1


def helmholtz_derivatives(k, x, y):
    """Phi_k(x, y) and its x-derivatives up to third order.

    Returns ``(phi, d1, d2, d3)`` with shapes (m,), (m,2), (m,2,2), (m,2,2,2).
    """
    z = x - np.asarray(y, dtype=float)
    r = np.hypot(z[:, 0], z[:, 1])
    if np.any(r < 1e-12):
        raise SourceEvaluationError("point source evaluated at its own location")
    e = z / r[:, None]
    eye = np.eye(2)
    f, g, dg = _radial_derivatives(k, r)
    phi = 0.25j * _sp.hankel1(0, k * r)
    q = f / r
    dq = (g - q) / r
    ee = np.einsum("mi,mj->mij", e, e)
    d1 = f[:, None] * e
    d2 = (g - q)[:, None, None] * ee + q[:, None, None] * eye
    proj = eye[None] - ee  # r * d e_i / d x_l
    eee = np.einsum("mij,ml->mijl", ee, e)
    d3 = (dg - dq)[:, None, None, None] * eee
    d3 += ((g - q) / r)[:, None, None, None] * (
        np.einsum("mil,mj->mijl", proj, e) + np.einsum("mi,mjl->mijl", e, proj)
    )
    d3 += dq[:, None, None, None] * np.einsum("ij,ml->mijl", eye, e)
    return phi, d1, d2, d3


def green_tensor(x, y, omega, bg: IsotropicBackground):
    """Pi(x, y) for each row of ``x``; shape (m, 2, 2)."""
    x = check_points(x)
    kp, ks = bg.k_p(omega), bg.k_s(omega)
    phs, _, d2s, _ = helmholtz_derivatives(ks, x, y)
    _, _, d2p, _ = helmholtz_derivatives(kp, x, y)
    return phs[:, None, None] * np.eye(2) / bg.mu + (d2s - d2p) / (bg.rho * omega**2)


def _point(f: IncidentField, x):
    src = f.kind
    bg = f.background
    kp, ks = bg.k_p(f.omega), bg.k_s(f.omega)
    _, d1s, d2s, d3s = helmholtz_derivatives(ks, x, src.location)
    phs = 0.25j * _sp.hankel1(0, ks * np.hypot(*(x - src.location).T))
    _, _, d2p, d3p = helmholtz_derivatives(kp, x, src.location)
    a = src.polarization
    c = 1.0 / (bg.rho * f.omega**2)
    u = phs[:, None] * a / bg.mu + c * np.einsum("mij,j->mi", d2s - d2p, a)
    g = np.einsum("i,mj->mij", a, d1s) / bg.mu + c * np.einsum("mijl,j->mil", d3s - d3p, a)
    return u, g


def _evaluate(f: IncidentField, x):
    x = check_points(x)
    if isinstance(f.kind, PlaneWave):
        return _plane(f, x)
    if isinstance(f.kind, PointSource):
        return _point(f, x)
    raise TypeError(f"unknown incidence {type(f.kind).__name__}")


def eval_incident(f: IncidentField, x) -> np.ndarray:
    """Incident displacement at points ``x`` (shape (m, 2))."""
    return _evaluate(f, x)[0]


def eval_incident_gradient(f: IncidentField, x) -> np.ndarray:
    """Incident displacement gradient at points ``x`` (shape (m, 2, 2))."""
    return _evaluate(f, x)[1]


def traction(grad, normal, lam, mu):
    """Isotropic surface traction from a displacement gradient.

    ``T u = 2 mu du/dnu + lam nu div u + mu nu_perp (d2 u1 - d1 u2)``.
    """
    grad = np.asarray(grad)
    nu = np.broadcast_to(np.asarray(normal, dtype=float), grad.shape[:-1])
    dnu = np.einsum("...ij,...j->...i", grad, nu)
    div = grad[..., 0, 0] + grad[..., 1, 1]
    curl = grad[..., 0, 1] - grad[..., 1, 0]
    return 2 * mu * dnu + lam * nu * div[..., None] + mu * perp(nu) * curl[..., None]


def stress_traction(grad, normal, lam, mu):
    """``sigma(u) nu`` with ``sigma = lam div u I + mu (grad u + grad u^T)``."""
    grad = np.asarray(grad)
    nu = np.broadcast_to(np.asarray(normal, dtype=float), grad.shape[:-1])
    div = grad[..., 0, 0] + grad[..., 1, 1]
    sym = grad + np.swapaxes(grad, -1, -2)
    return lam * div[..., None] * nu + mu * np.einsum("...ij,...j->...i", sym, nu)
