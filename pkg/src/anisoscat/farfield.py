"""Compressional and shear far-field patterns from a scattered trace on the circle.

The exterior potentials are written ``psi_a = sum_n Psi_a^n H_n(k_a r) e^{in theta}``;
the scalar patterns are

    u_p(theta) =  4 k_p sum_n Psi_p^n e^{in(theta - pi/2)}
    u_s(theta) = -4 k_s sum_n Psi_s^n e^{in(theta - pi/2)}

and the vector pattern is ``u_p x_hat + u_s x_hat_perp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dtn2d, special


def _inverse_hankel(n: int, t: float) -> complex:
    """1 / H_n^(1)(t) without overflow for large orders."""
    j, _, y, _, s = special.bessel_jy_scaled(n, t)
    sign = -1.0 if (n < 0 and n % 2) else 1.0
    return sign * math.exp(-s) / complex(j, y)


def pattern_coefficients(p: dtn2d.DtnParams, trace: dtn2d.BoundaryTrace):
    """Psi_p^n, Psi_s^n for the orders of ``trace`` kept by ``p``; shape (2N+1, 2)."""
    keep = np.abs(trace.orders) <= p.modes
    tr = dtn2d.BoundaryTrace(trace.orders[keep], trace.coeffs[keep])
    psi = dtn2d.radiating_coeffs(p, tr)
    scale = np.array([[_inverse_hankel(int(n), p.t_p), _inverse_hankel(int(n), p.t_s)] for n in tr.orders])
    return tr.orders, psi * scale


@dataclass(frozen=True)
class FarField:
    theta: np.ndarray
    u_p: np.ndarray
    u_s: np.ndarray

    def vector(self):
        """Vector pattern at each angle, shape (m, 2)."""
        xh = np.stack([np.cos(self.theta), np.sin(self.theta)], axis=-1)
        xp = np.stack([-np.sin(self.theta), np.cos(self.theta)], axis=-1)
        return self.u_p[:, None] * xh + self.u_s[:, None] * xp

    def relative_error(self, other: "FarField"):
        a, b = self.vector(), other.vector()
        return float(np.linalg.norm(a - b) / np.linalg.norm(b))

    def to_csv(self) -> str:
        rows = ["theta,re_up,im_up,re_us,im_us"]
        for t, a, b in zip(self.theta, self.u_p, self.u_s):
            rows.append(f"{t:.12g},{a.real:.12g},{a.imag:.12g},{b.real:.12g},{b.imag:.12g}")
        return "\n".join(rows) + "\n"


def farfield_from_trace(p: dtn2d.DtnParams, trace: dtn2d.BoundaryTrace, angles) -> FarField:
    """Far-field patterns of the radiating field whose trace on the circle is ``trace``."""
    theta = np.atleast_1d(np.asarray(angles, dtype=float))
    orders, big_psi = pattern_coefficients(p, trace)
    e = np.exp(1j * np.outer(theta - np.pi / 2, orders))
    up = 4 * p.k_p * (e @ big_psi[:, 0])
    us = -4 * p.k_s * (e @ big_psi[:, 1])
    return FarField(theta, up, us)


def uniform_angles(count: int):
    return 2 * np.pi * np.arange(count) / count
