"""Closed-form elastic fields used as manufactured solutions.

These fields supply the exact pair (interior field, exterior scattered
field) for the transmission validation problems, and their traces feed
the far-field and DtN consistency checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from ._validation import check_points, check_unit_vector
from .material import StiffnessTensor2D, plane_wave_modes


@dataclass(frozen=True)
class RadialGradientField:
    """``u = grad Z_0(k |x - center|)`` with Z_0 = J_0 (regular) or H_0^(1) (radiating).

    Irrotational, so it solves the isotropic Navier equation whenever
    ``k`` is the compressional wavenumber of the medium.
    """

    k: float
    radiating: bool = False
    center: tuple = (0.0, 0.0)

    def _z(self, n, z):
        return _sp.hankel1(n, z) if self.radiating else _sp.jv(n, z)

    def _dz(self, n, z):
        return _sp.h1vp(n, z) if self.radiating else _sp.jvp(n, z)

    def value(self, x):
        x = check_points(x) - np.asarray(self.center)
        r = np.hypot(x[:, 0], x[:, 1])
        e = x / r[:, None]
        return (-self.k * self._z(1, self.k * r))[:, None] * e

    def gradient(self, x):
        x = check_points(x) - np.asarray(self.center)
        r = np.hypot(x[:, 0], x[:, 1])
        e = x / r[:, None]
        z = self.k * r
        radial = -self.k**2 * self._dz(1, z)
        tangential = -self.k * self._z(1, z) / r
        ee = np.einsum("mi,mj->mij", e, e)
        return radial[:, None, None] * ee + tangential[:, None, None] * (np.eye(2) - ee)


@dataclass(frozen=True)
class AnisotropicPlaneWave:
    """Homogeneous plane wave ``p exp(i (omega / v) x.d)`` in an anisotropic medium.

    ``mode`` 0 picks the faster (quasi-P) branch of the Christoffel problem,
    1 the slower one.
    """

    stiffness: StiffnessTensor2D
    omega: float
    direction: np.ndarray
    mode: int = 0

    def __post_init__(self):
        object.__setattr__(self, "direction", check_unit_vector(self.direction))

    @property
    def velocity_and_polarization(self):
        return plane_wave_modes(self.stiffness, self.direction)[self.mode]

    @property
    def wavenumber(self):
        v, _ = self.velocity_and_polarization
        return self.omega / v

    def value(self, x):
        x = check_points(x)
        _, p = self.velocity_and_polarization
        phase = np.exp(1j * self.wavenumber * (x @ self.direction))
        return phase[:, None] * p

    def gradient(self, x):
        x = check_points(x)
        _, p = self.velocity_and_polarization
        k = self.wavenumber
        phase = np.exp(1j * k * (x @ self.direction))
        return (1j * k * phase)[:, None, None] * np.outer(p, self.direction)


@dataclass(frozen=True)
class TransmissionPair:
    """Exact interior field and exterior scattered field of a validation problem."""

    interior: object
    exterior: object
