"""Plane-strain stiffness tensors in Voigt form and the Christoffel problem.

Voigt index map: 11 -> 1, 22 -> 2, 12/21 -> 3. Entries are stored plain,
``C[2, 2] == C_1212``; the stress/strain pairing uses engineering shear
strain ``2 eps_12`` so that ``sigma = C @ (eps11, eps22, 2 eps12)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive, check_unit_vector

_VOIGT = {(0, 0): 0, (1, 1): 1, (0, 1): 2, (1, 0): 2}


class EllipticityError(ValueError):
    """Stiffness tensor violates the Legendre ellipticity condition."""


class IndefiniteChristoffelError(ValueError):
    pass


@dataclass(frozen=True)
class StiffnessTensor2D:
    """Symmetric 3x3 Voigt stiffness matrix (Pa) plus density (kg/m^3)."""

    voigt: np.ndarray
    rho: complex = 1.0

    def __post_init__(self):
        v = np.array(self.voigt, dtype=float)
        if v.shape != (3, 3):
            raise ValueError(f"Voigt matrix must be 3x3, got {v.shape}")
        v = 0.5 * (v + v.T)
        v.setflags(write=False)
        object.__setattr__(self, "voigt", v)
        if complex(self.rho).real <= 0 or complex(self.rho).imag < 0:
            raise ValueError("density needs Re rho > 0 and Im rho >= 0")
        if not self.is_elliptic():
            raise EllipticityError(
                f"stiffness is not Legendre elliptic (eigenvalues {self.ellipticity_spectrum()})"
            )

    @classmethod
    def from_constants(cls, c11, c12, c13, c22, c23, c33, rho=1.0):
        """Build from the six independent Voigt scalars."""
        v = [[c11, c12, c13], [c12, c22, c23], [c13, c23, c33]]
        return cls(np.array(v, dtype=float), rho)

    @property
    def constants(self):
        v = self.voigt
        return dict(C11=v[0, 0], C12=v[0, 1], C13=v[0, 2], C22=v[1, 1], C23=v[1, 2], C33=v[2, 2])

    def ellipticity_spectrum(self):
        """Eigenvalues of the quadratic form (C:A):A on symmetric A.

        With the orthonormal basis (A11, A22, sqrt2 A12) the form's matrix
        is ``D C D`` with ``D = diag(1, 1, sqrt2)``.
        """
        d = np.array([1.0, 1.0, np.sqrt(2.0)])
        return np.linalg.eigvalsh(self.voigt * d[:, None] * d[None, :])

    def is_elliptic(self) -> bool:
        return bool(self.ellipticity_spectrum().min() > 0.0)

    def tensor(self) -> np.ndarray:
        """Full C_ijkl with all minor and major symmetries."""
        c = np.empty((2, 2, 2, 2))
        for (i, j), a in _VOIGT.items():
            for (k, l), b in _VOIGT.items():
                c[i, j, k, l] = self.voigt[a, b]
        return c

    def rotated(self, angle: float) -> "StiffnessTensor2D":
        """Tensor of the same material with its axes rotated by ``angle``."""
        q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        c = np.einsum("ia,jb,kc,ld,abcd->ijkl", q, q, q, q, self.tensor())
        v = np.empty((3, 3))
        for (i, j), a in _VOIGT.items():
            for (k, l), b in _VOIGT.items():
                v[a, b] = c[i, j, k, l]
        return StiffnessTensor2D(v, self.rho)

    def stress(self, grad):
        """Stress tensor(s) sigma = C : grad u for gradient(s) of shape (..., 2, 2).

        ``grad[..., m, n] = d u_m / d x_n``.
        """
        g = np.asarray(grad)
        strain = np.stack(
            [g[..., 0, 0], g[..., 1, 1], g[..., 0, 1] + g[..., 1, 0]], axis=-1
        )
        s = strain @ self.voigt.T
        out = np.empty(g.shape, dtype=np.result_type(g, float))
        out[..., 0, 0] = s[..., 0]
        out[..., 1, 1] = s[..., 1]
        out[..., 0, 1] = s[..., 2]
        out[..., 1, 0] = s[..., 2]
        return out


@dataclass(frozen=True)
class IsotropicBackground:
    """Homogeneous isotropic host medium with Lame constants and density."""

    lam: float
    mu: float
    rho: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise EllipticityError(f"background needs mu > 0, got {self.mu}")
        if not self.lam + self.mu > 0:
            raise EllipticityError("background needs 2*lambda + 2*mu > 0")
        check_positive(self.rho, "rho")

    @classmethod
    def from_velocities(cls, rho, c_p, c_s):
        mu = rho * c_s**2
        return cls(rho * c_p**2 - 2.0 * mu, mu, rho)

    def k_p(self, omega):
        return omega * np.sqrt(self.rho / (self.lam + 2.0 * self.mu))

    def k_s(self, omega):
        return omega * np.sqrt(self.rho / self.mu)

    def stiffness(self) -> StiffnessTensor2D:
        return isotropic_stiffness(self.lam, self.mu, self.rho)


def isotropic_stiffness(lam: float, mu: float, rho: float = 1.0) -> StiffnessTensor2D:
    """Voigt matrix [[l+2m, l, 0], [l, l+2m, 0], [0, 0, m]]."""
    if not (mu > 0 and lam + mu > 0):
        raise EllipticityError(f"isotropic tensor needs mu > 0 and lambda + mu > 0 (got {lam}, {mu})")
    v = [[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]]
    return StiffnessTensor2D(np.array(v, dtype=float), rho)


def christoffel(c: StiffnessTensor2D, d) -> np.ndarray:
    """Acoustic tensor A_C[i, j] = sum_kl C_iklj d_k d_l."""
    d = check_unit_vector(d)
    v = c.voigt
    c11, c12, c13 = v[0, 0], v[0, 1], v[0, 2]
    c22, c23, c33 = v[1, 1], v[1, 2], v[2, 2]
    m1 = np.array([[c11, c13], [c13, c33]])
    m2 = np.array([[2 * c13, c12 + c33], [c12 + c33, 2 * c23]])
    m3 = np.array([[c33, c23], [c23, c22]])
    return m1 * d[0] ** 2 + m2 * d[0] * d[1] + m3 * d[1] ** 2


def plane_wave_modes(c: StiffnessTensor2D, d, rho=None):
    """Phase velocities and polarizations of plane waves along ``d``.

    Returns a list of ``(v, p)`` pairs sorted by descending ``rho v^2``
    (quasi-P first).
    """
    rho = c.rho if rho is None else rho
    if complex(rho).imag != 0:
        raise ValueError("the Christoffel oracle needs a real density")
    rho = float(np.real(rho))
    a = christoffel(c, d)
    w, p = np.linalg.eigh(a)
    if w.min() <= 0:
        raise IndefiniteChristoffelError(f"Christoffel matrix not positive definite: {w}")
    order = np.argsort(w)[::-1]
    return [(float(np.sqrt(w[i] / rho)), p[:, i].copy()) for i in order]
