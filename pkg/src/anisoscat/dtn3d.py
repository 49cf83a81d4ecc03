"""Mode matrices of the 3D elastic DtN operator on a sphere.

Only the per-order algebra lives here: coefficients are taken in the
basis ``(V_nm, U_nm, Y_nm r_hat)`` and the potentials are ordered
``(psi_s1, psi_s2, psi_p)``. No field on the sphere is ever evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import special
from .dtn2d import DtnConsistencyError, NotFoundError
from .material import IsotropicBackground


@dataclass(frozen=True)
class Dtn3dMode:
    n: int
    delta: int
    A: np.ndarray
    A_inv: np.ndarray
    B: np.ndarray
    W: np.ndarray
    Lam: complex
    im_tg_p: float
    im_tg_s: float


@dataclass(frozen=True)
class Dtn3dParams:
    radius: float
    omega: float
    background: IsotropicBackground
    lam_tilde: float | None = None

    def __post_init__(self):
        bg = self.background
        lt = bg.lam if self.lam_tilde is None else float(self.lam_tilde)
        lo = (bg.lam - bg.mu) * (bg.lam + 2 * bg.mu) / (bg.lam + 3 * bg.mu)
        if not lo < lt < bg.lam + 2 * bg.mu:
            raise ValueError(f"lam_tilde={lt} outside ({lo}, {bg.lam + 2 * bg.mu})")
        object.__setattr__(self, "lam_tilde", lt)

    @property
    def mu_tilde(self):
        return self.background.lam + self.background.mu - self.lam_tilde


@lru_cache(maxsize=4096)
def _mode3(p: Dtn3dParams, n: int) -> Dtn3dMode:
    bg = p.background
    R = p.radius
    lt, mt = p.lam_tilde, p.mu_tilde
    m = bg.mu + mt
    tp = bg.k_p(p.omega) * R
    ts = bg.k_s(p.omega) * R
    rp = special.spherical_ratio(n, tp)
    rs = special.spherical_ratio(n, ts)
    ap, as_ = tp * rp.gamma, ts * rs.gamma
    delta = n * (n + 1)
    sd = math.sqrt(delta)
    a = np.array([[R, 0, 0], [0, -1 - as_, sd], [0, -sd, ap]], dtype=complex)
    lam_n = delta - ap * (1 + as_)
    # Im Lambda_n is positive but underflows to zero once |h_n| passes ~1e154
    if lam_n.imag < 0 or (lam_n.imag == 0 and ap.imag > 1e-250):
        raise DtnConsistencyError(f"Im Lambda_{n} = {lam_n.imag} is not positive")
    a_inv = np.array(
        [[1 / R, 0, 0], [0, ap / lam_n, -sd / lam_n], [0, sd / lam_n, (-1 - as_) / lam_n]],
        dtype=complex,
    )
    b = np.array(
        [
            [R * (bg.mu * as_ - mt), 0, 0],
            [0, m * (1 - as_ - ts**2 * rs.beta) - mt * ts**2, sd * m * (ap - 1)],
            [0, sd * m * (1 - as_), m * tp**2 * rp.beta - lt * tp**2],
        ],
        dtype=complex,
    )
    w = b @ a_inv / R
    for arr in (a, a_inv, b, w):
        arr.setflags(write=False)
    return Dtn3dMode(n, delta, a, a_inv, b, w, lam_n, ap.imag, as_.imag)


def mode_matrices_3d(p: Dtn3dParams, n: int) -> Dtn3dMode:
    """A_n, its closed-form inverse, B_n, W_n = B_n A_n^{-1} / R and Lambda_n."""
    if not 0 <= n <= special.MAX_ORDER:
        raise special.DomainError(f"order must lie in [0, {special.MAX_ORDER}], got {n}")
    return _mode3(p, int(n))


def rellich_diagonal_3d(p: Dtn3dParams, md: Dtn3dMode) -> np.ndarray:
    """Closed form of Im(A_n^* B_n).

    ``R^2 diag(mu Im(t_s g_s), rho0 omega^2 Im(t_s g_s), rho0 omega^2 Im(t_p g_p))``.
    """
    bg = p.background
    c = bg.rho * p.omega**2
    return p.radius**2 * np.diag([bg.mu * md.im_tg_s, c * md.im_tg_s, c * md.im_tg_p])


def leading_minors(md: Dtn3dMode):
    wt = -(md.W + md.W.conj().T) / 2
    return tuple(np.linalg.det(wt[:k, :k]).real for k in (1, 2, 3))


def positivity_scan_3d(p: Dtn3dParams, n_max: int = 200) -> int:
    """First M such that -(W_n + W_n^*)/2 is positive definite for every M <= n <= n_max."""
    if n_max > special.MAX_ORDER:
        raise special.DomainError(f"n_max must not exceed {special.MAX_ORDER}")
    good = [all(v > 0 for v in leading_minors(mode_matrices_3d(p, n))) for n in range(n_max + 1)]
    bad = [n for n, g in enumerate(good) if not g]
    m_emp = bad[-1] + 1 if bad else 0
    if m_emp > n_max:
        raise NotFoundError(f"no positive-definite tail up to n = {n_max}")
    return m_emp
