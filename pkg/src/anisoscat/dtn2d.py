"""Exact Dirichlet-to-Neumann operator on a circle for 2D isotropic elasticity.

A boundary trace is expanded in the orthogonal fields ``P_n = e^{in theta} r``
and ``S_n = e^{in theta} theta_hat``. The radiating exterior field with that
trace is ``grad psi_p + curl psi_s`` with Hankel-Fourier potentials, and
its (generalized) traction has coefficients ``W_n [w_p^n, w_s^n]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import special
from ._validation import check_points, check_positive
from .material import IsotropicBackground


class DtnConsistencyError(ArithmeticError):
    """A mode matrix failed an internal consistency check."""


class NotFoundError(LookupError):
    pass


def default_mode_count(k_s, radius):
    """Modes kept when nothing is configured: ceil(k_s R) + 16."""
    return int(math.ceil(k_s * radius)) + 16


@dataclass(frozen=True)
class DtnParams:
    """Artificial boundary radius, frequency, background and traction variant.

    ``lam_tilde`` selects the generalized stress; ``None`` is the physical
    traction (``lam_tilde = lam``). ``mu_tilde`` is always derived so that
    ``lam_tilde + mu_tilde = lam + mu``.
    """

    radius: float
    omega: float
    background: IsotropicBackground
    lam_tilde: float | None = None
    n_modes: int | None = None
    mu_tilde: float = field(init=False)

    def __post_init__(self):
        check_positive(self.radius, "radius")
        check_positive(self.omega, "omega")
        bg = self.background
        lt = bg.lam if self.lam_tilde is None else float(self.lam_tilde)
        lo = (bg.lam - bg.mu) * (bg.lam + 2 * bg.mu) / (bg.lam + 3 * bg.mu)
        if not lo < lt < bg.lam + 2 * bg.mu:
            raise ValueError(f"lam_tilde={lt} outside the admissible interval ({lo}, {bg.lam + 2 * bg.mu})")
        object.__setattr__(self, "lam_tilde", lt)
        object.__setattr__(self, "mu_tilde", bg.lam + bg.mu - lt)
        if self.n_modes is not None and not 0 <= self.n_modes <= special.MAX_ORDER:
            raise ValueError(f"n_modes must lie in [0, {special.MAX_ORDER}]")

    @classmethod
    def traction_case(cls, radius, omega, background, case=1, n_modes=None):
        """The three classical choices: 1 physical, 2 lam+mu, 3 (lam+2mu)(lam+mu)/(lam+3mu)."""
        lam, mu = background.lam, background.mu
        lt = {1: lam, 2: lam + mu, 3: (lam + 2 * mu) * (lam + mu) / (lam + 3 * mu)}[case]
        return cls(radius, omega, background, lt, n_modes)

    @property
    def k_p(self):
        return self.background.k_p(self.omega)

    @property
    def k_s(self):
        return self.background.k_s(self.omega)

    @property
    def t_p(self):
        return self.k_p * self.radius

    @property
    def t_s(self):
        return self.k_s * self.radius

    @property
    def modes(self) -> int:
        return default_mode_count(self.k_s, self.radius) if self.n_modes is None else self.n_modes

    def with_modes(self, n_modes):
        return DtnParams(self.radius, self.omega, self.background, self.lam_tilde, n_modes)


@dataclass(frozen=True)
class DtnMode:
    n: int
    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    Lam: complex
    log_abs_hp: float
    log_abs_hs: float


@lru_cache(maxsize=8192)
def _mode(p: DtnParams, n: int) -> DtnMode:
    bg = p.background
    lt, mt = p.lam_tilde, p.mu_tilde
    m = bg.mu + mt
    tp, ts = p.t_p, p.t_s
    rp = special.hankel_ratio(n, tp)
    rs = special.hankel_ratio(n, ts)
    ap, as_ = tp * rp.gamma, ts * rs.gamma
    a = np.array([[ap, 1j * n], [1j * n, -as_]])
    lam_n = n * n - ap * as_
    scale = max(n * n, abs(ap * as_), 1.0)
    if abs(lam_n) < 1e-14 * scale:
        raise DtnConsistencyError(f"det A_{n} numerically zero ({lam_n})")
    a_inv = np.array([[-as_, -1j * n], [-1j * n, ap]]) / lam_n
    b = np.array(
        [
            [m * tp**2 * rp.beta - lt * tp**2, 1j * m * n * (as_ - 1.0)],
            [1j * m * n * (ap - 1.0), -m * ts**2 * rs.beta - mt * ts**2],
        ]
    )
    w = b @ a_inv / p.radius
    for arr in (a, b, w):
        arr.setflags(write=False)
    return DtnMode(n, a, b, w, lam_n, rp.log_abs_h, rs.log_abs_h)


def mode_matrices(p: DtnParams, n: int) -> DtnMode:
    """A_n, B_n, W_n = B_n A_n^{-1} / R and Lambda_n = det A_n for one Fourier order."""
    if abs(n) > special.MAX_ORDER:
        raise special.DomainError(f"order {n} exceeds {special.MAX_ORDER}")
    return _mode(p, int(n))


def mode_stack(p: DtnParams, n_modes=None):
    """Orders -N..N and the stacked W matrices, shape (2N+1, 2, 2)."""
    n_modes = p.modes if n_modes is None else n_modes
    orders = np.arange(-n_modes, n_modes + 1)
    return orders, np.stack([mode_matrices(p, int(n)).W for n in orders])


def rellich_diagonal(p: DtnParams, n: int) -> np.ndarray:
    """Closed form of Im(A_n^* B_n): (2 rho0 omega^2 R^2 / pi) diag(|H_n(k_p R)|^-2, |H_n(k_s R)|^-2).

    Entries that fall below the smallest double underflow to zero.
    """
    md = mode_matrices(p, n)
    c = 2.0 * p.background.rho * p.omega**2 * p.radius**2 / math.pi
    return np.diag([c * math.exp(-2 * md.log_abs_hp), c * math.exp(-2 * md.log_abs_hs)])


def positivity_minors(md: DtnMode):
    """Leading principal minors of -(W + W^*)/2."""
    wt = -(md.W + md.W.conj().T) / 2
    return wt[0, 0].real, np.linalg.det(wt).real


def positivity_scan(p: DtnParams, n_max: int = 400) -> int:
    """Smallest M with -(W_n + W_n^*)/2 positive definite for all M <= |n| <= n_max."""
    ok = [all(v > 0 for v in positivity_minors(mode_matrices(p, s * n))) for n in range(n_max + 1) for s in (1, -1)]
    good = np.array(ok).reshape(-1, 2).all(axis=1)
    bad = np.nonzero(~good)[0]
    m_emp = 0 if bad.size == 0 else int(bad[-1]) + 1
    if m_emp > n_max:
        raise NotFoundError(f"W_n not positive definite at n = {n_max}")
    return m_emp


@dataclass(frozen=True)
class BoundaryTrace:
    """Coefficients of a vector trace on the circle in the (P_n, S_n) basis.

    ``orders`` is the contiguous range -N..N; ``coeffs[k] = (w_p, w_s)`` for
    ``orders[k]``. Extra leading axes are allowed for batches of traces.
    """

    orders: np.ndarray
    coeffs: np.ndarray

    @property
    def n_modes(self):
        return int(self.orders[-1])

    @classmethod
    def zeros(cls, n_modes):
        return cls(np.arange(-n_modes, n_modes + 1), np.zeros((2 * n_modes + 1, 2), dtype=complex))

    @classmethod
    def single(cls, n_modes, n, w_p=0.0, w_s=0.0):
        tr = cls.zeros(n_modes)
        tr.coeffs[n + n_modes] = (w_p, w_s)
        return tr

    @classmethod
    def from_samples(cls, values, n_modes):
        """Trapezoidal projection of samples at theta_i = 2 pi i / N_b.

        ``values`` has shape (N_b, 2) (Cartesian components); exact for
        trigonometric polynomials of degree below N_b - n_modes.
        """
        values = np.asarray(values)
        nb = values.shape[0]
        if 2 * n_modes + 1 > nb:
            raise ValueError(f"{2 * n_modes + 1} modes need at least as many samples (got {nb})")
        th = 2 * np.pi * np.arange(nb) / nb
        c, s = np.cos(th), np.sin(th)
        radial = values[:, 0] * c + values[:, 1] * s
        tang = -values[:, 0] * s + values[:, 1] * c
        orders = np.arange(-n_modes, n_modes + 1)
        fr = np.fft.fft(radial) / nb
        ft = np.fft.fft(tang) / nb
        return cls(orders, np.stack([fr[orders], ft[orders]], axis=-1))

    def evaluate(self, theta):
        """Cartesian trace values at angles ``theta``; shape (len(theta), 2)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        e = np.exp(1j * np.outer(theta, self.orders))
        wr = e @ self.coeffs[:, 0]
        wt = e @ self.coeffs[:, 1]
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([wr * c - wt * s, wr * s + wt * c], axis=-1)

    def __add__(self, other):
        _same(self, other)
        return BoundaryTrace(self.orders, self.coeffs + other.coeffs)

    def __mul__(self, factor):
        return BoundaryTrace(self.orders, self.coeffs * factor)

    __rmul__ = __mul__


def _same(a, b):
    if not np.array_equal(a.orders, b.orders):
        raise ValueError("traces carry different mode ranges")


def dtn_apply(p: DtnParams, w: BoundaryTrace) -> BoundaryTrace:
    """Traction coefficients W_n (w_p^n, w_s^n); orders above p.modes are dropped."""
    keep = np.abs(w.orders) <= p.modes
    orders = w.orders[keep]
    ws = np.stack([mode_matrices(p, int(n)).W for n in orders])
    return BoundaryTrace(orders, np.einsum("nij,nj->ni", ws, w.coeffs[keep]))


def radiating_coeffs(p: DtnParams, w: BoundaryTrace):
    """Potential coefficients (psi_p^n, psi_s^n) = R A_n^{-1} (w_p^n, w_s^n); shape (2N+1, 2)."""
    out = np.empty_like(w.coeffs, dtype=complex)
    for k, n in enumerate(w.orders):
        a = mode_matrices(p, int(n)).A
        out[k] = p.radius * np.linalg.solve(a, w.coeffs[k])
    return out


def _radial_profile(n, k, r, radius):
    """q = H_n(k r) / H_n(k R), plus gamma and beta at k r."""
    jr, _, yr, _, sr = special.bessel_jy_scaled(n, k * r)
    jR, _, yR, _, sR = special.bessel_jy_scaled(n, k * radius)
    # the parity sign of negative orders cancels in the ratio
    q = complex(jr, yr) / complex(jR, yR) * math.exp(sr - sR)
    rr = special.hankel_ratio(n, k * r)
    return q, rr.gamma, rr.beta


def _potential_terms(p: DtnParams, orders, psi, r):
    """Per-order f, f', f'' of both potentials at radius r; shape (2N+1, 2, 3)."""
    out = np.empty((len(orders), 2, 3), dtype=complex)
    for i, n in enumerate(orders):
        for a, k in enumerate((p.k_p, p.k_s)):
            q, g, b = _radial_profile(int(n), k, r, p.radius)
            f = q * psi[i, a]
            out[i, a] = (f, k * g * f, k * k * b * f)
    return out


def eval_exterior(p: DtnParams, orders, psi, x, gradient=False):
    """Radiating field grad psi_p + curl psi_s at points with |x| >= R.

    ``curl f = (d2 f, -d1 f)``. With ``gradient=True`` also returns the
    displacement gradient, shape (m, 2, 2).
    """
    x = check_points(x)
    r = np.hypot(x[:, 0], x[:, 1])
    if np.any(r < p.radius * (1 - 1e-12)):
        raise ValueError("exterior evaluation requires |x| >= R")
    th = np.arctan2(x[:, 1], x[:, 0])
    orders = np.asarray(orders)
    vals = np.empty((len(x), 2), dtype=complex)
    grads = np.empty((len(x), 2, 2), dtype=complex)
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
    cache = {}
    for m in range(len(x)):
        key = float(r[m])
        if key not in cache:
            cache[key] = _potential_terms(p, orders, psi, key)
        terms = cache[key]
        e = np.exp(1j * orders * th[m])
        in_ = 1j * orders
        polar_grad = []
        polar_hess = []
        for a in range(2):
            f, df, d2f = (terms[:, a, j] * e for j in range(3))
            rr = r[m]
            polar_grad.append(np.array([df.sum(), (in_ * f).sum() / rr]))
            h_rt = (in_ * (df / rr - f / rr**2)).sum()
            h_tt = (df / rr - orders**2 * f / rr**2).sum()
            polar_hess.append(np.array([[d2f.sum(), h_rt], [h_rt, h_tt]]))
        v_polar = polar_grad[0] + rot @ polar_grad[1]
        q = np.array([[math.cos(th[m]), -math.sin(th[m])], [math.sin(th[m]), math.cos(th[m])]])
        vals[m] = q @ v_polar
        if gradient:
            g_polar = polar_hess[0] + rot @ polar_hess[1]
            grads[m] = q @ g_polar @ q.T
    return (vals, grads) if gradient else vals
