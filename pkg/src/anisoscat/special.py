"""Cylindrical and spherical Hankel functions of the first kind.

Integer order, real positive argument. Values are built from three-term
recurrences: the Neumann/spherical-Neumann part forward (dominant for
``n > t``) and the Bessel part by Miller's backward recurrence, normalized
with the classical sum rules. Both are carried in a scaled representation
``value = mantissa * exp(log_scale)`` so that the ratios the DtN matrices
need stay accurate far beyond the overflow point of ``H_n`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

MAX_ORDER = 500

_BIG = 1e200
_LOG_BIG = math.log(_BIG)
# log of the largest magnitude we are willing to hand back unscaled
_LOG_REPR = math.log(1e300)


class DomainError(ValueError):
    """Argument outside the supported domain (t <= 0 or order too large)."""


class HankelOverflowError(OverflowError):
    """|H_n(t)| exceeds the representable float range."""

    def __init__(self, n, t):
        super().__init__(f"|H_{n}^(1)({t:g})| is not representable in float64")
        self.n = n
        self.t = t


def _check(n_max, t):
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"argument must be a finite positive real, got t={t!r}")
    if n_max > MAX_ORDER:
        raise DomainError(f"order {n_max} exceeds the supported cap {MAX_ORDER}")


@dataclass(frozen=True)
class ScaledTable:
    """Values ``f_k = mant[k] * exp(scale[k])`` for k = 0..n_max+1."""

    mant: np.ndarray
    scale: np.ndarray

    def log_abs(self, k):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mant[k])) + self.scale[k]

    def value(self, k):
        return self.mant[k] * np.exp(self.scale[k])


def _forward(f0, f1, coef, n_max):
    """Forward recurrence ``f_{k+1} = coef(k) f_k - f_{k-1}`` with rescaling."""
    mant = np.empty(n_max + 2)
    scale = np.zeros(n_max + 2)
    mant[0], mant[1] = f0, f1
    a, b, s = f0, f1, 0.0
    for k in range(1, n_max + 1):
        a, b = b, coef(k) * b - a
        if abs(b) > _BIG:
            a /= _BIG
            b /= _BIG
            s += _LOG_BIG
        mant[k + 1] = b
        scale[k + 1] = s
    return ScaledTable(mant, scale)


def _miller_start(n_max, t):
    m = max(n_max + 1, int(math.ceil(t)))
    start = m + 30 + int(4.0 * math.sqrt(m * 10.0))
    return start + (start % 2)


def _backward(n_max, t, coef, normalize):
    """Miller backward recurrence for the recessive (Bessel) solution.

    ``normalize(low, even_sum)`` receives f_0, f_1 and 2*sum f_{2k} (k >= 1),
    all in the units of the final rescale, and returns (log|c|, sign c) of
    the constant the unnormalized sequence must be divided by.
    """
    start = _miller_start(n_max, t)
    keep = n_max + 2
    mant = np.zeros(keep)
    count = np.zeros(keep)
    hi, lo = 0.0, 1e-30
    even_sum = 0.0
    rescales = 0
    for k in range(start, 0, -1):
        # lo holds f_k, hi holds f_{k+1}
        if k < keep:
            mant[k] = lo
            count[k] = rescales
        if k % 2 == 0:
            even_sum += 2.0 * lo
        hi, lo = lo, coef(k) * lo - hi
        if abs(lo) > _BIG:
            hi /= _BIG
            lo /= _BIG
            even_sum /= _BIG
            rescales += 1
    mant[0] = lo
    count[0] = rescales
    # express everything in the units of the final rescale count
    scale = -(rescales - count) * _LOG_BIG
    f1 = mant[1] * math.exp(scale[1])
    log_norm, sign_norm = normalize((lo, f1), even_sum)
    return ScaledTable(mant * sign_norm, scale - log_norm)


def _cyl_normalize(low, even_sum):
    # J_0 + 2 sum_{k>=1} J_{2k} = 1
    total = low[0] + even_sum
    return math.log(abs(total)), math.copysign(1.0, total)


@lru_cache(maxsize=512)
def cylindrical_tables(n_max: int, t: float):
    """Scaled tables of J_k(t) and Y_k(t), k = 0..n_max+1."""
    _check(n_max, t)
    coef = lambda k: 2.0 * k / t  # noqa: E731
    y = _forward(float(_sp.y0(t)), float(_sp.y1(t)), coef, n_max)
    j = _backward(n_max, t, coef, _cyl_normalize)
    return j, y


def _sph_normalize_factory(t):
    j0 = math.sin(t) / t
    j1 = math.sin(t) / t**2 - math.cos(t) / t

    def normalize(low, even_sum):
        # match whichever of j_0, j_1 is larger in magnitude
        raw, ref = (low[0], j0) if abs(j0) >= abs(j1) else (low[1], j1)
        ratio = raw / ref
        return math.log(abs(ratio)), math.copysign(1.0, ratio)

    return normalize


@lru_cache(maxsize=512)
def spherical_tables(n_max: int, t: float):
    """Scaled tables of j_k(t) and y_k(t), k = 0..n_max+1."""
    _check(n_max, t)
    coef = lambda k: (2.0 * k + 1.0) / t  # noqa: E731
    y0 = -math.cos(t) / t
    y1 = -math.cos(t) / t**2 - math.sin(t) / t
    y = _forward(y0, y1, coef, n_max)
    j = _backward(n_max, t, coef, _sph_normalize_factory(t))
    return j, y


def _combine(j, y, k, deriv_coef):
    """Return scaled (H_k, H_k') sharing one exponent."""
    # H_k' = H_{k-1} - c H_k  (k >= 1);  H_0' = -H_1
    def both(tab):
        if k == 0:
            v = tab.mant[0] * np.exp(tab.scale[0] - s_ref)
            d = -tab.mant[1] * np.exp(tab.scale[1] - s_ref)
        else:
            v = tab.mant[k] * np.exp(tab.scale[k] - s_ref)
            d = tab.mant[k - 1] * np.exp(tab.scale[k - 1] - s_ref) - deriv_coef * v
        return v, d

    s_ref = max(y.scale[k], y.scale[k + 1])
    jv, jd = both(j)
    yv, yd = both(y)
    m = max(abs(jv), abs(jd), abs(yv), abs(yd))
    return jv / m, jd / m, yv / m, yd / m, s_ref + math.log(m)


@dataclass(frozen=True)
class HankelRatio:
    """Well-scaled quantities of H_n^(1) at one (order, argument) pair.

    ``h`` and ``dh`` are ``None`` when H_n itself overflows; ``log_abs_h``
    is always available.
    """

    order: int
    argument: float
    h: complex | None
    dh: complex | None
    gamma: complex
    beta: complex
    log_abs_h: float

    @property
    def im_t_gamma(self) -> float:
        return self.argument * self.gamma.imag


@dataclass(frozen=True)
class SphericalHankelRatio(HankelRatio):
    """Same fields as :class:`HankelRatio`, for the spherical h_n^(1)."""

    @property
    def delta(self) -> int:
        return self.order * (self.order + 1)


def _ratio_from_tables(j, y, n, t, spherical):
    c = (n + 1.0) / t if spherical else n / t
    jv, jd, yv, yd, s = _combine(j, y, n, c)
    den = complex(jv, yv)
    num = complex(jd, yd)
    abs2 = jv * jv + yv * yv
    re_g = (jv * jd + yv * yd) / abs2
    im_g = (jv * yd - jd * yv) / abs2
    gamma = complex(re_g, im_g)
    if spherical:
        beta = n * (n + 1.0) / t**2 - 1.0 - 2.0 * gamma / t
    else:
        beta = n * n / t**2 - 1.0 - gamma / t
    log_abs = 0.5 * math.log(abs2) + s
    if log_abs < _LOG_REPR:
        scale = math.exp(s)
        h, dh = den * scale, num * scale
    else:
        h = dh = None
    cls = SphericalHankelRatio if spherical else HankelRatio
    return cls(n, t, h, dh, gamma, beta, log_abs)


def hankel_ratio(n: int, t: float) -> HankelRatio:
    """gamma = H'/H and beta = H''/H for the cylindrical Hankel function."""
    m = abs(int(n))
    t = float(t)
    j, y = cylindrical_tables(m, t)
    r = _ratio_from_tables(j, y, m, t, spherical=False)
    if n < 0 and m % 2 == 1 and r.h is not None:
        r = HankelRatio(int(n), t, -r.h, -r.dh, r.gamma, r.beta, r.log_abs_h)
    elif n < 0:
        r = HankelRatio(int(n), t, r.h, r.dh, r.gamma, r.beta, r.log_abs_h)
    return r


def spherical_ratio(n: int, t: float) -> SphericalHankelRatio:
    """gamma = h'/h and beta = h''/h for the spherical Hankel function."""
    if n < 0:
        raise DomainError("spherical Hankel functions need n >= 0")
    t = float(t)
    j, y = spherical_tables(int(n), t)
    return _ratio_from_tables(j, y, int(n), t, spherical=True)


def hankel_ratios(n_max: int, t: float):
    """gamma_k, beta_k, log|H_k| for k = 0..n_max (vectorized helper)."""
    j, y = cylindrical_tables(int(n_max), float(t))
    out = [_ratio_from_tables(j, y, k, float(t), spherical=False) for k in range(n_max + 1)]
    gamma = np.array([r.gamma for r in out])
    beta = np.array([r.beta for r in out])
    log_abs = np.array([r.log_abs_h for r in out])
    return gamma, beta, log_abs


def spherical_ratios(n_max: int, t: float):
    j, y = spherical_tables(int(n_max), float(t))
    out = [_ratio_from_tables(j, y, k, float(t), spherical=True) for k in range(n_max + 1)]
    gamma = np.array([r.gamma for r in out])
    beta = np.array([r.beta for r in out])
    log_abs = np.array([r.log_abs_h for r in out])
    return gamma, beta, log_abs


def hankel1(n: int, t: float) -> tuple[complex, complex]:
    """(H_n^(1)(t), H_n^(1)'(t)); negative orders by H_{-n} = (-1)^n H_n."""
    r = hankel_ratio(n, t)
    if r.h is None:
        raise HankelOverflowError(n, t)
    return r.h, r.dh


def spherical_hankel1(n: int, t: float) -> tuple[complex, complex]:
    """(h_n^(1)(t), h_n^(1)'(t)) for n >= 0."""
    r = spherical_ratio(n, t)
    if r.h is None:
        raise HankelOverflowError(n, t)
    return r.h, r.dh


def bessel_jy_scaled(n: int, t: float):
    """Scaled J_n, J_n', Y_n, Y_n' sharing one exponent ``s``.

    Returns ``(J, dJ, Y, dY, s)`` with the true values equal to the
    returned ones times ``exp(s)``. Products ``J * Y`` are therefore
    obtained as ``J * Y * exp(2 s)`` without intermediate overflow.
    """
    m = abs(int(n))
    j, y = cylindrical_tables(m, float(t))
    jv, jd, yv, yd, s = _combine(j, y, m, m / float(t))
    return jv, jd, yv, yd, s


def hankel1_array(n: int, x) -> tuple[np.ndarray, np.ndarray]:
    """H_n^(1) and its derivative at an array of positive arguments.

    Pointwise field synthesis only; the DtN kernels use the scaled tables.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("hankel1_array needs positive arguments")
    h = _sp.hankel1(n, x)
    dh = _sp.h1vp(n, x)
    return h, dh
