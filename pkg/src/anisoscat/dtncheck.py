"""Mode-by-mode property checks of the 2D and 3D DtN matrices.

Each row reports Lambda_n, the leading minors of ``-(W_n + W_n^*)/2`` and
the residual of ``Im(A_n^* B_n)`` against its closed diagonal form. A
violation is a vanishing Lambda_n (2D), a non-positive Im Lambda_n that is
not a pure underflow (3D), a
residual above tolerance, a broken zero pattern (3D) or a missing
positive-definite tail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dtn2d, dtn3d
from .dtn2d import NotFoundError
from .material import IsotropicBackground

UNDERFLOW = 1e-290


@dataclass(frozen=True)
class CheckRow:
    draw: int
    case: int
    n: int
    lam: complex
    minors: tuple
    residual: float
    ok: bool


def _im_part(a, b):
    ab = a.conj().T @ b
    return (ab - ab.conj().T) / 2j


def rellich_residual(a, b, ref):
    """Largest relative diagonal defect and the off-diagonal size relative to |A||B|.

    Diagonal entries whose closed form underflows only need to be tiny.
    """
    im = _im_part(a, b)
    diag = 0.0
    for j in range(len(ref)):
        if ref[j, j] > UNDERFLOW:
            diag = max(diag, abs(im[j, j] - ref[j, j]) / ref[j, j])
        elif abs(im[j, j]) > 1e-280:
            diag = np.inf
    off = im - np.diag(np.diag(im))
    return diag, float(np.abs(off).max() / (np.abs(a).max() * np.abs(b).max()))


def lam_tilde(bg: IsotropicBackground, case: int):
    lam, mu = bg.lam, bg.mu
    return {1: lam, 2: lam + mu, 3: (lam + 2 * mu) * (lam + mu) / (lam + 3 * mu)}[case]


def random_background(rng):
    mu = rng.uniform(0.5, 3.0)
    return IsotropicBackground(rng.uniform(-0.5 * mu, 3.0), mu, rng.uniform(0.5, 3.0))


def check_2d(draws=10, n_max=200, seed=0, tol=1e-9, off_tol=1e-13):
    """Rows for every draw, traction case and order 0..n_max, plus M_emp per (draw, case)."""
    rng = np.random.default_rng(seed)
    rows, m_emp, violations = [], {}, 0
    for d in range(draws):
        bg = random_background(rng)
        radius, omega = rng.uniform(0.5, 4.0), rng.uniform(0.3, 4.0)
        for case in (1, 2, 3):
            p = dtn2d.DtnParams(radius, omega, bg, lam_tilde(bg, case))
            for n in range(n_max + 1):
                md = dtn2d.mode_matrices(p, n)
                res, off = rellich_residual(md.A, md.B, dtn2d.rellich_diagonal(p, n))
                floor = 1e-12 * (1 + n * n)
                ok = max(abs(md.Lam.real), abs(md.Lam.imag)) > floor and res <= tol and off <= off_tol
                violations += not ok
                rows.append(CheckRow(d, case, n, md.Lam, dtn2d.positivity_minors(md), res, ok))
            try:
                m_emp[(d, case)] = dtn2d.positivity_scan(p, n_max)
            except NotFoundError:
                m_emp[(d, case)] = None
                violations += 1
    return rows, m_emp, violations


def check_3d(draws=10, n_max=100, seed=0, tol=1e-9, off_tol=1e-13):
    rng = np.random.default_rng(seed)
    rows, m_emp, violations = [], {}, 0
    for d in range(draws):
        bg = random_background(rng)
        radius, omega = rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)
        for case in (1, 2, 3):
            p = dtn3d.Dtn3dParams(radius, omega, bg, lam_tilde(bg, case))
            for n in range(n_max + 1):
                md = dtn3d.mode_matrices_3d(p, n)
                res, off = rellich_residual(md.A, md.B, dtn3d.rellich_diagonal_3d(p, md))
                w = md.W
                pattern = w[0, 1] == 0 and w[1, 0] == 0 and w[0, 2] == 0 and w[2, 0] == 0
                # Im Lambda_n may underflow to exactly zero once |h_n|^2 leaves the double range
                underflow = md.Lam.imag == 0 and max(md.im_tg_p, md.im_tg_s) < UNDERFLOW
                ok = (md.Lam.imag > 0 or underflow) and res <= tol and off <= off_tol and pattern
                violations += not ok
                rows.append(CheckRow(d, case, n, md.Lam, dtn3d.leading_minors(md), res, ok))
            try:
                m_emp[(d, case)] = dtn3d.positivity_scan_3d(p, n_max)
            except NotFoundError:
                m_emp[(d, case)] = None
                violations += 1
    return rows, m_emp, violations


def rows_to_csv(rows) -> str:
    width = max(len(r.minors) for r in rows) if rows else 2
    head = ["draw", "case", "n", "re_lambda", "im_lambda"] + [f"minor{k + 1}" for k in range(width)] + ["residual", "ok"]
    out = [",".join(head)]
    for r in rows:
        vals = [str(r.draw), str(r.case), str(r.n), f"{r.lam.real:.12g}", f"{r.lam.imag:.12g}"]
        vals += [f"{m:.12g}" for m in r.minors] + [f"{r.residual:.3e}", str(int(r.ok))]
        out.append(",".join(vals))
    return "\n".join(out) + "\n"
