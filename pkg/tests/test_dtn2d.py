import math

import numpy as np
import pytest

from anisoscat import dtn2d as D
from anisoscat import special
from anisoscat.analytic import RadialGradientField
from anisoscat.incident import IncidentField, PointSource, eval_incident, traction
from anisoscat.material import IsotropicBackground

BG = IsotropicBackground(1.0, 2.0, 1.0)


def random_params(rng, case=1):
    mu = rng.uniform(0.5, 3.0)
    lam = rng.uniform(-0.5 * mu, 3.0)
    bg = IsotropicBackground(lam, mu, rng.uniform(0.5, 3.0))
    return D.DtnParams.traction_case(rng.uniform(0.5, 4.0), rng.uniform(0.3, 4.0), bg, case)


def im_part(md):
    ab = md.A.conj().T @ md.B
    return (ab - ab.conj().T) / 2j


def test_lambda_is_det_and_nonzero():
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = random_params(rng)
        for n in range(201):
            md = D.mode_matrices(p, n)
            # both sides cancel n^2 against t_p t_s gamma_p gamma_s
            size = n * n + abs(md.A[0, 0] * md.A[1, 1])
            assert abs(md.Lam - np.linalg.det(md.A)) <= 1e-14 * size
            assert max(abs(md.Lam.real), abs(md.Lam.imag)) > 1e-12 * (1 + n * n)
            # generic inverse loses accuracy with cond(A) ~ n^4 / t^2
            ref = md.B @ np.linalg.inv(md.A) / p.radius
            tol = 1e-15 * np.linalg.cond(md.A) + 1e-12
            assert np.abs(md.W - ref).max() <= tol * np.abs(ref).max()


def test_lambda_against_mpmath():
    import mpmath

    p = D.DtnParams(2.0, 1.0, BG)
    mpmath.mp.dps = 40
    for n in (0, 3, 50, 200):
        g = [mpmath.diff(lambda x: mpmath.hankel1(n, x), t) / mpmath.hankel1(n, t) for t in (p.t_p, p.t_s)]
        ref = complex(n * n - p.t_p * p.t_s * g[0] * g[1])
        assert abs(D.mode_matrices(p, n).Lam - ref) <= 1e-10 * abs(ref)
    mpmath.mp.dps = 15


@pytest.mark.parametrize("case", [1, 2, 3])
def test_rellich_identity(case):
    rng = np.random.default_rng(10 + case)
    for _ in range(10):
        p = random_params(rng, case)
        for n in range(201):
            md = D.mode_matrices(p, n)
            im = im_part(md)
            ref = D.rellich_diagonal(p, n)
            for j in range(2):
                if ref[j, j] > 1e-290:
                    assert abs(im[j, j] - ref[j, j]) <= 1e-9 * ref[j, j]
                else:
                    assert abs(im[j, j]) < 1e-280
            noise = 1e-13 * np.abs(md.A).max() * np.abs(md.B).max()
            assert abs(im[0, 1]) <= noise and abs(im[1, 0]) <= noise


def test_rellich_literal_form_when_density_is_one():
    # with unit background density the closed form is (2 omega^2 R^2 / pi) diag(...)
    p = D.DtnParams(2.0, 1.3, BG)
    for n in range(40):
        md = D.mode_matrices(p, n)
        lit = 2 * p.omega**2 * p.radius**2 / math.pi
        ref = [lit * math.exp(-2 * md.log_abs_hp), lit * math.exp(-2 * md.log_abs_hs)]
        assert np.real(np.diag(im_part(md))) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("case", [1, 2, 3])
def test_positivity_beyond_m_emp(case):
    rng = np.random.default_rng(case)
    for _ in range(5):
        p = random_params(rng, case)
        m = D.positivity_scan(p, 200)
        for n in range(m, 201):
            assert all(v > 0 for v in D.positivity_minors(D.mode_matrices(p, n)))


def test_asymptotic_slopes():
    for case in (1, 2, 3):
        p = D.DtnParams.traction_case(2.0, 1.0, BG, case)
        lam, mu, mt = BG.lam, BG.mu, p.mu_tilde
        w1, w2 = D.mode_matrices(p, 299).W, D.mode_matrices(p, 300).W
        slope11 = -(w2[0, 0] - w1[0, 0]).real
        assert slope11 == pytest.approx(2 * mu * (lam + 2 * mu) / (p.radius * (lam + 3 * mu)), rel=1e-2)
        # the off-diagonal entry is odd in n: the |n| form holds for negative orders
        wneg, wpos = D.mode_matrices(p, -400).W, D.mode_matrices(p, 400).W
        ref12 = ((mu + mt) * (lam + 3 * mu) - 2 * mu * (lam + 2 * mu)) / (p.radius * (lam + 3 * mu))
        if abs(ref12) > 1e-12:
            assert wneg[0, 1].imag / 400 == pytest.approx(ref12, rel=2e-2)
            assert wpos[0, 1] == pytest.approx(-wneg[0, 1], rel=1e-12)


def test_boundedness_ratio():
    p = D.DtnParams(2.0, 1.0, BG)
    ratios = [np.abs(D.mode_matrices(p, n).W).max() / (1 + n) for n in range(50, 401, 10)]
    assert max(ratios) / min(ratios) < 1.1


def test_even_symmetry_in_n():
    p = D.DtnParams(1.5, 2.0, BG)
    for n in range(1, 30):
        a, b = D.mode_matrices(p, n), D.mode_matrices(p, -n)
        assert b.A[0, 1] == -a.A[0, 1] and b.A[0, 0] == a.A[0, 0]
        assert b.W[0, 0] == pytest.approx(a.W[0, 0], rel=1e-14)


def test_generalized_cases_differ():
    p1 = D.DtnParams.traction_case(2.0, 1.0, BG, 1)
    p2 = D.DtnParams.traction_case(2.0, 1.0, BG, 2)
    assert p2.mu_tilde == 0.0
    assert not np.allclose(D.mode_matrices(p1, 3).W, D.mode_matrices(p2, 3).W)
    with pytest.raises(ValueError):
        D.DtnParams(2.0, 1.0, BG, lam_tilde=BG.lam + 2 * BG.mu)


def test_dtn_apply_basis_and_linearity():
    p = D.DtnParams(2.0, 1.0, BG, n_modes=6)
    out = D.dtn_apply(p, D.BoundaryTrace.single(6, 0, 1.0, 0.0))
    assert np.allclose(out.coeffs[6], D.mode_matrices(p, 0).W[:, 0], rtol=0, atol=0)
    rng = np.random.default_rng(3)
    w1 = D.BoundaryTrace(np.arange(-6, 7), rng.normal(size=(13, 2)) + 1j * rng.normal(size=(13, 2)))
    w2 = D.BoundaryTrace(np.arange(-6, 7), rng.normal(size=(13, 2)) + 0j)
    lhs = D.dtn_apply(p, 2.5j * w1 + w2).coeffs
    rhs = 2.5j * D.dtn_apply(p, w1).coeffs + D.dtn_apply(p, w2).coeffs
    assert np.abs(lhs - rhs).max() < 1e-13 * np.abs(rhs).max()


def test_radiating_coeffs_round_trip():
    p = D.DtnParams(2.0, 1.3, BG, n_modes=10)
    rng = np.random.default_rng(7)
    w = D.BoundaryTrace(np.arange(-10, 11), rng.normal(size=(21, 2)) + 1j * rng.normal(size=(21, 2)))
    psi = D.radiating_coeffs(p, w)
    back = np.stack([D.mode_matrices(p, n).A @ psi[k] / p.radius for k, n in enumerate(w.orders)])
    assert np.abs(back - w.coeffs).max() < 1e-12
    assert np.all(D.radiating_coeffs(p, D.BoundaryTrace.zeros(4)) == 0)


def test_point_field_potential():
    omega, R = 1.0, 2.0
    p = D.DtnParams(R, omega, BG, n_modes=12)
    fld = RadialGradientField(p.k_p, radiating=True)
    th = 2 * np.pi * np.arange(64) / 64
    ring = R * np.stack([np.cos(th), np.sin(th)], axis=-1)
    w = D.BoundaryTrace.from_samples(fld.value(ring), 12)
    psi = D.radiating_coeffs(p, w)
    h0 = special.hankel1(0, p.k_p * R)[0]
    assert abs(psi[12, 0] - h0) < 1e-10
    psi_other = psi.copy()
    psi_other[12, 0] = 0
    assert np.abs(psi_other).max() < 1e-10
    # exterior evaluation of the pure n=0 potential
    r = 3.1
    v = D.eval_exterior(p, w.orders, psi, [[r, 0.0]])[0]
    ref = -p.k_p * special.hankel1(1, p.k_p * r)[0]
    assert abs(v[0] - ref) < 1e-10 and abs(v[1]) < 1e-10


def test_exterior_trace_consistency():
    p = D.DtnParams(1.5, 2.0, BG, n_modes=8)
    rng = np.random.default_rng(1)
    w = D.BoundaryTrace(np.arange(-8, 9), rng.normal(size=(17, 2)) + 1j * rng.normal(size=(17, 2)))
    psi = D.radiating_coeffs(p, w)
    th = rng.uniform(0, 2 * np.pi, 9)
    x = p.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    v = D.eval_exterior(p, w.orders, psi, x)
    assert np.abs(v - w.evaluate(th)).max() < 1e-9 * np.abs(v).max()


def test_traction_of_exterior_field_matches_dtn():
    p = D.DtnParams(2.0, 1.4, BG, n_modes=7)
    rng = np.random.default_rng(2)
    w = D.BoundaryTrace(np.arange(-7, 8), rng.normal(size=(15, 2)) + 1j * rng.normal(size=(15, 2)))
    psi = D.radiating_coeffs(p, w)
    nb = 64
    th = 2 * np.pi * np.arange(nb) / nb
    nu = np.stack([np.cos(th), np.sin(th)], axis=-1)
    _, g = D.eval_exterior(p, w.orders, psi, p.radius * nu, gradient=True)
    t = traction(g, nu, BG.lam, BG.mu)
    got = D.BoundaryTrace.from_samples(t, 7).coeffs
    ref = D.dtn_apply(p, w).coeffs
    assert np.abs(got - ref).max() < 1e-8 * np.abs(ref).max()


def test_exterior_gradient_by_differences():
    p = D.DtnParams(1.0, 1.0, BG, n_modes=5)
    rng = np.random.default_rng(4)
    w = D.BoundaryTrace(np.arange(-5, 6), rng.normal(size=(11, 2)) + 0j)
    psi = D.radiating_coeffs(p, w)
    x = np.array([[1.7, 0.9]])
    _, g = D.eval_exterior(p, w.orders, psi, x, gradient=True)
    h = 1e-5
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (D.eval_exterior(p, w.orders, psi, x + e) - D.eval_exterior(p, w.orders, psi, x - e)) / (2 * h)
        assert np.abs(fd[0] - g[0, :, j]).max() < 1e-7 * np.abs(g).max()


def test_point_source_trace_projection_is_spectral():
    f = IncidentField(PointSource([4.0, 1.0], [1.0, 0.5]), 1.0, BG)
    nb = 128
    th = 2 * np.pi * np.arange(nb) / nb
    x = 2.0 * np.stack([np.cos(th), np.sin(th)], axis=-1)
    w = D.BoundaryTrace.from_samples(eval_incident(f, x), 40)
    assert np.abs(w.evaluate(th) - eval_incident(f, x)).max() < 1e-9


def test_nyquist_guard():
    with pytest.raises(ValueError):
        D.BoundaryTrace.from_samples(np.zeros((10, 2)), 5)
