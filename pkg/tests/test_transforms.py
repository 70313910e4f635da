import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fokas.complex_plane import SpectralParams, build_contour, spectral_w
from fokas.transforms import (BoundaryDatum, DataError, build_psi, check_support,
                              fourier_transform, gaussian_bump, hat_l2, poly_bump, psi_from_hat,
                              psi_hat, psi_hat_unstabilized, psi_norm, spectral_G, t_transform,
                              zero_datum)

P11 = SpectralParams(1.0, 1.0)
R = 1 / math.sqrt(2)
G0 = gaussian_bump(1.0, 0.5, 0.15, 1.0)
G1 = gaussian_bump(1.0, 0.5, 0.15, -0.5)


def parabola(T=1.0):
    return BoundaryDatum("poly", T, lambda t: t * (T - t) + 0j, (0.0, T))


def test_zero_datum_transform_vanishes():
    assert np.all(t_transform(zero_datum(), [0, 3j, -1 + 5j]) == 0)


@pytest.mark.parametrize("T", [1.0, 2.5])
def test_parabola_moment(T):
    assert abs(t_transform(parabola(T), 0.0, T)[0] - T ** 3 / 6) < 1e-13 * T ** 3


def test_oscillatory_transform_against_adaptive_quadrature():
    kappa = 10j
    re = quad(lambda s: (np.exp(kappa * s) * G0(s)).real, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
    im = quad(lambda s: (np.exp(kappa * s) * G0(s)).imag, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
    ref = complex(re, im)
    got = t_transform(G0, kappa)[0]
    assert abs(got - ref) <= 1e-10 * abs(ref)


def test_growth_and_bad_upper_limit_rejected():
    with pytest.raises(ValueError):
        t_transform(G0, 1.0)
    with pytest.raises(ValueError):
        t_transform(G0, 1j, 0.0)


def test_fast_fourier_route_matches_clenshaw_curtis():
    om = np.linspace(-300, 300, 61)
    a = fourier_transform(G0, om)
    b = t_transform(G0, -1j * om)
    assert np.max(np.abs(a - b)) <= 1e-11 * np.max(np.abs(b))


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False),
       st.floats(-50, 50), st.floats(-5, 0))
def test_t_transform_is_linear(a, b, im, re):
    h = poly_bump(1.0, 5, 0.3 - 0.2j)
    kappa = complex(re, im)
    lhs = t_transform(G0.scaled(a) + h.scaled(b), kappa)[0]
    rhs = a * t_transform(G0, kappa)[0] + b * t_transform(h, kappa)[0]
    assert abs(lhs - rhs) <= 1e-12 * max(abs(a) + abs(b), 1e-300) * 0.5 + 1e-14


@settings(max_examples=20, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False),
       st.complex_numbers(max_magnitude=2, allow_nan=False),
       st.floats(0.05, 3))
def test_spectral_G_is_jointly_linear(a, b, s):
    h0, h1 = poly_bump(1.0, 4, 1.0), poly_bump(1.0, 6, 0.5j)
    k = np.array([1j * s, s + 0j])
    lhs = spectral_G(k, G0.scaled(a) + h0.scaled(b), G1.scaled(a) + h1.scaled(b), 1.0, P11)
    rhs = a * spectral_G(k, G0, G1, 1.0, P11) + b * spectral_G(k, h0, h1, 1.0, P11)
    # transform errors are absolute on the scale of ||g||_1, so measure against
    # |prefactor| * ||g||_1 rather than the (possibly cancelled) value of G
    nu = np.sqrt(1 - k * k)
    nu = np.where(nu.imag < 0, -nu, nu)
    pre = 2 * np.abs(k * (k + nu)) * (1 + np.abs(nu))
    l1 = max(g.max_abs() for g in (G0, G1, h0, h1))
    scale = np.max(pre) * l1 * (abs(a) + abs(b))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale + 1e-15


def test_spectral_G_vanishing_points():
    z = zero_datum()
    assert np.all(spectral_G(np.array([1j, 2.0, -3 + 1j]), z, z, 1.0, P11) == 0)
    assert spectral_G(0.0, G0, G1, 1.0, P11)[0] == 0
    assert abs(spectral_G(R, G0, G1, 1.0, P11)[0]) < 1e-14


def test_support_is_respected():
    for g in (G0, poly_bump(1.0, 4), gaussian_bump(2.0, 1.0, 0.3)):
        assert check_support(g) <= 1e-12
        assert g(-0.1) == 0 and g(g.T + 0.1) == 0


def test_smooth_at_support_ends():
    t = np.array([1e-3, 2e-3, 3e-3])
    v = np.abs(G0(t))
    assert np.all(v < 1e-30)


def test_psi_hat_definitions():
    assert psi_hat(1, -1.0, G0, G1, 1.0) == 0
    ref = spectral_G(0.5, G0, G1, 1.0, P11)[0]
    assert abs(psi_hat(2, 0.5, G0, G1, 1.0) - ref) <= 1e-13 * abs(ref)
    ref1 = spectral_G(2j, G0, G1, 1.0, P11)[0]
    assert abs(psi_hat(1, 2.0, G0, G1, 1.0) - ref1) <= 1e-13 * abs(ref1)


def test_psi_hat_support_is_hard_zero():
    s = np.linspace(-4, 4, 801)
    supports = {1: s >= 0, 2: (s >= 0) & (s <= R), 3: s >= R, 4: s >= R, 5: s <= -R}
    for i, inside in supports.items():
        assert np.all(psi_hat(i, s, G0, G1, 1.0)[~inside] == 0)


def test_psi_hat_3_has_finite_threshold_limit():
    vals = psi_hat(3, R + 10.0 ** -np.arange(4, 9), G0, G1, 1.0)
    diffs = np.abs(np.diff(vals))
    # the approach goes like sqrt(s - threshold): successive differences contract by
    # about 10^(-1/2), so the sequence is Cauchy and the remaining tail is bounded
    q = diffs[1:] / diffs[:-1]
    assert np.all(q < 0.35)
    assert diffs[-1] * 0.35 / 0.65 < 1e-3 * abs(vals[-1])


def test_stabilized_form_agrees_with_literal_product_off_threshold():
    s = R + np.array([1e-3, 1e-2, 0.5, 3.0])
    for i in (3, 4):
        a, b = psi_hat(i, s, G0, G1, 1.0), psi_hat_unstabilized(i, s, G0, G1, 1.0)
        assert np.max(np.abs(a - b) / np.abs(a)) < 1e-8


def test_psi_hat_3_4_bounded_and_stable():
    def sup(n):
        s = R + np.linspace(0, 10, n)
        return [np.max(np.abs(psi_hat(i, s, G0, G1, 1.0))) for i in (3, 4)]
    coarse, fine = sup(2001), sup(4001)
    assert all(math.isfinite(c) and abs(f / c - 1) < 0.01 for c, f in zip(coarse, fine))


@pytest.mark.parametrize("label", ["gamma1", "gamma3", "gamma4", "gamma5"])
def test_transform_decays_superalgebraically_on_contour(label):
    path = build_contour(P11)[label]
    s = path.sample_s(400, 12.0)
    aw = np.abs(spectral_w(path.position(s), P11))
    g = np.abs(fourier_transform(G0, -spectral_w(path.position(s), P11).imag))
    near, mid, far = (aw >= 10) & (aw <= 100), (aw > 100) & (aw <= 1000), aw > 3000
    c4 = np.max(g[near] * (1 + aw[near]) ** 4)
    assert np.all(g[mid] * (1 + aw[mid]) ** 4 <= c4)
    # far out only the rounding floor of the transform remains
    assert np.all(g[far] <= 1e-14 * np.max(g))


@pytest.fixture(scope="module")
def psi2():
    return build_psi(2, G0, G1, 1.0, P11)


def test_psi_from_hat_zero_and_roundtrip(psi2):
    z = build_psi(1, zero_datum(), zero_datum(), 1.0, P11, s_max=5.0)
    assert np.all(psi_from_hat(z, np.linspace(-5, 5, 11)) == 0)
    y = np.linspace(-400, 400, 64001)
    psi = psi_from_hat(psi2, y)
    from fokas.transforms import forward_from_psi
    s = np.array([0.1, 0.3, 0.5])
    back = forward_from_psi(y, psi, s)
    ref = psi_hat(2, s, G0, G1, 1.0)
    assert np.max(np.abs(back - ref)) <= 1e-4 * np.max(np.abs(ref))


def test_psi_from_hat_spot_values(psi2):
    for y in (-7.0, -1.0, 0.0, 2.5, 11.0):
        f = lambda s, part: getattr(complex(np.exp(1j * s * y) * psi_hat(2, s, G0, G1, 1.0).item()), part)
        ref = complex(quad(f, 0, R, args=("real",), epsabs=1e-15, limit=200)[0],
                      quad(f, 0, R, args=("imag",), epsabs=1e-15, limit=200)[0]) / (2 * np.pi)
        got = psi_from_hat(psi2, np.array([y]))[0]
        assert abs(got - ref) <= 1e-8 * max(abs(ref), np.max(np.abs(psi2.hat_values)) / 100)


def test_plancherel_and_l2_norm(psi2):
    n2 = psi_norm(psi2, 2.0, window=400.0, n_y=40001)
    ref = hat_l2(psi2) / math.sqrt(2 * math.pi)
    assert abs(n2.norm - ref) <= 1e-6 * ref


def test_psi_norm_zero_data_and_range():
    z = build_psi(2, zero_datum(), zero_datum(), 1.0, P11, s_max=5.0)
    assert psi_norm(z, 1.5).norm == 0
    with pytest.raises(ValueError):
        psi_norm(z, 2.5)


def test_l1_norm_grid_refinement(psi2):
    a = psi_norm(psi2, 1.0, window=400.0, n_y=16001).norm
    b = psi_norm(psi2, 1.0, window=400.0, n_y=32001).norm
    assert abs(a - b) <= 1e-5 * b


def test_undecayed_hat_rejected(psi2):
    bad = type(psi2)(1, np.array([0.0, 1.0]), np.array([0.5, 0.5]), np.array([1.0, 1.0 + 0j]))
    with pytest.raises(DataError):
        psi_from_hat(bad, np.array([0.0]))
