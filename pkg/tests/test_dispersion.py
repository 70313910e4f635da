import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fokas.complex_plane import SpectralParams
from fokas.dispersion import (DispersionError, NormSample, admissible_pair, conjugate, decay_fit,
                              dispersion_ratio, lr_norm, sobolev_norm, strichartz_report)
from fokas.evaluator import ContourRule, EvaluationGrid, solve_field
from fokas.transforms import build_psi, gaussian_bump, psi_norm, zero_datum

P11 = SpectralParams(1.0, 1.0)
G0 = gaussian_bump(1.0, 0.5, 0.15, 1.0)
G1 = gaussian_bump(1.0, 0.5, 0.15, -0.5)
X = np.concatenate([[0.0], np.geomspace(1e-4, 1.0, 2000)[:-1], np.linspace(1.0, 40.0, 8000)])


def test_lr_norm_examples():
    assert lr_norm(np.zeros(10), np.linspace(0, 1, 10), 2.0) == 0
    y = np.exp(-X)
    assert abs(lr_norm(y, X, 2.0) - 1 / math.sqrt(2)) < 1e-6
    assert lr_norm(y, X, math.inf) == 1.0


def test_lr_norm_rejects_undecayed_field():
    x = np.linspace(0, 5, 100)
    with pytest.raises(DispersionError):
        lr_norm(np.exp(-0.1 * x), x, 2.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False), min_size=5, max_size=5),
       st.floats(2.0, 12.0))
def test_lr_norm_log_convexity(coef, r):
    x = np.linspace(0, 20, 2001)
    y = sum(c * np.exp(-(x - 2 * j) ** 2) for j, c in enumerate(coef)) * np.exp(-x)
    if not np.any(np.abs(y) > 1e-12):
        return
    n2, ninf, nr = lr_norm(y, x, 2.0), lr_norm(y, x, math.inf), lr_norm(y, x, r)
    assert nr <= n2 ** (2 / r) * ninf ** (1 - 2 / r) * (1 + 1e-9)


def test_conjugate_exponents():
    assert conjugate(2.0) == 2.0 and conjugate(4.0) == pytest.approx(4 / 3) and conjugate(math.inf) == 1.0


def test_dispersion_ratio_rules():
    assert dispersion_ratio(0.3, 2.0, 5.0, [2.0, 0.5]) == pytest.approx(2.0)
    assert dispersion_ratio(0.0625, math.inf, 1.0, [1.0]) == pytest.approx(0.5)
    with pytest.raises(DispersionError):
        dispersion_ratio(1.5, 2.0, 1.0, [1.0])
    with pytest.raises(DispersionError):
        dispersion_ratio(0.5, 2.0, 1.0, [0.0])


def _log_samples(f, r=math.inf):
    return [NormSample(float(t), r, float(f(t))) for t in np.geomspace(0.02, 1, 10)]


def test_decay_fit_exact_power_laws():
    assert decay_fit(_log_samples(lambda t: t ** -0.25))[0] == pytest.approx(-0.25, abs=1e-12)
    assert decay_fit(_log_samples(lambda t: 7.0))[0] == pytest.approx(0.0, abs=1e-12)


def test_decay_fit_rejects_bad_samples():
    with pytest.raises(DispersionError):
        decay_fit(_log_samples(lambda t: 1.0)[:5])
    mixed = _log_samples(lambda t: 1.0) + [NormSample(0.5, 2.0, 1.0)]
    with pytest.raises(DispersionError):
        decay_fit(mixed)
    with pytest.raises(DispersionError):
        decay_fit(_log_samples(lambda t: 0.0))


def test_norm_sample_invariants():
    with pytest.raises(ValueError):
        NormSample(0.5, 2.0, -1.0)
    with pytest.raises(ValueError):
        NormSample(0.5, 1.5, 1.0)


@pytest.mark.parametrize("lam, r, ok", [(math.inf, 2.0, True), (8.0, math.inf, True),
                                        (4.0, 2.0, False), (16.0, 4.0, True), (1.0, math.inf, False)])
def test_admissible_examples(lam, r, ok):
    assert admissible_pair(lam, r) is ok


@given(st.floats(2.0, 1e6))
def test_admissible_curve(r):
    gap = 0.125 - 0.25 / r
    lam = math.inf if gap == 0 else 1.0 / gap
    assert admissible_pair(lam, r)
    if lam <= 1e6:
        assert not admissible_pair(lam * 1.01, r)


def test_sobolev_zero_order_is_l2():
    l2 = math.sqrt(quad(lambda t: abs(G0(t)) ** 2, 0, 1, epsabs=1e-14, limit=200)[0])
    assert sobolev_norm(G0, 0.0) == pytest.approx(l2, rel=1e-10)
    assert sobolev_norm(G0, 0.375) > sobolev_norm(G0, 0.125) > l2
    assert sobolev_norm(zero_datum(), 0.375) == 0


@pytest.fixture(scope="module")
def small_field():
    grid = EvaluationGrid.graded(1e-3, 120.0, 1200, np.geomspace(0.05, 1.0, 12))
    return grid


def test_strichartz_zero_and_inadmissible(small_field):
    z = zero_datum()
    f = solve_field(small_field, z, z)
    rep = strichartz_report(8.0, math.inf, f, z, z)
    assert rep["ratio"] == 0 and rep["zero_data"]
    with pytest.raises(DispersionError):
        strichartz_report(4.0, 2.0, f, z, z)


def test_strichartz_homogeneous(small_field):
    a = solve_field(small_field, G0, G1, tol=1e-8)
    b = solve_field(small_field, G0.scaled(3.0), G1.scaled(3.0), tol=1e-8)
    ra = strichartz_report(8.0, math.inf, a, G0, G1)
    rb = strichartz_report(8.0, math.inf, b, G0.scaled(3.0), G1.scaled(3.0))
    assert rb["ratio"] == pytest.approx(ra["ratio"], rel=1e-8)
    assert rb["lhs"] == pytest.approx(3 * ra["lhs"], rel=1e-8)


def test_dispersion_ratio_homogeneous_through_pipeline():
    t = np.array([0.1, 0.5])
    x = EvaluationGrid.graded(1e-3, 120.0, 1200, t).x_nodes
    out = []
    for a in (1.0, 2.0 - 1.0j):
        g0, g1 = G0.scaled(a), G1.scaled(a)
        vals = ContourRule.build(g0, g1, 1.0, P11, 1e-8, x_max=120.0).integrate(x, t)
        specs = [build_psi(i, g0, g1, 1.0, P11) for i in range(1, 6)]
        psum = sum(psi_norm(s, 2.0, 100.0, 4001).norm for s in specs)
        out.append([dispersion_ratio(tj, 2.0, lr_norm(vals[:, j], x, 2.0), [psum])
                    for j, tj in enumerate(t)])
    assert np.allclose(out[0], out[1], rtol=1e-8, atol=0)
