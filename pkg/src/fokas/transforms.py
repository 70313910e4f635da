"""Boundary data, t-transforms, the spectral density G and the Psi functions."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .complex_plane import (BranchCut, ContourSet, SpectralParams, build_contour,
                            invariance_nu, nu_boundary, spectral_w)
from .quadrature import composite_gk, graded_panels


class DataError(ValueError):
    """Boundary data violating support or smoothness requirements."""


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
        out = a / (a + b)
    return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out))


def cutoff(t, lo: float, hi: float, ramp: float):
    """Smooth window equal to 1 on [lo + ramp, hi - ramp] and 0 outside (lo, hi)."""
    t = np.asarray(t, dtype=float)
    return smooth_step((t - lo) / ramp) * smooth_step((hi - t) / ramp)


@dataclass(frozen=True)
class BoundaryDatum:
    """A boundary function supported in (support[0], support[1]) within (0, T)."""

    kind: str
    T: float
    evaluator: Callable = field(repr=False, compare=False)
    support: tuple[float, float] = (0.0, 0.0)
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        inside = (t > lo) & (t < hi)
        out = np.zeros(t.shape, dtype=complex)
        if np.any(inside):
            out[inside] = self.evaluator(t[inside])
        return out[()] if out.ndim == 0 else out

    def scaled(self, a: complex) -> "BoundaryDatum":
        f = self.evaluator
        return BoundaryDatum(self.kind, self.T, lambda t: a * f(t), self.support,
                             {**self.params, "scale": a * self.params.get("scale", 1.0)})

    def __add__(self, other: "BoundaryDatum") -> "BoundaryDatum":
        f, g = self.evaluator, other.evaluator
        lo = min(self.support[0], other.support[0])
        hi = max(self.support[1], other.support[1])
        return BoundaryDatum("sum", self.T, lambda t: f(t) * _ind(t, self.support)
                             + g(t) * _ind(t, other.support), (lo, hi), {})

    def max_abs(self, n: int = 4001) -> float:
        t = np.linspace(*self.support, n)
        return float(np.max(np.abs(self(t)))) if self.support[1] > self.support[0] else 0.0

    def is_zero(self) -> bool:
        return self.kind == "zero"


def _ind(t, sup):
    t = np.asarray(t, dtype=float)
    return ((t > sup[0]) & (t < sup[1])).astype(float)


def zero_datum(T: float = 1.0) -> BoundaryDatum:
    return BoundaryDatum("zero", T, lambda t: np.zeros(np.shape(t), dtype=complex), (0.0, 0.0))


def gaussian_bump(T: float = 1.0, center: float = 0.5, width: float = 0.1,
                  amplitude: complex = 1.0, support: tuple[float, float] | None = None,
                  ramp: float | None = None) -> BoundaryDatum:
    """A exp(-(t - center)^2 / width^2) times a C-infinity cutoff vanishing outside (0, T)."""
    if support is None:
        support = (0.0, T)
    lo, hi = support
    if not 0.0 <= lo < hi <= T:
        raise DataError("support must lie in [0, T]")
    if ramp is None:
        ramp = 0.25 * (hi - lo)
    amp = complex(amplitude)

    def f(t):
        return amp * np.exp(-((t - center) / width) ** 2) * cutoff(t, lo, hi, ramp)

    return BoundaryDatum("gaussian_bump", T, f, (lo, hi),
                         {"center": center, "width": width, "amplitude": amp, "ramp": ramp})


def poly_bump(T: float = 1.0, m: int = 4, amplitude: complex = 1.0) -> BoundaryDatum:
    """A t^m (T - t)^m / (T/2)^(2m); C^(m-1) across the support ends."""
    if m < 4:
        raise DataError("poly_bump needs m >= 4")
    amp = complex(amplitude)
    scale = (T / 2.0) ** (2 * m)

    def f(t):
        return amp * (t ** m) * ((T - t) ** m) / scale

    return BoundaryDatum("poly_bump", T, f, (0.0, T), {"m": m, "amplitude": amp})


def file_datum(path: str | Path, T: float, ramp: float | None = None) -> BoundaryDatum:
    """Samples from a CSV with columns t, re_g, im_g; cubic spline, tapered to (0, T)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    g = np.array([float(r["re_g"]) + 1j * float(r["im_g"]) for r in rows])
    if np.any(np.diff(t) <= 0):
        raise DataError("sample times must be strictly increasing")
    lo, hi = max(t[0], 0.0), min(t[-1], T)
    if ramp is None:
        ramp = 0.1 * (hi - lo)
    sre, sim = CubicSpline(t, g.real), CubicSpline(t, g.imag)

    def f(tt):
        return (sre(tt) + 1j * sim(tt)) * cutoff(tt, lo, hi, ramp)

    return BoundaryDatum("file_samples", T, f, (lo, hi), {"path": str(path), "ramp": ramp})


def check_support(g: BoundaryDatum, n: int = 2001) -> float:
    """Largest |g| at and beyond the support ends relative to max|g| (0 for zero data)."""
    if g.is_zero():
        return 0.0
    lo, hi = g.support
    m = g.max_abs()
    edge = max(abs(complex(g.evaluator(np.array([lo + 1e-14 * max(1, g.T)]))[0])),
               abs(complex(g.evaluator(np.array([hi - 1e-14 * max(1, g.T)]))[0])))
    return edge / m if m > 0 else 0.0


# ---------------------------------------------------------------------------
# t-transform

_CC_N = 16
_cc_theta = np.pi * np.arange(_CC_N + 1) / _CC_N
_CC_X = -np.cos(_cc_theta)


def _cc_weights(n):
    w = np.zeros(n + 1)
    theta = np.pi * np.arange(n + 1) / n
    for k in range(n + 1):
        s = 0.0
        for j in range(1, n // 2 + 1):
            b = 1.0 if 2 * j == n else 2.0
            s += b * np.cos(2 * j * theta[k]) / (4 * j * j - 1)
        c = 1.0 if k in (0, n) else 2.0
        w[k] = c / n * (1.0 - s)
    return w


_CC_W = _cc_weights(_CC_N)


def _cc_grid(lo, hi, panels):
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1], edges[1:]
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    nodes = (c[:, None] + h[:, None] * _CC_X[None, :]).ravel()
    weights = (h[:, None] * _CC_W[None, :]).ravel()
    return nodes, weights


def _transform_fixed(g, kappa, lo, hi, panels):
    s, wts = _cc_grid(lo, hi, panels)
    gs = g(s) * wts
    out = np.empty(kappa.shape, dtype=complex)
    chunk = max(1, 4_000_000 // max(s.size, 1))
    for i in range(0, kappa.size, chunk):
        kc = kappa[i:i + chunk]
        out[i:i + chunk] = np.exp(np.outer(kc, s)) @ gs
    return out


def t_transform(g: BoundaryDatum, kappa, t_upper: float | None = None, *,
                return_error: bool = False, rtol: float = 1e-10):
    """g~(kappa, t) = integral_0^t exp(kappa s) g(s) ds for an array of kappa.

    Composite Clenshaw-Curtis with at least four panels per oscillation
    wavelength |Im kappa| t / 2pi; the error estimate compares against the
    rule with half as many panels.
    """
    if t_upper is None:
        t_upper = g.T
    if not t_upper > 0:
        raise ValueError("t_upper must be positive")
    kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
    if np.any(kappa.real > 1e-8 * (1.0 + np.abs(kappa))):
        raise ValueError("Re kappa > 0 (exponential growth) is not supported")
    out = np.zeros(kappa.shape, dtype=complex)
    err = np.zeros(kappa.shape)
    lo, hi = g.support[0], min(g.support[1], t_upper)
    if g.is_zero() or hi <= lo:
        return (out, err) if return_error else out
    span = hi - lo
    # bins of comparable frequency share one grid
    freq = np.abs(kappa.imag) + np.maximum(-kappa.real, 0.0)
    need = np.maximum(4, 4 * np.ceil(freq * span / (2 * np.pi)).astype(int))
    # the data itself must also be resolved, whatever the frequency
    need = np.maximum(need, legendre_expansion(g, t_upper).panels)
    need = 2 ** np.ceil(np.log2(need)).astype(int)
    for n in np.unique(need):
        idx = np.nonzero(need == n)[0]
        fine = _transform_fixed(g, kappa[idx], lo, hi, 2 * n)
        out[idx] = fine
        if return_error:
            coarse = _transform_fixed(g, kappa[idx], lo, hi, n)
            err[idx] = np.abs(fine - coarse)
    return (out, err) if return_error else out


# Purely oscillatory transforms through piecewise Legendre expansions.
# On the contour kappa = -w is imaginary, and the moments
#   integral_{-1}^{1} exp(-i a x) P_j(x) dx = 2 (-i)^j j_j(a)
# make every additional frequency cost one row of spherical Bessel values.

_LEG_DEG = 24
_LEG_X, _LEG_W = np.polynomial.legendre.leggauss(48)
_LEG_V = np.polynomial.legendre.legvander(_LEG_X, _LEG_DEG - 1)
_LEG_PROJ = (_LEG_V * _LEG_W[:, None]).T * ((2 * np.arange(_LEG_DEG) + 1) / 2.0)[:, None]


@dataclass
class LegendreExpansion:
    lo: float
    hi: float
    coeffs: np.ndarray
    tail: float

    @property
    def panels(self) -> int:
        return self.coeffs.shape[0]


_EXPANSIONS: dict = {}


def legendre_expansion(g: BoundaryDatum, t_upper: float, atol: float = 1e-13,
                       max_panels: int = 4096) -> LegendreExpansion:
    key = (id(g), t_upper)
    hit = _EXPANSIONS.get(key)
    if hit is not None and hit[0] is g:
        return hit[1]
    lo, hi = g.support[0], min(g.support[1], t_upper)
    scale = max(g.max_abs(), 1e-300) * (hi - lo)
    panels = 8
    while True:
        edges = np.linspace(lo, hi, panels + 1)
        c, h = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
        vals = g(c[:, None] + h[:, None] * _LEG_X[None, :])
        coeffs = vals @ _LEG_PROJ.T
        tail = float(np.sum(np.abs(coeffs[:, -4:]) * h[:, None]))
        if tail <= atol * scale or panels >= max_panels:
            break
        panels *= 2
    exp = LegendreExpansion(lo, hi, coeffs, tail)
    if len(_EXPANSIONS) > 64:
        _EXPANSIONS.clear()
    _EXPANSIONS[key] = (g, exp)
    return exp


def fourier_transform(g: BoundaryDatum, omega, t_upper: float | None = None) -> np.ndarray:
    """integral_0^t exp(-i omega s) g(s) ds for real omega (the t-transform at kappa = -i omega)."""
    from scipy.special import spherical_jn

    if t_upper is None:
        t_upper = g.T
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.zeros(omega.shape, dtype=complex)
    if g.is_zero() or min(g.support[1], t_upper) <= g.support[0]:
        return out
    ex = legendre_expansion(g, t_upper)
    edges = np.linspace(ex.lo, ex.hi, ex.panels + 1)
    c, h = 0.5 * (edges[:-1] + edges[1:]), 0.5 * (ex.hi - ex.lo) / ex.panels
    j = np.arange(_LEG_DEG)
    phase_j = 2.0 * (-1j) ** j
    chunk = 20000
    for a in range(0, omega.size, chunk):
        om = omega[a:a + chunk]
        bes = spherical_jn(j[None, :], (om * h)[:, None]) * phase_j[None, :]
        shift = np.exp(-1j * np.outer(om, c))
        out[a:a + chunk] = h * np.einsum("np,nj,pj->n", shift, bes, ex.coeffs, optimize=True)
    return out


def _transform_on_contour(g: BoundaryDatum, w, T: float):
    """g~(w, T) with the fast route when every w is imaginary."""
    if np.all(w.real == 0.0):
        return fourier_transform(g, -w.imag, T)
    return t_transform(g, w, T)


# ---------------------------------------------------------------------------
# spectral density

def spectral_G(k, g0: BoundaryDatum, g1: BoundaryDatum, T: float, p: SpectralParams,
               cut: BranchCut | None = None, nu=None, k_plus_nu=None):
    """G(k;T) = -2ik(k+nu) g1~(w,T) - 2k nu (k+nu) g0~(w,T).

    ``nu`` defaults to the rotated-cut invariance map; ``k_plus_nu`` may be
    supplied where the sum is known in closed form.
    """
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if nu is None:
        nu = invariance_nu(k, p, cut)
    nu = np.broadcast_to(np.asarray(nu, dtype=complex), k.shape)
    kpn = k + nu if k_plus_nu is None else np.broadcast_to(np.asarray(k_plus_nu, dtype=complex), k.shape)
    w = spectral_w(k, p)
    # w is purely imaginary on the contour; strip rounding noise in Re w
    w = np.where(np.abs(w.real) <= 1e-12 * (1.0 + np.abs(w)), 1j * w.imag, w)
    tg1 = _transform_on_contour(g1, w, T)
    tg0 = _transform_on_contour(g0, w, T)
    return -2j * k * kpn * tg1 - 2.0 * k * nu * kpn * tg0


def contour_nu(cs: ContourSet, label: str, u):
    """nu and k + nu at regular parameter values u along a path."""
    path = cs[label]
    k = np.asarray(path.k_of_u(u), dtype=complex)
    if path.decay_class == "mixed-hyperbola":
        # on a^2 - b^2 = c the admissible root is -conj(k), so k + nu = 2i Im k
        return -np.conj(k), 2j * k.imag
    nu = nu_boundary(path, u, cs.params)
    return nu, k + nu


# ---------------------------------------------------------------------------
# Psi-hat and Psi

PSI_SUPPORT = {1: "s >= 0", 2: "0 <= s <= r", 3: "s >= r", 4: "s >= r", 5: "s <= -r"}


def psi_hat(i: int, s, g0: BoundaryDatum, g1: BoundaryDatum, T: float,
            p: SpectralParams | None = None, stab_window: float = 1e-4):
    """Psi-hat_i(s) for alpha = beta = 1 style contours; zero off its support.

    For i = 3, 4 the product G * (+-1 + i s/m), m = sqrt(s^2 - r^2), is formed
    with k + nu = 2 i m substituted, so the Jacobian pole cancels
    analytically: G (+-1 + i s/m) = [-2ik g1~ - 2k nu g0~] * 2i(+-m + i s).
    """
    p = p or SpectralParams(1.0, 1.0)
    cs = build_contour(p)
    r = p.threshold
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros(s.shape, dtype=complex)
    if i == 1:
        msk = s >= 0
        if np.any(msk):
            u = s[msk]
            nu, kpn = contour_nu(cs, "gamma1", u)
            out[msk] = spectral_G(1j * u, g0, g1, T, p, nu=nu, k_plus_nu=kpn)
    elif i in (2, 5):
        msk = (s >= 0) & (s <= r) if i == 2 else (s <= -r)
        if np.any(msk):
            lab = "gamma2" if i == 2 else "gamma5"
            u = s[msk]
            nu, kpn = contour_nu(cs, lab, u)
            out[msk] = spectral_G(u + 0j, g0, g1, T, p, nu=nu, k_plus_nu=kpn)
    elif i in (3, 4):
        msk = s >= r
        if np.any(msk):
            ss = s[msk]
            m = np.sqrt(np.maximum(ss * ss - r * r, 0.0))
            sign = 1.0 if i == 3 else -1.0
            k = sign * ss + 1j * m
            nu = -np.conj(k)
            w = spectral_w(k, p)
            w = 1j * w.imag
            core = -2j * k * _transform_on_contour(g1, w, T) - 2.0 * k * nu * _transform_on_contour(g0, w, T)
            out[msk] = core * 2j * (sign * m + 1j * ss)
    else:
        raise ValueError("psi index must be 1..5")
    return out[()] if np.ndim(out) == 0 else out


def psi_hat_unstabilized(i: int, s, g0, g1, T, p: SpectralParams | None = None):
    """Psi-hat_3/4 by the literal product G(k) (+-1 + i s/m) (for comparison only)."""
    p = p or SpectralParams(1.0, 1.0)
    r = p.threshold
    s = np.atleast_1d(np.asarray(s, dtype=float))
    m = np.sqrt(s * s - r * r)
    sign = 1.0 if i == 3 else -1.0
    k = sign * s + 1j * m
    nu = -np.conj(k)
    G = spectral_G(k, g0, g1, T, p, nu=nu)
    return G * (sign + 1j * s / m)


@dataclass
class PsiSpec:
    """Sampled Psi-hat_i on an s-quadrature grid and, on demand, Psi_i on a y-grid."""

    index: int
    s_grid: np.ndarray
    weights: np.ndarray
    hat_values: np.ndarray
    jumps: tuple = ()
    y_grid: np.ndarray | None = None
    psi_samples: np.ndarray | None = None

    def __post_init__(self):
        if self.psi_samples is None and self.y_grid is not None:
            self.psi_samples = psi_from_hat(self, self.y_grid)


def _psi_nodes(i, r, s_max, width, branch=1.0):
    if i == 1:
        edges = graded_panels(0.0, s_max, width, singular=(0.0,))
    elif i == 2:
        edges = graded_panels(0.0, r, min(width, r / 4), singular=(0.0, r))
    elif i in (3, 4):
        edges = graded_panels(r, s_max + r, width, singular=(r,))
    else:
        edges = -graded_panels(r, s_max + r, width, singular=(r, branch))[::-1]
    return composite_gk(edges)


def hat_decay_extent(g0, g1, T, p: SpectralParams, tol: float = 1e-10) -> float:
    """s beyond which every |Psi-hat_i| stays below tol * max (probed on a coarse grid)."""
    s = np.linspace(0.0, 40.0, 801)
    vals = [np.abs(psi_hat(i, s if i != 5 else -s - p.threshold, g0, g1, T, p)) for i in (1, 3, 4, 5)]
    big = max(float(np.max(v)) for v in vals)
    if big == 0:
        return 1.0
    last = 0.0
    for v in vals:
        nz = np.nonzero(v > tol * big)[0]
        if nz.size:
            last = max(last, s[min(nz[-1] + 1, s.size - 1)])
    if last >= s[-1]:
        raise DataError("Psi-hat does not decay within |s| <= 40; data not smooth enough")
    return max(last, 1.0)


def build_psi(i: int, g0, g1, T, p: SpectralParams | None = None, s_max: float | None = None,
              width: float = 0.05, y_grid=None) -> PsiSpec:
    p = p or SpectralParams(1.0, 1.0)
    r = p.threshold
    if s_max is None:
        s_max = hat_decay_extent(g0, g1, T, p)
    s, wk, _ = _psi_nodes(i, r, s_max, width, math.sqrt(p.ratio))
    hat = psi_hat(i, s, g0, g1, T, p)
    jumps = []
    if i in (3, 4):
        j = psi_hat(i, np.array([r]), g0, g1, T, p)[0]
        jumps.append((r, complex(j)))
    spec = PsiSpec(i, s, wk, hat, tuple(jumps))
    if y_grid is not None:
        spec.y_grid = np.asarray(y_grid, dtype=float)
        spec.psi_samples = psi_from_hat(spec, spec.y_grid)
    return spec


def psi_from_hat(spec: PsiSpec, y_grid, decay_rtol: float = 1e-9):
    """Psi(y) = (1/2pi) integral exp(i s y) Psi-hat(s) ds on the stored s-rule."""
    y = np.asarray(y_grid, dtype=float)
    hv = spec.hat_values
    big = np.max(np.abs(hv)) if hv.size else 0.0
    if big == 0:
        return np.zeros(y.shape, dtype=complex)
    far = np.argmax(np.abs(spec.s_grid))
    if abs(hv[far]) > decay_rtol * big:
        raise DataError("Psi-hat has not decayed at the truncation edge")
    out = np.empty(y.shape, dtype=complex)
    wh = spec.weights * hv
    chunk = max(1, 4_000_000 // hv.size)
    yf = y.ravel()
    res = np.empty(yf.shape, dtype=complex)
    for a in range(0, yf.size, chunk):
        res[a:a + chunk] = np.exp(1j * np.outer(yf[a:a + chunk], spec.s_grid)) @ wh
    out[...] = res.reshape(y.shape) / (2 * np.pi)
    return out


def forward_from_psi(y, psi, s):
    """Psi-hat(s) = integral exp(-i s y) Psi(y) dy by the trapezoid rule on a uniform y-grid."""
    y = np.asarray(y, dtype=float)
    dy = y[1] - y[0]
    w = np.full(y.shape, dy)
    w[0] = w[-1] = dy / 2
    return np.exp(-1j * np.outer(np.atleast_1d(s), y)) @ (w * psi)


@dataclass
class PsiNorm:
    index: int
    r_prime: float
    norm: float
    window: float
    tail: float
    tail_divergent: bool = False


def psi_norm(spec: PsiSpec, r_prime: float, window: float = 200.0, n_y: int = 16001) -> PsiNorm:
    """L^{r'} norm of Psi_i over |y| <= window plus the analytic tail of any jump.

    A jump J of Psi-hat gives |Psi(y)| ~ |J| / (2 pi |y|); its tail beyond the
    window contributes 2 (|J|/2pi)^{r'} window^{1-r'} / (r'-1), which is
    infinite for r' = 1 (the returned norm is then the windowed value).
    """
    if not 1.0 <= r_prime <= 2.0:
        raise ValueError("r' must lie in [1, 2]")
    y = np.linspace(-window, window, n_y)
    psi = psi_from_hat(spec, y)
    a = np.abs(psi) ** r_prime
    dy = y[1] - y[0]
    inner = dy * (a.sum() - 0.5 * (a[0] + a[-1]))
    tail, divergent = 0.0, False
    jsum = sum(abs(j) for _, j in spec.jumps)
    if jsum > 0:
        if r_prime == 1.0:
            divergent = True
        else:
            tail = 2.0 * (jsum / (2 * np.pi)) ** r_prime * window ** (1 - r_prime) / (r_prime - 1)
    return PsiNorm(spec.index, r_prime, float((inner + tail) ** (1.0 / r_prime)),
                   window, float(tail), divergent)


def hat_l2(spec: PsiSpec) -> float:
    return float(np.sqrt(np.dot(spec.weights, np.abs(spec.hat_values) ** 2)))
