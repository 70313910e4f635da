"""Evaluation of W_b[g0, g1](x, t) on the oriented boundary of D+.

W_b(x, t) = alpha * sum_l int_{gamma_l} E(k; x, t) G(k; T) dk,
E(k; x, t) = -(1/2pi) exp(i k x - w(k) t).

Every path is discretised once by a composite Gauss-Kronrod rule in its
regular parameter, with panels sized to the local oscillation of the
integrand and graded towards branch points; G is tabulated at the nodes and
reused for every (x, t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complex_plane import BranchCut, ContourPath, ContourSet, SpectralParams, build_contour, spectral_w
from .quadrature import QuadratureError, adaptive_path_quad, composite_gk, graded_panels
from .transforms import BoundaryDatum, contour_nu, spectral_G, t_transform

INV_2PI = 1.0 / (2.0 * math.pi)


class EvaluationError(RuntimeError):
    """Truncation or tolerance failure in the contour evaluation."""


@dataclass
class PathRule:
    label: str
    u: np.ndarray
    wk: np.ndarray
    wg: np.ndarray
    k: np.ndarray
    dk: np.ndarray
    w: np.ndarray
    G: np.ndarray
    u_max: float


def _local_frequency(path: ContourPath, u, p: SpectralParams, T: float, x_max: float):
    """Bound on d(phase)/du of exp(ikx - w t) G(k) along the path."""
    k = path.k_of_u(u)
    dk = np.abs(path.dk_du(u))
    dOmega = np.abs(4 * p.alpha * k ** 3 - 2 * p.beta * k) * dk
    return dOmega * T + x_max * dk


def _truncation_point(path, g0, g1, T, p, tol, extra_power, lo, step=0.05, u_span=60.0):
    """First u beyond which |G dk/du| (times (1+|k|)^extra) stays below tol / 100.

    The probe advances in blocks so that the costly far field (where the
    t-transform oscillates fastest) is only sampled when it is needed.
    """
    thresh = tol * 1e-2
    block = 40
    u0 = lo
    last_above = None
    peak = 0.0
    m0, m1 = g0.max_abs() * T, g1.max_abs() * T
    while u0 - lo < u_span:
        probe_u = u0 + step * np.arange(1, block + 1)
        nu, kpn = _nu_for(path, probe_u, p)
        k = path.k_of_u(probe_u)
        mag = np.abs(spectral_G(k, g0, g1, T, p, nu=nu, k_plus_nu=kpn) * path.dk_du(probe_u))
        mag = mag * (1.0 + np.abs(k)) ** extra_power
        peak = max(peak, float(mag.max()))
        # G cannot be resolved below rounding level: relative to its peak, and
        # relative to the polynomial prefactor multiplying the transforms
        rounding = 1e-14 * np.abs(k * kpn * path.dk_du(probe_u)) * (np.abs(nu) * m0 + m1)
        rounding = rounding * (1.0 + np.abs(k)) ** extra_power
        above = np.nonzero(mag > np.maximum(max(thresh, 1e-13 * peak), rounding))[0]
        if above.size:
            last_above = float(probe_u[above[-1]])
        elif last_above is None or probe_u[0] - last_above > 1.0:
            return (last_above if last_above is not None else lo) + 20 * step
        u0 = float(probe_u[-1])
    raise EvaluationError(f"G does not decay along {path.label}; boundary data not smooth enough")


def _nu_for(path: ContourPath, u, p: SpectralParams):
    cs = _FakeSet(p, path)
    return contour_nu(cs, path.label, u)


class _FakeSet:
    def __init__(self, p, path):
        self.params = p
        self._path = path

    def __getitem__(self, label):
        return self._path


@dataclass
class ContourRule:
    """Cached nodes, weights and G values for one (data, params, contour) triple."""

    params: SpectralParams
    T: float
    tol: float
    x_max: float
    rules: list[PathRule]
    contour: ContourSet = field(repr=False)

    @classmethod
    def build(cls, g0: BoundaryDatum, g1: BoundaryDatum, T: float,
              p: SpectralParams | None = None, tol: float = 1e-8, x_max: float = 20.0,
              extra_power: int = 0, phase_per_panel: float = 3.0, h_max: float = 0.25,
              refine: int = 1) -> "ContourRule":
        p = p or SpectralParams(1.0, 1.0)
        cs = build_contour(p)
        rules = []
        for path in cs.paths:
            lo, hi = path.u_interval
            flip = False
            if math.isinf(lo):
                # integrate rays to -infinity in the reflected parameter
                flip = True
            if flip:
                a_end = hi
                far = _truncation_point(_Reflected(path), g0, g1, T, p, tol, extra_power, -a_end)
                lo_u, hi_u = -far, a_end
            elif math.isinf(hi):
                lo_u, hi_u = lo, _truncation_point(path, g0, g1, T, p, tol, extra_power, lo)
            else:
                lo_u, hi_u = lo, hi
            sing = list(path.singular_u)
            ends = [lo_u] if path.decay_class != "mixed-hyperbola" else []
            edges = graded_panels(lo_u, hi_u, h_max / refine, singular=sing + ends, ratio=0.2,
                                  smallest=1e-11)
            edges = _refine_edges(path, edges, p, T, x_max, phase_per_panel / refine)
            u, wk, wg = composite_gk(edges)
            k = np.asarray(path.k_of_u(u), dtype=complex)
            dk = np.asarray(path.dk_du(u), dtype=complex)
            nu, kpn = contour_nu(_FakeSet(p, path), path.label, u)
            G = spectral_G(k, g0, g1, T, p, nu=nu, k_plus_nu=kpn)
            w = spectral_w(k, p)
            w = np.where(np.abs(w.real) <= 1e-12 * (1 + np.abs(w)), 1j * w.imag, w)
            rules.append(PathRule(path.label, u, wk, wg, k, dk, w, G, hi_u))
        return cls(p, T, tol, x_max, rules, cs)

    def integrate(self, x, t, m_x: int = 0, m_t: int = 0, labels=None, with_error: bool = False):
        """alpha * sum over paths of the node sums; returns array of shape (len(x), len(t))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((x.size, t.size), dtype=complex)
        err = np.zeros((x.size, t.size))
        for r in self.rules:
            if labels is not None and r.label not in labels:
                continue
            val, e = _path_sum(r, x, t, m_x, m_t)
            out += val
            err += e
        out *= self.params.alpha
        err *= abs(self.params.alpha)
        return (out, err) if with_error else out


class _Reflected:
    """View of a path to -infinity in the parameter v = -u."""

    def __init__(self, path):
        self.path = path
        self.label = path.label
        self.decay_class = path.decay_class

    def k_of_u(self, v):
        return self.path.k_of_u(-np.asarray(v))

    def dk_du(self, v):
        return self.path.dk_du(-np.asarray(v))

    def __getattr__(self, item):
        return getattr(self.path, item)


def _refine_edges(path, edges, p, T, x_max, phase):
    edges = np.asarray(edges, dtype=float)
    for _ in range(40):
        mid = 0.5 * (edges[:-1] + edges[1:])
        width = np.diff(edges)
        f = _local_frequency(path, np.stack([edges[:-1], mid, edges[1:]]), p, T, x_max).max(axis=0)
        bad = f * width > phase
        if not np.any(bad):
            return edges
        n = np.where(bad, np.ceil(f * width / phase).astype(int), 1)
        new = [edges[0]]
        for a, b, m in zip(edges[:-1], edges[1:], n):
            new.extend(np.linspace(a, b, m + 1)[1:])
        edges = np.array(new)
    return edges


def _path_sum(r: PathRule, x, t, m_x, m_t):
    amp = r.G * r.dk * (-INV_2PI)
    if m_x:
        amp = amp * (1j * r.k) ** m_x
    if m_t:
        amp = amp * (-r.w) ** m_t
    # columns: Kronrod then Gauss sums for each t
    time = np.exp(-np.outer(r.w, t))
    ck = (r.wk * amp)[:, None] * time
    cg = (r.wg * amp)[:, None] * time
    rhs = np.concatenate([ck, cg], axis=1)
    out = np.empty((x.size, 2 * t.size), dtype=complex)
    chunk = max(1, 2_000_000 // max(r.k.size, 1))
    for a in range(0, x.size, chunk):
        out[a:a + chunk] = np.exp(1j * np.outer(x[a:a + chunk], r.k)) @ rhs
    val = out[:, :t.size]
    return val, np.abs(val - out[:, t.size:])


# ---------------------------------------------------------------------------
# point-level API

_RULE_CACHE: dict = {}


def _rule_for(g0, g1, T, p, tol, x_max, extra_power=0):
    key = (id(g0), id(g1), T, p, tol, x_max, extra_power)
    rule = _RULE_CACHE.get(key)
    if rule is None:
        if len(_RULE_CACHE) > 32:
            _RULE_CACHE.clear()
        rule = ContourRule.build(g0, g1, T, p, tol, x_max=x_max, extra_power=extra_power)
        _RULE_CACHE[key] = (rule, g0, g1)
        return rule
    return rule[0]


def _check_xt(x, t, T):
    if x < 0:
        raise ValueError("x must be >= 0")
    if not 0 < t <= T * (1 + 1e-12):
        raise ValueError("t must lie in (0, T]")


def evaluate_point(x: float, t: float, g0: BoundaryDatum, g1: BoundaryDatum,
                   p: SpectralParams | None = None, cut: BranchCut | None = None,
                   tol: float = 1e-8, T: float | None = None) -> complex:
    """W_b[g0, g1](x, t)."""
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    _check_xt(x, t, T)
    if g0.is_zero() and g1.is_zero():
        return 0j
    rule = _rule_for(g0, g1, T, p, tol, max(20.0, x))
    val, err = rule.integrate([x], [t], with_error=True)
    if err[0, 0] > max(tol, 1e-6 * abs(val[0, 0])) * 10:
        raise EvaluationError(f"tolerance not met at (x, t) = ({x}, {t}): err {err[0, 0]:.2e}")
    return complex(val[0, 0])


def evaluate_component(ell: int | str, x: float, t: float, g0, g1, p=None, tol: float = 1e-8,
                       T: float | None = None) -> complex:
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    _check_xt(x, t, T)
    label = ell if isinstance(ell, str) else f"gamma{ell}"
    if g0.is_zero() and g1.is_zero():
        return 0j
    rule = _rule_for(g0, g1, T, p, tol, max(20.0, x))
    if label not in [r.label for r in rule.rules]:
        raise KeyError(label)
    return complex(rule.integrate([x], [t], labels={label})[0, 0])


def derivative_field(x: float, t: float, m_x: int, m_t: int, g0, g1, p=None, tol: float = 1e-8,
                     T: float | None = None) -> complex:
    """d^{m_x}/dx^{m_x} d^{m_t}/dt^{m_t} W_b at (x, t): integrand times (ik)^m_x (-w)^m_t."""
    if not (0 <= m_x <= 4 and 0 <= m_t <= 1):
        raise ValueError("covered orders are m_x <= 4, m_t <= 1")
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    _check_xt(x, t, T)
    if g0.is_zero() and g1.is_zero():
        return 0j
    rule = _rule_for(g0, g1, T, p, tol, max(20.0, x), extra_power=m_x + 4 * m_t)
    return complex(rule.integrate([x], [t], m_x=m_x, m_t=m_t)[0, 0])


def pde_residual(x: float, t: float, g0, g1, p=None, tol: float = 1e-8, T=None) -> complex:
    """y_t - i(alpha y_xxxx + beta y_xx) assembled from derivative_field calls."""
    p = p or SpectralParams(1.0, 1.0)
    yt = derivative_field(x, t, 0, 1, g0, g1, p, tol, T)
    y4 = derivative_field(x, t, 4, 0, g0, g1, p, tol, T)
    y2 = derivative_field(x, t, 2, 0, g0, g1, p, tol, T)
    return yt - 1j * (p.alpha * y4 + p.beta * y2)


def oracle_point(x: float, t: float, g0, g1, p=None, tol: float = 1e-10, T=None) -> complex:
    """Brute-force adaptive quadrature of E G dk along every path (independent check)."""
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    cs = build_contour(p)
    total = 0j
    for path in cs.paths:
        fs = _FakeSet(p, path)

        def integrand(u, path=path, fs=fs):
            k = path.k_of_u(u)
            nu, kpn = contour_nu(fs, path.label, u)
            G = spectral_G(k, g0, g1, T, p, nu=nu, k_plus_nu=kpn)
            w = spectral_w(k, p)
            w = np.where(np.abs(w.real) <= 1e-12 * (1 + np.abs(w)), 1j * w.imag, w)
            return -INV_2PI * np.exp(1j * k * x - w * t) * G * path.dk_du(u)

        lo, hi = path.u_interval
        if math.isinf(lo):
            far = _truncation_point(_Reflected(path), g0, g1, T, p, tol * 1e-2, 0, -hi)
            lo, hi = -far, hi
        elif math.isinf(hi):
            hi = _truncation_point(path, g0, g1, T, p, tol * 1e-2, 0, lo)
        res = adaptive_path_quad(integrand, (lo, hi), tol, breakpoints=path.singular_u,
                                 max_panels=200000)
        total += res.value
    return p.alpha * total


# ---------------------------------------------------------------------------
# grids and fields

@dataclass(frozen=True)
class EvaluationGrid:
    x_nodes: np.ndarray
    t_nodes: np.ndarray

    def __post_init__(self):
        x, t = np.asarray(self.x_nodes), np.asarray(self.t_nodes)
        if x.ndim != 1 or np.any(np.diff(x) <= 0) or x[0] <= 0:
            raise ValueError("x_nodes must be strictly increasing and positive")
        if t.ndim != 1 or np.any(np.diff(t) <= 0) or t[0] <= 0:
            raise ValueError("t_nodes must be strictly increasing and positive")

    @classmethod
    def graded(cls, x_min: float, x_max: float, n: int, t_nodes, n_geometric: int | None = None,
               x_switch: float | None = None):
        """Geometric spacing from x_min to x_switch, then linear to x_max."""
        if x_switch is None:
            x_switch = min(1.0, x_max / 4)
        if n_geometric is None:
            n_geometric = max(8, n // 8)
        geo = np.geomspace(x_min, x_switch, n_geometric)
        lin = np.linspace(x_switch, x_max, max(2, n - n_geometric + 1))[1:]
        return cls(np.concatenate([geo, lin]), np.asarray(t_nodes, dtype=float))


@dataclass
class SolutionField:
    params: SpectralParams
    grid: EvaluationGrid
    values: np.ndarray
    tol: float
    error: np.ndarray | None = None
    components: dict | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise EvaluationError("non-finite field values")


def solve_field(grid: EvaluationGrid, g0, g1, p=None, tol: float = 1e-6, T=None,
                components: bool = False, refine: int = 1) -> SolutionField:
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    if grid.t_nodes[-1] > T * (1 + 1e-12):
        raise ValueError("t nodes beyond T")
    x, t = grid.x_nodes, grid.t_nodes
    if g0.is_zero() and g1.is_zero():
        z = np.zeros((x.size, t.size), dtype=complex)
        return SolutionField(p, grid, z, tol, np.zeros(z.shape), None)
    rule = ContourRule.build(g0, g1, T, p, tol, x_max=float(x[-1]), refine=refine)
    vals, err = rule.integrate(x, t, with_error=True)
    comp = None
    if components:
        comp = {r.label: rule.integrate(x, t, labels={r.label}) for r in rule.rules}
    return SolutionField(p, grid, vals, tol, err, comp)


def trace_report(t_grid, x_min: float, g0, g1, p=None, tol: float = 1e-8, T=None) -> dict:
    """Rows (t, |y(x_min,t) - g0(t)|, |y_x(x_min,t) - g1(t)|) and max-norm summary."""
    if not 1e-4 <= x_min <= 1e-2:
        raise ValueError("x_min must lie in [1e-4, 1e-2]")
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    t_grid = np.asarray(t_grid, dtype=float)
    if g0.is_zero() and g1.is_zero():
        y = np.zeros(t_grid.size, dtype=complex)
        yx = y.copy()
    else:
        rule = ContourRule.build(g0, g1, T, p, tol, x_max=1.0, extra_power=1)
        y = rule.integrate([x_min], t_grid)[0]
        yx = rule.integrate([x_min], t_grid, m_x=1)[0]
    e0 = np.abs(y - g0(t_grid))
    e1 = np.abs(yx - g1(t_grid))
    rows = [{"t": float(a), "err_dirichlet": float(b), "err_neumann": float(c)}
            for a, b, c in zip(t_grid, e0, e1)]
    return {"rows": rows, "max_err_dirichlet": float(e0.max(initial=0.0)),
            "max_err_neumann": float(e1.max(initial=0.0)),
            "max_g0": float(np.abs(g0(t_grid)).max(initial=0.0)),
            "max_g1": float(np.abs(g1(t_grid)).max(initial=0.0))}


# ---------------------------------------------------------------------------
# kernels

def kernel_K(ell: int, y: float, x: float, t: float, tol: float = 1e-10) -> complex:
    """The kernels K_1..K_5 of the component representations (alpha = beta = 1).

    K_1 = int_0^inf exp(-s x + i (s^4 + s^2) t - i s y) ds
    K_2 = -(1/2pi) int_R exp(i s (x - y) + i (s^4 - s^2) t) ds
    K_3 = int_r^inf exp(i s (x - y) - i (4 s^4 - 2 s^2 + 1/4) t - m(s) x) ds
    K_4 = int_r^inf exp(-i s (x + y) - i (4 s^4 - 2 s^2 + 1/4) t - m(s) x) ds
    K_5 = -(1/2pi) int_{-inf}^{-r} exp(i s (x - y) + i (s^4 - s^2) t) ds
    with r = 1/sqrt(2) and m(s) = sqrt(s^2 - 1/2).
    """
    from .quadrature import R_HALF, oscillatory_I, ray_integral

    if x < 0 or not t > 0:
        raise ValueError("need x >= 0 and t > 0")
    if ell == 1:
        return ray_integral(lambda s: np.exp(-s * x), [t, 0.0, t, -y, 0.0], 0.0, tol).value
    if ell == 2:
        return -INV_2PI * oscillatory_I("benartzi", math.inf, x - y, t, tol)
    if ell in (3, 4):
        lin = (x - y) if ell == 3 else -(x + y)

        def amp(s):
            return np.exp(-np.sqrt(s * s - 0.5 + 0j) * x)

        return ray_integral(amp, [-4 * t, 0.0, 2 * t, lin, -0.25 * t], R_HALF, tol).value
    if ell == 5:
        # s -> -s maps (-inf, -r] onto [r, inf)
        one = lambda s: np.ones(np.shape(s), dtype=complex)  # noqa: E731
        return -INV_2PI * ray_integral(one, [t, 0.0, -t, -(x - y), 0.0], R_HALF, tol).value
    raise ValueError("ell must be in 1..5")
