"""Spatial L^r norms, dispersion ratios, decay fits and the s = 0 Strichartz report."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .complex_plane import SpectralParams
from .evaluator import ContourRule, EvaluationGrid, SolutionField
from .quadrature import composite_gk
from .transforms import BoundaryDatum, build_psi, fourier_transform, psi_norm


class DispersionError(ValueError):
    """Invalid sample sets, undecayed tails or zero data."""


@dataclass(frozen=True)
class NormSample:
    t: float
    r: float
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("norm values are non-negative")
        if self.r < 2:
            raise ValueError("r must be at least 2")


def conjugate(r: float) -> float:
    return 1.0 if math.isinf(r) else r / (r - 1.0)


def lr_norm(values, x, r: float, tail_rtol: float = 1e-4, check_tail: bool = True,
            abs_floor: float = 0.0) -> float:
    """||y||_{L^r(0, x_max)} by the trapezoid rule on the (graded) nodes; r = inf is the grid max.

    The tail test is skipped below ``abs_floor`` (fields at quadrature noise level).
    """
    a = np.abs(np.asarray(values))
    x = np.asarray(x, dtype=float)
    big = float(a.max(initial=0.0))
    if big == 0.0:
        return 0.0
    if check_tail and a[-1] > max(tail_rtol * big, abs_floor):
        raise DispersionError(f"field has not decayed at x = {x[-1]:g} "
                              f"(|y| = {a[-1]:.2e} vs max {big:.2e}); extend the grid")
    if math.isinf(r):
        return big
    # trapezoid on [x0, x_max] plus the sliver [0, x0] with the first value
    return float((trapezoid(a ** r, x) + x[0] * a[0] ** r) ** (1.0 / r))


def dispersion_ratio(t: float, r: float, norm: float, psi_norms) -> float:
    """C(t) = t^(1/4 - 1/(2r)) ||y(., t)||_r / sum_i ||Psi_i||_{r'}."""
    if not 0 < t <= 1:
        raise DispersionError("the decay estimate is stated for 0 < t <= 1")
    denom = float(sum(psi_norms))
    if denom == 0.0:
        raise DispersionError("zero data: the ratio is undefined")
    expo = 0.25 - (0.0 if math.isinf(r) else 0.5 / r)
    return t ** expo * norm / denom


def decay_fit(samples) -> tuple[float, float, float]:
    """Least-squares slope and intercept of log(value) against log(t), and the RMS residual."""
    samples = list(samples)
    if len(samples) < 8:
        raise DispersionError("need at least 8 samples")
    rs = {s.r for s in samples}
    if len(rs) != 1:
        raise DispersionError("samples must share one r")
    t = np.array([s.t for s in samples])
    v = np.array([s.value for s in samples])
    if np.any(v <= 0) or np.any(t <= 0) or np.any(t > 1):
        raise DispersionError("degenerate samples: need 0 < t <= 1 and positive values")
    lt, lv = np.log(t), np.log(v)
    A = np.vstack([lt, np.ones_like(lt)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, lv, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, intercept] - lv) ** 2)))
    return float(slope), float(intercept), resid


def admissible_pair(lam: float, r: float) -> bool:
    """Biharmonic admissibility 1/8 = 1/(4r) + 1/lambda with both exponents in [2, inf]."""
    if not (2 <= lam <= math.inf and 2 <= r <= math.inf):
        return False
    inv = lambda v: 0.0 if math.isinf(v) else 1.0 / v  # noqa: E731
    return abs(0.125 - 0.25 * inv(r) - inv(lam)) <= 1e-12


def sobolev_norm(g: BoundaryDatum, s: float, rtol: float = 1e-12) -> float:
    """||g||_{H^s(R)} of the zero-extended datum, multiplier (1 + tau^2)^(s/2)."""
    if g.is_zero():
        return 0.0
    width = 2.0 * math.pi / max(g.support[1] - g.support[0], 1e-12)
    tau_max = 64.0 * width
    while True:
        edges = np.linspace(-tau_max, tau_max, int(2 * tau_max / (0.5 * width)) + 1)
        tau, wk, _ = composite_gk(edges)
        dens = (1.0 + tau ** 2) ** s * np.abs(fourier_transform(g, tau)) ** 2
        edge = dens[np.abs(tau) > 0.9 * tau_max]
        if edge.max(initial=0.0) <= rtol * dens.max() or tau_max > 1e6:
            break
        tau_max *= 2.0
    return math.sqrt(float(np.dot(wk, dens)) / (2.0 * math.pi))


@dataclass
class DispersionRun:
    t: np.ndarray
    r_values: tuple
    norms: dict
    psi_sums: dict
    ratios: dict
    slopes: dict
    psi_divergent: dict

    def samples(self, r):
        return [NormSample(float(t), r, float(v)) for t, v in zip(self.t, self.norms[r])]

    def rows(self):
        for r in self.r_values:
            for t, n, c in zip(self.t, self.norms[r], self.ratios[r]):
                yield {"t": float(t), "r": r, "norm": float(n), "psi_sum": self.psi_sums[r],
                       "ratio": float(c)}


def psi_sums(g0, g1, T, p, r_values, window: float = 200.0, n_y: int = 16001):
    sums, div = {}, {}
    specs = [build_psi(i, g0, g1, T, p) for i in range(1, 6)]
    for r in r_values:
        rp = conjugate(r)
        norms = [psi_norm(sp, rp, window, n_y) for sp in specs]
        sums[r] = float(sum(n.norm for n in norms))
        div[r] = any(n.tail_divergent for n in norms)
    return sums, div


def dispersion_run(g0, g1, p: SpectralParams | None = None, T: float | None = None,
                   t_nodes=None, r_values=(2.0, 4.0, math.inf), x_max: float = 120.0,
                   nx: int = 2400, tol: float = 1e-8, refine: int = 1,
                   psi_window: float = 200.0, psi_ny: int = 16001) -> DispersionRun:
    """Norms of the evaluated field on a log t-grid, the Psi sums and the fitted slopes."""
    p = p or SpectralParams(1.0, 1.0)
    T = g0.T if T is None else T
    if t_nodes is None:
        t_nodes = np.geomspace(0.02, 1.0, 20)
    t_nodes = np.asarray(t_nodes, dtype=float)
    grid = EvaluationGrid.graded(1e-3, x_max, nx * refine, t_nodes)
    rule = ContourRule.build(g0, g1, T, p, tol, x_max=x_max, refine=refine)
    vals = rule.integrate(grid.x_nodes, t_nodes)
    sums, div = psi_sums(g0, g1, T, p, r_values, psi_window * refine, (psi_ny - 1) * refine + 1)
    norms, ratios, slopes = {}, {}, {}
    for r in r_values:
        n = np.array([lr_norm(vals[:, j], grid.x_nodes, r, abs_floor=10 * tol)
                      for j in range(t_nodes.size)])
        norms[r] = n
        ratios[r] = np.array([dispersion_ratio(t, r, v, [sums[r]]) for t, v in zip(t_nodes, n)])
        slopes[r] = decay_fit(NormSample(float(t), r, float(v)) for t, v in zip(t_nodes, n))[0]
    return DispersionRun(t_nodes, tuple(r_values), norms, sums, ratios, slopes, div)


def strichartz_report(lam: float, r: float, field: SolutionField, g0: BoundaryDatum,
                      g1: BoundaryDatum) -> dict:
    """LHS ||y||_{L^lam_t L^r_x} over the field's t-nodes and RHS ||g0||_{H^3/8} + ||g1||_{H^1/8}."""
    if not admissible_pair(lam, r):
        raise DispersionError(f"(lambda, r) = ({lam}, {r}) is not admissible")
    if g0.is_zero() and g1.is_zero():
        return {"lhs": 0.0, "rhs": 0.0, "ratio": 0.0, "zero_data": True}
    x, t = field.grid.x_nodes, field.grid.t_nodes
    per_t = np.array([lr_norm(field.values[:, j], x, r, abs_floor=10 * field.tol)
                      for j in range(t.size)])
    if math.isinf(lam):
        lhs = float(per_t.max())
    else:
        # the field vanishes as t -> 0 for data supported away from 0, so the
        # first sliver [0, t_0] is taken with the first value
        lhs = float((trapezoid(per_t ** lam, t) + t[0] * per_t[0] ** lam) ** (1.0 / lam))
    rhs = sobolev_norm(g0, 3.0 / 8.0) + sobolev_norm(g1, 1.0 / 8.0)
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs, "zero_data": False}
