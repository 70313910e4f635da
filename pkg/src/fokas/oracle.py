"""Finite-difference reference solver, half-line Fourier transform and global relation.

The FD solver is deliberately unrelated to the contour machinery: a
Crank-Nicolson march of fourth-order central differences on [0, L], with
ghost values at both ends taken from interpolating polynomials that honour
the two boundary conditions exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from .complex_plane import SpectralParams, spectral_w
from .transforms import BoundaryDatum, t_transform

D4 = np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0
D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


class OracleError(RuntimeError):
    """Leakage or linear-solver failure in the reference computation."""


@dataclass(frozen=True)
class FDGrid:
    L: float = 20.0
    Nx: int = 1000
    dt: float = 2.5e-4
    Nt: int = 4000

    def __post_init__(self):
        if self.L < 10:
            raise ValueError("L must be at least 10")
        if self.Nx < 200:
            raise ValueError("Nx must be at least 200")
        if self.dt <= 0 or self.Nt < 1:
            raise ValueError("dt and Nt must be positive")

    @property
    def T(self) -> float:
        return self.dt * self.Nt

    @property
    def h(self) -> float:
        return self.L / self.Nx

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.Nx + 1)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.Nt + 1)

    @classmethod
    def for_horizon(cls, T: float, L: float = 20.0, Nx: int = 1000, dt: float = 2.5e-4):
        Nt = max(1, int(round(T / dt)))
        return cls(L, Nx, T / Nt, Nt)


@dataclass(frozen=True)
class FDSolution:
    grid: FDGrid
    params: SpectralParams
    values: np.ndarray = field(repr=False)      # shape (Nt_saved, Nx + 1)
    t_saved: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)          # y_xx(0, t) at every step
    g3: np.ndarray = field(repr=False)          # y_xxx(0, t) at every step
    g0: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)
    leakage: float = 0.0

    def row(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.t_saved - t)))
        if abs(self.t_saved[i] - t) > 1e-9 * max(1.0, t):
            raise KeyError(f"time {t} not stored")
        return self.values[i]

    def trace_datum(self, which: int) -> BoundaryDatum:
        """Cubic-spline interpolant of a measured trace g_which, which in {0, 1, 2, 3}."""
        data = {0: self.g0, 1: self.g1, 2: self.g2, 3: self.g3}[which]
        t = self.grid.t
        sre, sim = CubicSpline(t, data.real), CubicSpline(t, data.imag)
        return BoundaryDatum(f"fd_trace{which}", self.grid.T,
                             lambda s: sre(s) + 1j * sim(s), (0.0, self.grid.T))


def _ghost_weights(h: float):
    """Ghost values y(-mh), m=1..3, and y''(0), y'''(0) from the interpolant.

    The degree-7 polynomial matches y(0), y'(0) and y(jh), j=1..6; columns of
    the returned matrices act on the vector (y0, y'(0), y1, ..., y6).
    """
    # conditions on monomial coefficients c_0..c_7 of P(x/h)
    A = np.zeros((8, 8))
    A[0, 0] = 1.0
    A[1, 1] = 1.0 / h
    for j in range(1, 7):
        A[j + 1] = float(j) ** np.arange(8)
    Ainv = np.linalg.inv(A)
    ghosts = np.array([(-float(m)) ** np.arange(8) for m in (1, 2, 3)]) @ Ainv
    d2 = (np.array([0, 0, 2, 0, 0, 0, 0, 0]) / h ** 2) @ Ainv
    d3 = (np.array([0, 0, 0, 6, 0, 0, 0, 0]) / h ** 3) @ Ainv
    return ghosts, d2, d3


def _operator(grid: FDGrid, p: SpectralParams):
    """Interior operator i(alpha D4 + beta D2) on y_1..y_{N-1} and its boundary coupling.

    Returns the sparse matrix A and the dense (N-1) x 2 matrix B with
    A y + B (g0, g1) the discrete right-hand side.
    """
    N, h = grid.Nx, grid.h
    n = N - 1
    ghosts, _, _ = _ghost_weights(h)
    stencil = np.zeros(7, dtype=complex)
    stencil += 1j * p.alpha * D4 / h ** 4
    stencil[1:6] += 1j * p.beta * D2 / h ** 2
    # full-width operator on the extended vector y_{-3}..y_{N+3}
    rows, cols, vals = [], [], []
    B = np.zeros((n, 2), dtype=complex)
    for j in range(1, N):
        for off in range(-3, 4):
            c = stencil[off + 3]
            m = j + off
            if 1 <= m <= N - 1:
                rows.append(j - 1); cols.append(m - 1); vals.append(c)
            elif m == 0:
                B[j - 1, 0] += c
            elif m < 0:
                # left ghost: weights on (y0, g1, y1..y6)
                wts = ghosts[-m - 1]
                B[j - 1, 0] += c * wts[0]
                B[j - 1, 1] += c * wts[1]
                for q in range(1, 7):
                    rows.append(j - 1); cols.append(q - 1); vals.append(c * wts[q + 1])
            elif m == N:
                pass  # clamped value y(L) = 0
            else:
                # right ghost mirrored: y(L + mh) with y(L) = y'(L) = 0
                wts = ghosts[m - N - 1]
                for q in range(1, 7):
                    rows.append(j - 1); cols.append(N - q - 1); vals.append(c * wts[q + 1])
    A = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    return A, B


def fd_solve(p: SpectralParams, g0: BoundaryDatum, g1: BoundaryDatum, grid: FDGrid,
             save_every: int | None = None, forcing=None, initial=None,
             leakage_tol: float = 1e-6, check_leakage: bool = True) -> FDSolution:
    """Crank-Nicolson march of y_t = i(alpha y_xxxx + beta y_xx) with Dirichlet and Neumann data.

    ``forcing(x, t)`` and ``initial(x)`` exist for manufactured-solution tests.
    """
    N, dt = grid.Nx, grid.dt
    x = grid.x
    t = grid.t
    A, B = _operator(grid, p)
    n = N - 1
    eye = sp.identity(n, dtype=complex, format="csc")
    lhs = splu((eye - 0.5 * dt * A).tocsc())
    rhs_op = (eye + 0.5 * dt * A).tocsr()
    G0 = np.asarray(g0(t), dtype=complex)
    G1 = np.asarray(g1(t), dtype=complex)
    if save_every is None:
        save_every = max(1, grid.Nt // 200)
    y = np.zeros(n, dtype=complex) if initial is None else np.asarray(initial(x[1:N]), dtype=complex)
    xi = x[1:N]
    _, d2w, d3w = _ghost_weights(grid.h)

    def full(yint, k):
        return np.concatenate([[G0[k]], yint, [0.0]])

    def traces(yint, k):
        v = np.concatenate([[G0[k], G1[k]], yint[:6]])
        return d2w @ v, d3w @ v

    saved, ts = [full(y, 0)], [0.0]
    g2 = np.empty(t.size, dtype=complex)
    g3 = np.empty(t.size, dtype=complex)
    g2[0], g3[0] = traces(y, 0)
    bprev = B @ np.array([G0[0], G1[0]])
    if forcing is not None:
        bprev = bprev + forcing(xi, t[0])
    peak = float(np.max(np.abs(saved[0])))
    for k in range(1, t.size):
        bnext = B @ np.array([G0[k], G1[k]])
        if forcing is not None:
            bnext = bnext + forcing(xi, t[k])
        y = lhs.solve(rhs_op @ y + 0.5 * dt * (bprev + bnext))
        bprev = bnext
        g2[k], g3[k] = traces(y, k)
        if not np.all(np.isfinite(y)):
            raise OracleError("linear solver produced non-finite values")
        if k % save_every == 0 or k == t.size - 1:
            row = full(y, k)
            saved.append(row)
            ts.append(t[k])
            peak = max(peak, float(np.max(np.abs(row))))
    values = np.array(saved)
    # far field: the last 5% of the domain should stay quiet
    far = values[:, int(0.95 * N):]
    leakage = float(np.max(np.abs(far))) / peak if peak > 0 else 0.0
    if check_leakage and leakage > leakage_tol:
        raise OracleError(f"far-field leakage {leakage:.2e} exceeds {leakage_tol:.1e}; "
                          "increase L or reduce T")
    return FDSolution(grid, p, values, np.array(ts), g2, g3, G0, G1, leakage)


def half_line_fourier(row, x, k, tail_bound: float = 0.0) -> complex:
    """y-hat(k) = integral_0^L exp(-ikx) y(x) dx by the composite Simpson rule."""
    from scipy.integrate import simpson

    k = complex(k)
    if k.imag > 0:
        raise ValueError("Im k must be <= 0")
    row = np.asarray(row)
    if not np.any(row):
        return 0j
    return complex(simpson(np.exp(-1j * k * np.asarray(x)) * row, x=x))


def global_relation_residual(fd: FDSolution, k: complex, t: float) -> float:
    """Normalized mismatch of e^{wt} y-hat(k,t) against the transforms of the four traces."""
    k = complex(k)
    if k.imag > 0:
        raise ValueError("Im k must be <= 0")
    p = fd.params
    a, b = p.alpha, p.beta
    w = complex(spectral_w(np.array([k]), p)[0])
    lhs = np.exp(w * t) * half_line_fourier(fd.row(t), fd.grid.x, k)
    tr = [fd.trace_datum(j) for j in range(4)]
    gt = [complex(t_transform(d, np.array([w]), t)[0]) for d in tr]
    rhs = (-1j * a * gt[3] + a * k * gt[2] - 1j * (b - a * k * k) * gt[1]
           + k * (b - a * k * k) * gt[0])
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-12)


@dataclass
class ComparisonReport:
    t: np.ndarray
    rel_l2: np.ndarray
    max_abs: np.ndarray
    x_min: float
    L: float

    def as_dict(self):
        return {"t": self.t.tolist(), "rel_l2": self.rel_l2.tolist(),
                "max_abs": self.max_abs.tolist(), "x_min": self.x_min, "L": self.L}


def compare_fields(field, fd: FDSolution) -> ComparisonReport:
    """Relative L2([x_min, L]) and pointwise differences at each time node of ``field``.

    The FD rows are interpolated to the evaluation nodes with cubic splines.
    """
    from scipy.integrate import trapezoid

    xs = np.asarray(field.grid.x_nodes)
    if xs[-1] > fd.grid.L * (1 + 1e-12):
        raise ValueError("evaluation nodes extend beyond the FD domain")
    rel, mx = [], []
    for j, tj in enumerate(field.grid.t_nodes):
        row = fd.row(float(tj))
        fd_i = CubicSpline(fd.grid.x, row.real)(xs) + 1j * CubicSpline(fd.grid.x, row.imag)(xs)
        diff = field.values[:, j] - fd_i
        num = math.sqrt(trapezoid(np.abs(diff) ** 2, xs))
        den = math.sqrt(trapezoid(np.abs(fd_i) ** 2, xs))
        rel.append(num / den if den > 0 else num)
        mx.append(float(np.max(np.abs(diff))))
    return ComparisonReport(np.asarray(field.grid.t_nodes), np.array(rel), np.array(mx),
                            float(xs[0]), float(xs[-1]))
