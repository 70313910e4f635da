"""Spectral symbol, invariance map and the oriented boundary of D+.

For the operator P = -i(alpha d^4 + beta d^2) the boundary spectral input is
w(k) = -i(alpha k^4 - beta k^2).  Writing k = a + ib,

    Re w(k) = 2ab (2 alpha (a^2 - b^2) - beta),

so the boundary of D = {Re w < 0} in the upper half plane is made of pieces of
the coordinate axes and of the hyperbola a^2 - b^2 = beta / (2 alpha).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

EPSILON = math.pi / 100
TWO_PI = 2.0 * math.pi


class ParameterError(ValueError):
    """Invalid operator or branch parameters."""


@dataclass(frozen=True)
class SpectralParams:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha == 0 or not math.isfinite(self.alpha) or not math.isfinite(self.beta):
            raise ParameterError("alpha must be finite and nonzero")

    @property
    def ratio(self) -> float:
        """beta / alpha, the constant in nu(k)^2 = beta/alpha - k^2."""
        return self.beta / self.alpha

    @property
    def hyperbola_constant(self) -> float:
        """c in a^2 - b^2 = c, i.e. beta / (2 alpha)."""
        return self.beta / (2.0 * self.alpha)

    @property
    def threshold(self) -> float:
        """Real-axis corner sqrt(c) of D+ (1/sqrt(2) for alpha = beta = 1); 0 if c <= 0."""
        c = self.hyperbola_constant
        return math.sqrt(c) if c > 0 else 0.0


@dataclass(frozen=True)
class BranchCut:
    """Argument window [arg_lo, arg_lo + 2 pi) for the rotated square root."""

    arg_lo: float
    epsilon: float = EPSILON
    validated: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon < math.pi / 8:
            raise ParameterError("epsilon must lie in (0, pi/8)")

    @classmethod
    def for_params(cls, p: SpectralParams, epsilon: float = EPSILON,
                   alpha_beta_positive: str = "upper") -> "BranchCut":
        """Window selected by sign(alpha), sign(beta).

        For alpha, beta > 0 two windows exist in the literature; ``"upper"``
        gives [eps, 2pi + eps) (the one for which Im nu >= 0 on D+ was
        analysed) and ``"centred"`` gives [-pi + eps, pi + eps), which is kept
        selectable but marked unvalidated.
        """
        a, b = p.alpha, p.beta
        if a > 0 and b > 0:
            if alpha_beta_positive == "centred":
                return cls(-math.pi + epsilon, epsilon, validated=False)
            return cls(epsilon, epsilon)
        if a > 0:  # beta <= 0
            return cls(epsilon, epsilon)
        if b < 0:
            return cls(-math.pi - epsilon, epsilon)
        return cls(-epsilon, epsilon)

    def reduce(self, arg):
        """Shift arguments into [arg_lo, arg_lo + 2 pi)."""
        arg = np.asarray(arg, dtype=float)
        out = arg + TWO_PI * np.floor((self.arg_lo + TWO_PI - arg) / TWO_PI)
        # floor rounding can land exactly on the open upper end
        out = np.where(out >= self.arg_lo + TWO_PI, out - TWO_PI, out)
        out = np.where(out < self.arg_lo, out + TWO_PI, out)
        return out


def branch_sqrt(z, cut: BranchCut):
    """|z|^(1/2) exp(i arg(z)/2) with arg(z) reduced into the cut's window."""
    z = np.asarray(z, dtype=complex)
    arg = cut.reduce(np.angle(z))
    out = np.sqrt(np.abs(z)) * np.exp(0.5j * arg)
    out = np.where(z == 0, 0j, out)
    return out[()] if out.ndim == 0 else out


def spectral_w(k, p: SpectralParams):
    k = np.asarray(k, dtype=complex)
    k2 = k * k
    out = -1j * (p.alpha * k2 * k2 - p.beta * k2)
    return out[()] if out.ndim == 0 else out


def re_w(k, p: SpectralParams):
    """Re w(k) from the factorized form, exact in sign near the boundary."""
    k = np.asarray(k, dtype=complex)
    a, b = k.real, k.imag
    return 2.0 * a * b * (2.0 * p.alpha * (a * a - b * b) - p.beta)


def invariance_nu(k, p: SpectralParams, cut: BranchCut | None = None):
    """nu(k) = sqrt*(beta/alpha - k^2) with the rotated branch cut."""
    if cut is None:
        cut = BranchCut.for_params(p)
    k = np.asarray(k, dtype=complex)
    return branch_sqrt(p.ratio - k * k, cut)


def upper_root(z):
    """The square root of z with Im >= 0 (ties on the real axis keep Re >= 0)."""
    r = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(r.imag < 0, -r, r)


class Region(enum.Enum):
    INSIDE = "inside_D_plus"
    BOUNDARY = "on_boundary"
    OUTSIDE = "outside"


def region_classify(k: complex, p: SpectralParams, atol: float = 1e-12) -> Region:
    k = complex(k)
    rw = float(re_w(k, p))
    if k.imag < 0:
        return Region.OUTSIDE
    if abs(rw) <= atol:
        return Region.BOUNDARY
    if k.imag == 0:
        return Region.BOUNDARY if abs(rw) <= atol else Region.OUTSIDE
    return Region.INSIDE if rw < 0 else Region.OUTSIDE


def _in_d_plus(k, p: SpectralParams):
    k = np.asarray(k, dtype=complex)
    return (k.imag > 0) & (re_w(k, p) < 0)


DECAY_CLASSES = ("laplace-in-x", "oscillatory-bounded", "oscillatory-ray", "mixed-hyperbola")


@dataclass(frozen=True)
class ContourPath:
    """One oriented piece of the boundary of D+.

    ``position``/``velocity`` use the natural parameter s on ``interval``
    (for the hyperbola, s = Re k up to sign, as in gamma3/gamma4).  Quadrature
    runs in a regular parameter u on ``u_interval`` with s = s_of_u(u); for
    hyperbola branches u = Im k, which removes the square-root behaviour of
    the natural parameter at the real-axis corner.
    """

    label: str
    interval: tuple[float, float]
    position: Callable
    velocity: Callable
    decay_class: str
    orientation: int
    u_interval: tuple[float, float]
    s_of_u: Callable
    ds_du: Callable
    singular_u: tuple[float, ...] = ()

    def k_of_u(self, u):
        return self.position(self.s_of_u(u))

    def dk_du(self, u):
        """dk/du including the orientation sign."""
        return self.orientation * self.velocity(self.s_of_u(u)) * self.ds_du(u)

    def left_normal(self, s):
        v = self.orientation * np.asarray(self.velocity(s), dtype=complex)
        return 1j * v / np.abs(v)

    def sample_s(self, n: int, s_max: float = 10.0) -> np.ndarray:
        a, b = self.interval
        if math.isinf(b):
            b = max(a + s_max, s_max)
        if math.isinf(a):
            a = min(b - s_max, -s_max)
        return np.linspace(a, b, n)

    def midpoint(self) -> float:
        a, b = self.interval
        if math.isinf(b) and math.isinf(a):
            return 0.0
        if math.isinf(b):
            return a + 1.0
        if math.isinf(a):
            return b - 1.0
        return 0.5 * (a + b)


@dataclass(frozen=True)
class ContourSet:
    params: SpectralParams
    paths: tuple[ContourPath, ...]
    branch_points: tuple[complex, ...] = field(default=())

    @property
    def orientation_signs(self) -> tuple[int, ...]:
        return tuple(pth.orientation for pth in self.paths)

    def __getitem__(self, label: str) -> ContourPath:
        for pth in self.paths:
            if pth.label == label:
                return pth
        raise KeyError(label)

    def labels(self) -> list[str]:
        return [pth.label for pth in self.paths]


def _identity(u):
    return u


def _one(u):
    return np.ones_like(np.asarray(u, dtype=float))


def _imag_axis(label, b0, b1):
    return dict(label=label, interval=(b0, b1),
                position=lambda s: 1j * np.asarray(s, dtype=float),
                velocity=lambda s: 1j * np.ones_like(np.asarray(s, dtype=float)),
                decay_class="laplace-in-x", u_interval=(b0, b1),
                s_of_u=_identity, ds_du=_one)


def _real_axis(label, a0, a1):
    cls = "oscillatory-ray" if math.isinf(a0) or math.isinf(a1) else "oscillatory-bounded"
    return dict(label=label, interval=(a0, a1),
                position=lambda s: np.asarray(s, dtype=float) + 0j,
                velocity=lambda s: np.ones_like(np.asarray(s, dtype=float)) + 0j,
                decay_class=cls, u_interval=(a0, a1), s_of_u=_identity, ds_du=_one)


def _hyperbola(label, c, sign):
    """k = sign*s + i sqrt(s^2 - c), s from max(sqrt(c), 0) to infinity."""
    if c > 0:
        s0 = math.sqrt(c)

        def s_of_u(u):
            u = np.asarray(u, dtype=float)
            return np.sqrt(u * u + c)

        def ds_du(u):
            u = np.asarray(u, dtype=float)
            return u / np.sqrt(u * u + c)

        u_int = (0.0, math.inf)
    else:
        s0 = 0.0
        s_of_u, ds_du, u_int = _identity, _one, (0.0, math.inf)

    def position(s):
        s = np.asarray(s, dtype=float)
        return sign * s + 1j * np.sqrt(np.maximum(s * s - c, 0.0))

    def velocity(s):
        # singular at s = sqrt(c) when c > 0; quadrature uses u instead
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return sign + 1j * s / np.sqrt(s * s - c)

    return dict(label=label, interval=(s0, math.inf), position=position, velocity=velocity,
                decay_class="mixed-hyperbola", u_interval=u_int, s_of_u=s_of_u, ds_du=ds_du)


def build_contour(p: SpectralParams, probe: float = 1e-4) -> ContourSet:
    """Oriented boundary of D+ for general (alpha, beta).

    Candidate pieces come from the zero set of Re w; a piece belongs to the
    boundary when exactly one side of it lies in D+, and it is oriented so
    that D+ is on the left.  For alpha = beta = 1 the result is gamma1..gamma5.
    """
    c = p.hyperbola_constant
    r = math.sqrt(abs(c))
    cands = []
    if c > 0:
        cands += [_imag_axis("gamma1", 0.0, math.inf),
                  _real_axis("gamma2", 0.0, r), _real_axis("gamma2'", r, math.inf),
                  _hyperbola("gamma3", c, +1.0), _hyperbola("gamma4", c, -1.0),
                  _real_axis("gamma5", -math.inf, -r), _real_axis("gamma5'", -r, 0.0)]
    elif c < 0:
        cands += [_imag_axis("gamma1", 0.0, r), _imag_axis("gamma1'", r, math.inf),
                  _real_axis("gamma2", 0.0, math.inf), _real_axis("gamma5", -math.inf, 0.0),
                  _hyperbola("gamma3", c, +1.0), _hyperbola("gamma4", c, -1.0)]
    else:
        cands += [_imag_axis("gamma1", 0.0, math.inf),
                  _real_axis("gamma2", 0.0, math.inf), _real_axis("gamma5", -math.inf, 0.0),
                  _hyperbola("gamma3", 0.0, +1.0), _hyperbola("gamma4", 0.0, -1.0)]

    ratio = p.ratio
    bpts = [complex(math.sqrt(ratio)), complex(-math.sqrt(ratio))] if ratio > 0 else \
        [1j * math.sqrt(-ratio), -1j * math.sqrt(-ratio)] if ratio < 0 else [0j]

    paths = []
    for spec in cands:
        s_mid = ContourPath.midpoint(type("tmp", (), {"interval": spec["interval"]})())
        k_mid = complex(spec["position"](s_mid))
        v = complex(spec["velocity"](s_mid))
        n = 1j * v / abs(v)
        delta = probe * max(1.0, abs(k_mid))
        left = bool(_in_d_plus(k_mid + delta * n, p))
        right = bool(_in_d_plus(k_mid - delta * n, p))
        if left == right:
            continue
        orient = 1 if left else -1
        sing = []
        for bp in bpts:
            if spec["decay_class"] == "laplace-in-x" and bp.real == 0 and bp.imag > 0:
                val = bp.imag
            elif spec["decay_class"].startswith("oscillatory") and bp.imag == 0:
                val = bp.real
            else:
                continue
            lo, hi = spec["u_interval"]
            if lo < val < hi:
                sing.append(val)
        paths.append(ContourPath(orientation=orient, singular_u=tuple(sing), **spec))
    order = {"gamma1": 0, "gamma1'": 1, "gamma2": 2, "gamma2'": 3, "gamma3": 4,
             "gamma4": 5, "gamma5": 6, "gamma5'": 7}
    paths.sort(key=lambda q: order[q.label])
    return ContourSet(p, tuple(paths), tuple(bpts))


def nu_boundary(path: ContourPath, u, p: SpectralParams, rel_probe: float = 1e-7):
    """Boundary values on ``path`` of the root nu(k) with Im nu > 0 in D+.

    Inside D+ the number beta/alpha - k^2 is never real, so exactly one square
    root has positive imaginary part and it is analytic there.  On the
    boundary the value is taken as the limit from the D+ side, which fixes
    the sign where nu is real.
    """
    u = np.asarray(u, dtype=float)
    s = path.s_of_u(u)
    k = np.asarray(path.position(s), dtype=complex)
    nu = np.sqrt(p.ratio - k * k + 0j)
    # velocity is singular at the hyperbola vertex; the probe there uses the
    # normal of the u-parameterization, which is finite
    v = path.dk_du(np.where(u == 0, rel_probe, u)) if path.decay_class == "mixed-hyperbola" \
        else path.orientation * np.asarray(path.velocity(s), dtype=complex)
    n = 1j * v / np.abs(v)
    k_in = k + rel_probe * (1.0 + np.abs(k)) * n
    nu_in = upper_root(p.ratio - k_in * k_in)
    return np.where(np.abs(nu - nu_in) <= np.abs(nu + nu_in), nu, -nu)


def contour_table(cs: ContourSet, n_per_path: int = 64, s_max: float = 4.0) -> list[dict]:
    """Rows (path_label, s, re_k, im_k, re_w, im_w) sampling every path."""
    rows = []
    for pth in cs.paths:
        s = pth.sample_s(n_per_path, s_max)
        if pth.interval[0] == 0.0 and pth.label.startswith("gamma2"):
            s = s[1:]
        if pth.interval[1] == cs.params.threshold and pth.label == "gamma2":
            s = s[:-1]
        k = np.asarray(pth.position(s), dtype=complex)
        w = spectral_w(k, cs.params)
        w = np.where(np.abs(w.real) < 1e-300, 0.0, w.real) + 1j * w.imag
        for si, ki, wi in zip(s, k, w):
            rows.append({"path_label": pth.label, "s": float(si), "re_k": ki.real,
                         "im_k": ki.imag, "re_w": wi.real, "im_w": wi.imag})
    return rows
