"""Deviation rate functions for the streaming regression estimators.

The large-deviation behaviour of the averaged estimator at a point x is
governed by the convex function

    psi(u) = (1-q) * int_0^1 int_z int_y s^(-a)
             (exp(u s^(a-q) K(z) (y - r(x)) / f(x)) - 1) g(x, y) ds dz dy,

whose Fenchel-Legendre transform I(t) = sup_u (u t - psi(u)) is computed here
by inverting psi' with a safeguarded Newton iteration. The moderate-deviation
rate functions of all three estimators are explicit quadratics and are
evaluated directly.

Numerical layout of psi and its derivatives: the s-integral is substituted as
s = tau^(1/(1-p)) where s^(-p) is the power weight of the respective order,
which removes the endpoint singularity analytically; the z-integral runs over
the kernel support (truncated at |z| <= 12 for the Gaussian kernel, where the
omitted mass is below 2e-32 times the integrand bound); the y-integral is an
exact finite sum for atomic conditional laws and a fixed 160-node
Gauss-Legendre rule over +/- 12 conditional standard deviations for Gaussian
noise (discarded tail below exp(12*lam*s - 72) for tilt lam, i.e. < 1e-20
whenever lam * sigma / f <= 4).

The weight exponent must satisfy q <= a: for q > a the tilt s^(a-q) blows up
at s = 0 and psi(u) is infinite for every u of the unfavourable sign, so such
contexts are rejected up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import Kernel
from .models import DiscreteAtoms, GaussianNoise, Model
from .quadrature import DEFAULT_SPEC, NonConvergenceError, QuadratureSpec, integrate_1d
from .schedules import ValidationError

__all__ = [
    "EstimatorKind",
    "ModerateRate",
    "moderate_factor",
    "moderate_rate",
    "CumulantContext",
    "cumulant",
    "cumulant_derivatives",
    "invert_slope",
    "large_deviation_rate",
    "rate_point",
    "conjugate_oracle",
    "RootNotBracketedError",
    "GridTooNarrowError",
]

GAUSS_TAIL_SIGMAS = 12.0
GAUSS_KERNEL_Z_RADIUS = 12.0
_GAUSS_LAW_NODES = 160
_SLOPE_TOL = 1e-10
_MAX_NEWTON_ITER = 100
_MAX_BRACKET = 1024.0


class RootNotBracketedError(RuntimeError):
    """The target slope lies outside the attainable range of psi'."""


class GridTooNarrowError(ValueError):
    """The scan grid does not contain the conjugate maximizer."""


class EstimatorKind(str, Enum):
    AVERAGED = "averaged"
    NADARAYA_WATSON = "nadaraya_watson"
    SEMI_RECURSIVE = "semi_recursive"


def moderate_factor(kind: EstimatorKind, a: float, q: float) -> float:
    kind = EstimatorKind(kind)
    if kind is EstimatorKind.AVERAGED:
        return (1.0 + a - 2.0 * q) / (1.0 - q) ** 2
    if kind is EstimatorKind.NADARAYA_WATSON:
        return 1.0
    return 1.0 + a


@dataclass(frozen=True)
class ModerateRate:
    """Quadratic rate t -> factor * base * t^2 / 2 with base = f/(var*intK2)."""

    kind: EstimatorKind
    factor: float
    base: float

    @property
    def infinite(self) -> bool:
        return math.isinf(self.base)

    def at(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        if self.infinite:
            return math.inf
        return self.factor * self.base * t * t / 2.0


def moderate_rate(kind, a: float, q: float, f_x: float, cond_var: float,
                  kernel: Kernel) -> ModerateRate:
    if f_x <= 0:
        raise ValueError("f(x) must be positive")
    if cond_var < 0:
        raise ValueError("conditional variance must be nonnegative")
    base = math.inf if cond_var == 0 else f_x / (cond_var * kernel.squared_integral)
    return ModerateRate(EstimatorKind(kind), moderate_factor(kind, a, q), base)


class _TiltedMoments:
    """E[w^j exp(lam w)] under the conditional law, w = (y - r(x)) / f(x)."""

    def __init__(self, w: np.ndarray, weights: np.ndarray):
        self._w = w
        self._wt = weights

    def moment(self, order: int, lam):
        lam = np.asarray(lam, dtype=float)
        with np.errstate(over="ignore"):
            if order == 0:
                core = np.expm1(lam[..., None] * self._w)
            else:
                core = self._w**order * np.exp(lam[..., None] * self._w)
        return core @ self._wt


def _law_moments(law, r_x: float, f_x: float) -> _TiltedMoments:
    if isinstance(law, DiscreteAtoms):
        w = (np.asarray(law.values, dtype=float) - r_x) / f_x
        return _TiltedMoments(w, np.asarray(law.probs, dtype=float))
    if isinstance(law, GaussianNoise):
        if law.sigma == 0.0:
            return _TiltedMoments(np.zeros(1), np.ones(1))
        nodes, wts = np.polynomial.legendre.leggauss(_GAUSS_LAW_NODES)
        half = GAUSS_TAIL_SIGMAS * law.sigma
        y = half * nodes
        pdf = np.exp(-0.5 * (y / law.sigma) ** 2) / (law.sigma * math.sqrt(2 * math.pi))
        return _TiltedMoments(y / f_x, half * wts * pdf)
    raise TypeError(f"unsupported conditional law {law!r}")


class CumulantContext:
    """Everything needed to evaluate psi and its transform at one point x."""

    def __init__(self, model: Model, kernel: Kernel, a: float, q: float,
                 x: float, spec: QuadratureSpec = DEFAULT_SPEC):
        if not 0.0 < a < 0.5:
            raise ValidationError(f"bandwidth_exponent: a={a!r} outside (0, 0.5)")
        q_bound = min(1.0 - 2.0 * a, (1.0 + a) / 2.0)
        if not q < q_bound:
            raise ValidationError(
                f"weight_exponent: q={q!r} violates q < min(1-2a, (1+a)/2) = {q_bound:g}"
            )
        if q > a:
            raise ValidationError(
                f"weight_exponent: q={q!r} exceeds a={a!r}; the tilt s**(a-q) is "
                "unbounded at s=0 and the cumulant integral diverges"
            )
        f_x = model.density(x)
        if f_x <= 0.0:
            raise ValidationError(f"x={x!r} outside the support of the design density")
        self.model = model
        self.kernel = kernel
        self.a = float(a)
        self.q = float(q)
        self.x = float(x)
        self.spec = spec
        self.f_x = float(f_x)
        self.r_x = float(model.regression(x))
        self._moments = _law_moments(model.cond_law(x), self.r_x, self.f_x)
        radius = kernel.support_radius
        self._z_radius = radius if math.isfinite(radius) else GAUSS_KERNEL_Z_RADIUS

    def _z_integral(self, order: int, v: float) -> float:
        kern = self.kernel.fn
        mom = self._moments.moment

        def integrand(z):
            k = kern(z)
            weight = 1.0 if order == 0 else k**order
            return weight * mom(order, v * k)

        val, _ = integrate_1d(integrand, -self._z_radius, self._z_radius, self.spec)
        return val

    def _s_weighted(self, order: int, u: float) -> float:
        # int_0^1 s^(-p) Z_order(u s^(a-q)) ds with p the order's power weight,
        # substituted as s = tau^(1/(1-p)) so the weight becomes constant.
        a, q = self.a, self.q
        one_minus_p = (1.0 - a, 1.0 - q, 1.0 + a - 2.0 * q)[order]
        beta = (a - q) / one_minus_p

        def integrand(taus):
            return np.array(
                [self._z_integral(order, u * t**beta) for t in taus]
            )

        val, _ = integrate_1d(integrand, 0.0, 1.0, self.spec)
        return val / one_minus_p


def cumulant(ctx: CumulantContext, u: float) -> float:
    """The limiting scaled log moment generating function psi at u."""
    return (1.0 - ctx.q) * ctx.f_x * ctx._s_weighted(0, u)


def cumulant_derivatives(ctx: CumulantContext, u: float) -> tuple[float, float]:
    """(psi'(u), psi''(u)) by direct quadrature of the differentiated integrals."""
    d1 = (1.0 - ctx.q) * ctx.f_x * ctx._s_weighted(1, u)
    d2 = (1.0 - ctx.q) * ctx.f_x * ctx._s_weighted(2, u)
    return d1, d2


def _slope(ctx: CumulantContext, u: float) -> float:
    return (1.0 - ctx.q) * ctx.f_x * ctx._s_weighted(1, u)


def invert_slope(ctx: CumulantContext, t: float) -> float:
    """Solve psi'(u) = t; psi'' > 0 makes the root unique when it exists."""
    lo, hi = -1.0, 1.0
    while True:
        s_hi = _slope(ctx, hi)
        if math.isnan(s_hi):
            raise NonConvergenceError(f"psi'({hi}) is not a number")
        if s_hi >= t:
            break
        if hi >= _MAX_BRACKET:
            raise RootNotBracketedError(
                f"psi'({hi:g}) = {s_hi:g} < t = {t:g}; t outside the slope range"
            )
        hi *= 2.0
    while True:
        s_lo = _slope(ctx, lo)
        if math.isnan(s_lo):
            raise NonConvergenceError(f"psi'({lo}) is not a number")
        if s_lo <= t:
            break
        if lo <= -_MAX_BRACKET:
            raise RootNotBracketedError(
                f"psi'({lo:g}) = {s_lo:g} > t = {t:g}; t outside the slope range"
            )
        lo *= 2.0

    u = 0.5 * (lo + hi)
    tol = _SLOPE_TOL * max(1.0, abs(t))
    for _ in range(_MAX_NEWTON_ITER):
        d1, d2 = cumulant_derivatives(ctx, u)
        resid = d1 - t
        if math.isfinite(resid) and abs(resid) < tol:
            return u
        if math.isnan(resid):
            raise NonConvergenceError(f"psi'({u}) is not a number")
        if resid > 0:
            hi = u
        else:
            lo = u
        if math.isfinite(resid) and math.isfinite(d2) and d2 > 0.0:
            candidate = u - resid / d2
        else:
            candidate = math.nan
        u = candidate if lo < candidate < hi else 0.5 * (lo + hi)
    raise NonConvergenceError(
        f"slope inversion did not reach {tol:g} within {_MAX_NEWTON_ITER} iterations"
    )


def large_deviation_rate(ctx: CumulantContext, t: float) -> float:
    """I(t) = t u* - psi(u*) with u* = (psi')^{-1}(t), plus the degenerate
    branches at t <= 0 for models whose conditional law has no mass below
    r(x)."""
    return rate_point(ctx, t)[0]


def rate_point(ctx: CumulantContext, t: float):
    """(I(t), u_star, psi(u_star)); u_star and psi are NaN on the closed-form
    branches where no finite maximizer exists."""
    if ctx.model.o_minus_null:
        if t < 0.0:
            return math.inf, math.nan, math.nan
        if t == 0.0:
            lam_s = ctx.kernel.support_measure_positive
            if math.isinf(lam_s):
                return math.inf, math.nan, math.nan
            value = (1.0 - ctx.q) / (1.0 - ctx.a) * lam_s * ctx.f_x
            return value, math.nan, math.nan
    elif t == 0.0:
        # psi(0) = 0 and psi'(0) = 0: the conjugate is attained at u = 0
        return 0.0, 0.0, 0.0
    u_star = invert_slope(ctx, t)
    psi_val = cumulant(ctx, u_star)
    return t * u_star - psi_val, u_star, psi_val


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def conjugate_oracle(psi_fn, u_grid, t: float, refine_iters: int = 60) -> float:
    """Brute-force convex conjugate sup_u (u t - psi(u)).

    Scans the tabulated grid, requires the argmax to be interior, then
    golden-section refines around it. Independent of the Newton inversion.
    """
    u = np.asarray(u_grid, dtype=float)
    if u.size < 3:
        raise GridTooNarrowError("need at least three grid points")
    vals = np.array([ui * t - psi_fn(ui) for ui in u])
    i = int(np.argmax(vals))
    if i == 0 or i == u.size - 1:
        raise GridTooNarrowError(
            f"conjugate maximizer for t={t!r} at the grid boundary; widen the grid"
        )

    def g(ui):
        return ui * t - psi_fn(ui)

    lo, hi = u[i - 1], u[i + 1]
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    gc, gd = g(c), g(d)
    best = max(vals[i], gc, gd)
    for _ in range(refine_iters):
        if gc >= gd:
            hi, d, gd = d, c, gc
            c = hi - _INVPHI * (hi - lo)
            gc = g(c)
            best = max(best, gc)
        else:
            lo, c, gc = c, d, gd
            d = lo + _INVPHI * (hi - lo)
            gd = g(d)
            best = max(best, gd)
        if hi - lo < 1e-12 * max(1.0, abs(hi) + abs(lo)):
            break
    return best
