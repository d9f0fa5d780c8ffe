"""Saddle point of the tilted subordinator, the local density estimate and regime diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DomainError, OutOfRegime
from .levy_model import ExponentValues, psi_suite

__all__ = [
    "SaddlePoint",
    "DensityEstimate",
    "RegimeReport",
    "NormingPair",
    "LambdaDiagnostic",
    "solve_rho",
    "density_estimate",
    "classify_regime",
    "norming_pair",
    "lambda_diagnostic",
    "feller_ratios",
    "PRE_ASYMPTOTIC_TH",
]

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
PRE_ASYMPTOTIC_TH = 3.0
RESIDUAL_RTOL = 1e-12
MAX_BISECTIONS = 200

# heuristic thresholds for regime labels
BAND_FRACTION = 0.05
LARGE_TH = 10.0
LARGE_XRHO = 10.0


@dataclass(frozen=True)
class SaddlePoint:
    t: float
    x: float
    x_t: float
    rho: float
    exps: ExponentValues
    s_t: float
    tH: float
    x_rho: float

    @property
    def residual(self):
        return abs(self.exps.psi_prime - self.x_t)


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    log_value: float
    z: float
    sp: SaddlePoint
    warnings: frozenset = frozenset()

    @property
    def underflow(self):
        return "underflow" in self.warnings


def estimate_warnings(sp, value, log_value):
    out = set()
    if sp.tH < PRE_ASYMPTOTIC_TH:
        out.add("pre-asymptotic")
    if math.isfinite(log_value) and (value == 0.0 or value < np.finfo(float).tiny):
        out.add("underflow")
    return out


def solve_rho(spec, t, x):
    """Solve ``psi'(rho) = x/t`` by geometric bisection on the decreasing ``psi'``.

    Bisection runs until the bracket cannot shrink any further in floating
    point, so the root is as accurate as ``psi'`` itself.
    """
    if not (t > 0.0 and x > 0.0):
        raise DomainError(f"t and x must be > 0, got t={t}, x={x}")
    t = float(t)
    x = float(x)
    x_t = x / t
    b, mu = spec.drift_b, spec.mean_mu
    if not (b < x_t < mu):
        raise OutOfRegime(f"x/t = {x_t:.6g} is outside ({b:.6g}, {mu:.6g})")

    def excess(u):
        return float(spec.psi_prime(u)) - x_t

    lo = hi = 1.0
    if excess(1.0) > 0.0:
        while excess(hi) > 0.0:
            lo, hi = hi, hi * 2.0
            if hi > 1e300:
                raise ConvergenceFailure(f"no upper bracket for rho at x/t={x_t:.6g}")
    else:
        while excess(lo) <= 0.0:
            lo, hi = lo * 0.5, lo
            if lo < 1e-300:
                raise ConvergenceFailure(f"no lower bracket for rho at x/t={x_t:.6g}")

    for _ in range(MAX_BISECTIONS):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    rho = lo if abs(excess(lo)) <= abs(excess(hi)) else hi
    if abs(excess(rho)) > RESIDUAL_RTOL * max(1.0, x_t):
        raise ConvergenceFailure(f"rho residual {abs(excess(rho)):.3g} exceeds tolerance")

    exps = psi_suite(spec, rho)
    return SaddlePoint(
        t=t,
        x=x,
        x_t=x_t,
        rho=rho,
        exps=exps,
        s_t=math.sqrt(t * exps.sigma2),
        tH=t * exps.H,
        x_rho=x * rho,
    )


def density_estimate(spec, t, x_anchor, z=None):
    """Local estimate ``phi((z-x)/s_t) e^{-tH} e^{rho(z-x)} / s_t`` of the density of ``X_t`` at ``z``.

    ``x_anchor`` fixes the tilt; ``z`` defaults to the anchor, where the
    estimate reduces to ``e^{-tH} / sqrt(2 pi t sigma^2(rho))``.
    """
    sp = solve_rho(spec, t, x_anchor)
    z = sp.x if z is None else float(z)
    if not z > 0.0:
        raise DomainError(f"z must be > 0, got {z}")
    d = (z - sp.x) / sp.s_t
    log_value = -0.5 * d * d - LOG_SQRT_2PI - sp.tH + sp.rho * (z - sp.x) - math.log(sp.s_t)
    value = math.exp(log_value)
    return DensityEstimate(value, log_value, z, sp, frozenset(estimate_warnings(sp, value, log_value)))


# ---------------------------------------------------------------------------
# norming functions and regime classification


@dataclass(frozen=True)
class NormingPair:
    t: float
    c_t: float
    b_t: float
    solved: bool = True


def _decreasing_root(f, target, start=1.0, edge=(1e-100, 1e100)):
    """Root of ``f(y) = target`` for a non-increasing ``f``; ``None`` if not bracketed."""
    lo = hi = start
    if f(start) > target:
        while f(hi) > target:
            lo, hi = hi, hi * 2.0
            if hi > edge[1]:
                return None, edge[1]
    else:
        while f(lo) <= target:
            lo, hi = lo * 0.5, lo
            if lo < edge[0]:
                return None, edge[0]
    for _ in range(MAX_BISECTIONS):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return (lo if abs(f(lo) - target) <= abs(f(hi) - target) else hi), None


def _q(spec, y):
    return float(spec.tail(y)) + float(spec.truncated_moment(2, y)) / (y * y)


def norming_pair(spec, t):
    """``c(t)`` solving ``t Q(c) = 1`` and ``b(t) = t (b + int_0^c y Pi(dy))``.

    For finite-activity measures ``t Q`` may stay below one everywhere; the
    bracket edge is then returned with ``solved=False``.
    """
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    root, edge = _decreasing_root(lambda y: t * _q(spec, y), 1.0)
    if root is None:
        c = edge
        return NormingPair(t, c, t * (spec.drift_b + float(spec.truncated_moment(1, c))), solved=False)
    return NormingPair(t, root, t * (spec.drift_b + float(spec.truncated_moment(1, root))))


def tail_norming(spec, t):
    """``c(t)`` solving ``t Pi(c, inf) = 1`` (tail-based, distinct from :func:`norming_pair`)."""
    root, _ = _decreasing_root(lambda y: t * float(spec.tail(y)), 1.0)
    if root is None:
        raise ConvergenceFailure("t * tail never crosses 1")
    return root


def feller_ratios(spec, toward, decades=6, points=25):
    """Ratios ``Pi(y,inf)/K(y)`` and the no-centering quotient over log-decades toward 0 or inf.

    Returns the grid and both ratio arrays; they are finite-range proxies for
    the limsup conditions and are reported rather than thresholded.
    """
    if toward == "zero":
        y = np.logspace(0, -decades, points)
    elif toward == "inf":
        y = np.logspace(0, decades, points)
    else:
        raise DomainError("toward must be 'zero' or 'inf'")
    tail = np.asarray(spec.tail(y), dtype=float)
    m1 = np.asarray(spec.truncated_moment(1, y), dtype=float)
    m2 = np.asarray(spec.truncated_moment(2, y), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        sc = tail / (m2 / y**2)
        sc00 = y * (spec.drift_b + m1) / m2
    return y, sc, sc00


def sc_holds(spec, toward):
    """Finite proxy for the Feller condition: the ratio stops growing over the last three decades."""
    _, sc, _ = feller_ratios(spec, toward)
    half = len(sc) // 2
    mid, end = sc[half], sc[-1]
    if not np.all(np.isfinite(sc)):
        return False
    return bool(end <= 1.5 * mid + 1e-12)


@dataclass(frozen=True)
class RegimeReport:
    labels: frozenset
    tH: float
    x_rho: float
    x_t: float
    c_t: float
    b_t: float
    sc00_ratio: float
    sc0_ratio: float
    sc_inf_ratio: float
    non_lattice: bool
    warnings: frozenset = field(default_factory=frozenset)


def classify_regime(spec, t, x):
    """Label ``(t, x)`` with the asymptotic frameworks it plausibly approximates.

    Labels are finite-sample proxies: ``G`` when ``x/t`` sits inside
    ``[b + d, mu - d]`` with ``d = 0.05 (mu - b)``; ``SC0_I``/``SC0_II`` when the
    tilt is large (``tH >= 10`` and ``x rho >= 10``) for ``t >= 1`` / ``t < 1``
    and the small-jump Feller proxy holds; ``SCinf`` for infinite mean with
    ``x/t`` far above the drift and the large-jump proxy holding.
    """
    sp = solve_rho(spec, t, x)
    b, mu = spec.drift_b, spec.mean_mu
    norm = norming_pair(spec, t)
    labels = set()
    large = sp.tH >= LARGE_TH and sp.x_rho >= LARGE_XRHO
    if math.isfinite(mu):
        d = BAND_FRACTION * (mu - b)
        if b + d <= sp.x_t <= mu - d and spec.non_lattice:
            labels.add("G")
        near_b = sp.x_t < b + d
    else:
        near_b = sp.rho >= 1.0
    if near_b and large and sc_holds(spec, "zero"):
        labels.add("SC0_I" if t >= 1.0 else "SC0_II")
    if not math.isfinite(mu) and sp.rho < 1.0 and t >= 1.0 and sc_holds(spec, "inf"):
        labels.add("SCinf")
    if not labels:
        labels.add("Indeterminate")

    c = norm.c_t
    m1 = float(spec.truncated_moment(1, c))
    m2 = float(spec.truncated_moment(2, c))
    _, sc0, _ = feller_ratios(spec, "zero")
    _, scinf, _ = feller_ratios(spec, "inf")
    warnings = set()
    if sp.tH < PRE_ASYMPTOTIC_TH:
        warnings.add("pre-asymptotic")
    if not norm.solved:
        warnings.add("norming-unsolved")
    return RegimeReport(
        labels=frozenset(labels),
        tH=sp.tH,
        x_rho=sp.x_rho,
        x_t=sp.x_t,
        c_t=c,
        b_t=norm.b_t,
        sc00_ratio=c * (b + m1) / m2 if m2 > 0 else math.inf,
        sc0_ratio=float(np.max(sc0)),
        sc_inf_ratio=float(np.max(scinf)),
        non_lattice=spec.non_lattice,
        warnings=frozenset(warnings),
    )


@dataclass(frozen=True)
class LambdaDiagnostic:
    lambda_bar: float
    tH: float
    sp: SaddlePoint


def lambda_diagnostic(spec, t, x):
    """Upper bound on the Berry-Esseen ratio built from the third-moment bound.

    ``[6 t rho^-3 Q(1/rho) + 2 t sigma^2(rho)/rho] / (t sigma^2(rho))^{3/2}``.
    """
    sp = solve_rho(spec, t, x)
    if sp.x_rho < 1.0:
        raise DomainError(f"x*rho = {sp.x_rho:.6g} < 1")
    rho, s2 = sp.rho, sp.exps.sigma2
    q = _q(spec, 1.0 / rho)
    num = 6.0 * t * q / rho**3 + 2.0 * t * s2 / rho
    return LambdaDiagnostic(num / (t * s2) ** 1.5, sp.tH, sp)
