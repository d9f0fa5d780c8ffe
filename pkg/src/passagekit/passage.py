"""First-passage estimates split into jumping and creeping contributions.

All estimates share the saddle point ``rho`` of ``psi'(rho) = x/t`` and the
common factor ``e^{-tH(rho)} / (sqrt(2 pi t) rho sigma(rho))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, Unsupported
from .levy_model import Stable
from .saddle import SaddlePoint, density_estimate, estimate_warnings, solve_rho, tail_norming

__all__ = [
    "PassageEstimate",
    "StableLimitEstimate",
    "hJ_density",
    "hJ_interval",
    "hC_interval",
    "hC_density",
    "creep_conditional",
    "stable_limit",
    "all_estimates",
    "DELTA0_DEFAULT",
]

DELTA0_DEFAULT = 10.0


@dataclass(frozen=True)
class PassageEstimate:
    kind: str
    value: float
    log_value: float
    sp: SaddlePoint
    delta: float | None = None
    warnings: frozenset = frozenset()


def _log_common(sp):
    # log of e^{-tH} / (sqrt(2 pi t) rho sigma(rho))
    return -sp.tH - 0.5 * math.log(2.0 * math.pi * sp.t) - math.log(sp.rho) - 0.5 * math.log(sp.exps.sigma2)


def _log_interval_factor(sp, delta):
    # log of (1 - e^{-delta psi}) / psi
    psi = sp.exps.psi
    return math.log(-math.expm1(-delta * psi)) - math.log(psi)


def _check_delta(delta, delta0):
    if not delta > 0.0:
        raise DomainError(f"delta must be > 0, got {delta}")
    if delta > delta0:
        raise DomainError(f"delta={delta} exceeds delta0={delta0}")


def _make(kind, log_value, sp, delta=None, extra=()):
    value = math.exp(log_value) if math.isfinite(log_value) else 0.0
    warnings = estimate_warnings(sp, value, log_value) | set(extra)
    return PassageEstimate(kind, value, log_value, sp, delta, frozenset(warnings))


def hJ_density(spec, t, x):
    """Density in ``t`` of passage above ``x`` by a jump: ``psi_*(rho) e^{-tH} / (sqrt(2 pi t) rho sigma)``."""
    sp = solve_rho(spec, t, x)
    return _make("JumpDensity", math.log(sp.exps.psi_star) + _log_common(sp), sp)


def hJ_interval(spec, t, x, delta, delta0=DELTA0_DEFAULT):
    """Probability of passing by a jump during ``(t, t + delta]``."""
    _check_delta(delta, delta0)
    sp = solve_rho(spec, t, x)
    log_value = math.log(sp.exps.psi_star) + _log_interval_factor(sp, delta) + _log_common(sp)
    return _make("JumpInterval", log_value, sp, delta)


def hC_interval(spec, t, x, delta, delta0=DELTA0_DEFAULT):
    """Probability of creeping over ``x`` during ``(t, t + delta]``; zero without drift."""
    _check_delta(delta, delta0)
    sp = solve_rho(spec, t, x)
    b = spec.drift_b
    if b == 0.0:
        return _make("CreepInterval", -math.inf, sp, delta, ("zero-drift",))
    log_value = math.log(b * sp.rho) + _log_interval_factor(sp, delta) + _log_common(sp)
    return _make("CreepInterval", log_value, sp, delta)


def hC_density(spec, t, x):
    """Creeping density ``b f_t(x)`` with ``f_t`` the local density estimate; needs ``x > bt``."""
    b = spec.drift_b
    if b == 0.0:
        sp = solve_rho(spec, t, x)
        return _make("CreepDensity", -math.inf, sp, None, ("zero-drift",))
    if not x > b * t:
        raise DomainError(f"creeping density needs x > bt, got x={x}, bt={b * t}")
    est = density_estimate(spec, t, x)
    return _make("CreepDensity", math.log(b) + est.log_value, est.sp)


def creep_conditional(spec, t, x):
    """``b rho / psi(rho)``: the conditional probability of creeping given passage at ``t``."""
    sp = solve_rho(spec, t, x)
    return spec.drift_b * sp.rho / sp.exps.psi


@dataclass(frozen=True)
class StableLimitEstimate:
    y_t: float
    c_t: float
    hJ_scaled: float
    hC_scaled: float
    alpha: float


def stable_limit(spec, t, x, delta=1.0):
    """Limits of ``t h^J_x(t)`` and ``c(t) h^C_x(t, delta)`` under stable scaling.

    ``c`` solves ``t Pi(c, inf) = 1``; the limit process has exponent
    ``Gamma(1 - alpha) lam^alpha``. The creeping limit is ``b delta g_1(y_t)``
    with ``g_1`` the limit density at time one.
    """
    from .oracles import exact_density, exact_hJ

    if not isinstance(spec, Stable):
        raise Unsupported("stable scaling limits need a regularly varying tail (stable kind)")
    c = tail_norming(spec, t)
    y = x / c
    limit = Stable(alpha=spec.alpha, s=math.gamma(1.0 - spec.alpha))
    h = exact_hJ(limit, 1.0, y)
    g = exact_density(limit, 1.0, y) if spec.drift_b > 0.0 else 0.0
    return StableLimitEstimate(y_t=y, c_t=c, hJ_scaled=h, hC_scaled=spec.drift_b * delta * g, alpha=spec.alpha)


def all_estimates(spec, t, x, delta, delta0=DELTA0_DEFAULT):
    """Every passage quantity at one ``(t, x, delta)``; creeping density omitted when ``x <= bt``."""
    out = {
        "hJ_density": hJ_density(spec, t, x),
        "hJ_interval": hJ_interval(spec, t, x, delta, delta0),
        "hC_interval": hC_interval(spec, t, x, delta, delta0),
    }
    if spec.drift_b == 0.0 or x > spec.drift_b * t:
        out["hC_density"] = hC_density(spec, t, x)
    return out
