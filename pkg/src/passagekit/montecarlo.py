"""Reproducible simulation of subordinator marginals and first-passage events.

Replicates are grouped into fixed-size blocks. Block ``k`` draws from a
Philox stream keyed by ``(seed, k)``, so the randomness used by replicate
``i`` depends only on ``seed`` and ``i``. Blocks may run on any number of
threads; partial results are merged in block order, which makes every
summary bit-identical across worker counts.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, StepCapExceeded, Unsupported
from .levy_model import CompoundPoissonExp, Gamma, Stable
from .saddle import _q, solve_rho

__all__ = [
    "McConfig",
    "McSummary",
    "sample_marginal",
    "simulate_passage",
    "tilted_moment_check",
    "marginal_sampler",
    "DISCARD_LIMIT",
]

DISCARD_LIMIT = 1e-4
_MAX_BATCH = 128


@dataclass(frozen=True)
class McConfig:
    n: int = 100_000
    seed: int = 0
    eps: float = 1e-6
    step_cap: int = 10_000_000
    block_size: int = 16384
    workers: int = 1  # execution only; results do not depend on it

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not self.eps > 0.0:
            raise DomainError(f"eps must be > 0, got {self.eps}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass
class McSummary:
    n: int
    seed: int
    eps: float | None = None
    n_crossed_by_t: int = 0
    n_crossed_in_window: int = 0
    n_creep: int = 0
    n_jump: int = 0
    n_discarded: int = 0
    estimates: dict = field(default_factory=dict)
    moments: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    approximate_creep_flag: bool = False

    def to_dict(self):
        return asdict(self)


def _proportion(count, n):
    p = count / n
    return (p, math.sqrt(p * (1.0 - p) / n))


def _mean_se(total, total_sq, n):
    m = total / n
    var = max(total_sq / n - m * m, 0.0)
    return (m, math.sqrt(var / n))


def _block_rng(seed, block):
    return np.random.Generator(np.random.Philox(key=(block << 64) | seed))


def _run_blocks(cfg, work):
    """Apply ``work(rng, size)`` to every block and return the results in block order."""
    sizes = [cfg.block_size] * (cfg.n // cfg.block_size)
    if cfg.n % cfg.block_size:
        sizes.append(cfg.n % cfg.block_size)
    jobs = list(enumerate(sizes))

    def one(job):
        k, size = job
        return work(_block_rng(cfg.seed, k), size)

    if cfg.workers <= 1 or len(jobs) == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(one, jobs))


def _merge(parts):
    out = {}
    for part in parts:
        for key, value in part.items():
            out[key] = out.get(key, 0) + value
    return out


# ---------------------------------------------------------------------------
# marginals


def _is_half(spec):
    return isinstance(spec, Stable) and spec.alpha == 0.5


def marginal_sampler(spec, t):
    """Exact sampler ``rng, size -> X_t`` for the supported kinds."""
    bt = spec.drift_b * t
    if _is_half(spec):
        ct = spec.s / math.sqrt(2.0) * t

        def draw(rng, size):
            z = rng.standard_normal(size)
            return bt + (ct * ct) / (z * z)

        return draw
    if isinstance(spec, Gamma):
        return lambda rng, size: bt + rng.gamma(spec.a * t, 1.0 / spec.theta, size)
    if isinstance(spec, CompoundPoissonExp):

        def draw(rng, size):
            count = rng.poisson(spec.rate * t, size)
            return bt + rng.gamma(np.maximum(count, 1), 1.0 / spec.eta) * (count > 0)

        return draw
    raise Unsupported("no exact marginal sampler for stable index other than 1/2")


def sample_marginal(spec, t, cfg, probes=(), tilt=None):
    """Sample ``X_t``; report the mean, ``P(X_t <= q)`` at each probe and optionally the tilt identity.

    With ``tilt=rho`` the mean of ``exp(-rho X_t + t psi(rho))`` is reported;
    it equals one exactly.
    """
    if not t > 0.0:
        raise DomainError(f"t must be > 0, got {t}")
    draw = marginal_sampler(spec, t)
    probes = tuple(float(q) for q in probes)
    log_norm = t * float(spec.psi(tilt)) if tilt is not None else 0.0

    def work(rng, size):
        x = draw(rng, size)
        part = {"sum": float(x.sum()), "sum_sq": float((x * x).sum())}
        for i, q in enumerate(probes):
            part[f"le{i}"] = int(np.count_nonzero(x <= q))
        if tilt is not None:
            w = np.exp(-tilt * x + log_norm)
            part["w"] = float(w.sum())
            part["w_sq"] = float((w * w).sum())
        return part

    tot = _merge(_run_blocks(cfg, work))
    out = McSummary(n=cfg.n, seed=cfg.seed)
    out.moments["mean"] = _mean_se(tot["sum"], tot["sum_sq"], cfg.n)
    for i, q in enumerate(probes):
        out.estimates[f"P(X_t<={q!r})"] = _proportion(tot[f"le{i}"], cfg.n)
    if tilt is not None:
        out.moments["tilt_mass"] = _mean_se(tot["w"], tot["w_sq"], cfg.n)
        out.targets["tilt_mass"] = 1.0
    return out


# ---------------------------------------------------------------------------
# passage


@dataclass(frozen=True)
class _JumpLaw:
    rate: float
    drift: float
    draw: object
    approximate: bool


def _jump_law(spec, eps):
    b = spec.drift_b
    if isinstance(spec, CompoundPoissonExp):
        eta = spec.eta
        return _JumpLaw(spec.rate, b, lambda rng, shape: rng.exponential(1.0 / eta, shape), False)
    d_eps = b + float(spec.truncated_moment(1, eps))
    rate = float(spec.tail(eps))
    if isinstance(spec, Stable):
        inv_alpha = 1.0 / spec.alpha

        def draw(rng, shape):
            # Pareto tail: P(J > y) = (y/eps)^-alpha
            return eps * rng.random(shape) ** -inv_alpha

        return _JumpLaw(rate, d_eps, draw, True)
    if isinstance(spec, Gamma):
        return _JumpLaw(rate, d_eps, _gamma_jump_sampler(spec, eps), True)
    raise Unsupported(f"no path simulator for {spec.kind}")


def _gamma_jump_sampler(spec, eps):
    """Jumps with density proportional to ``y^-1 e^{-theta y}`` on ``[eps, inf)``.

    Split at ``y = 1``: below, log-uniform proposals accepted with ``e^{-theta(y-eps)}``;
    above, ``1 + Exp(theta)`` proposals accepted with ``1/y``.
    """
    from scipy.special import exp1

    theta = spec.theta
    split = max(1.0, eps)
    low_mass = float(exp1(theta * eps) - exp1(theta * split))
    high_mass = float(exp1(theta * split))
    p_low = low_mass / (low_mass + high_mass)
    log_span = math.log(split / eps)

    def draw(rng, shape):
        size = int(np.prod(shape))
        out = np.empty(size)
        filled = 0
        while filled < size:
            need = size - filled
            m = int(need * 1.5) + 16
            low = rng.random(m) < p_low
            y = np.where(low, eps * np.exp(log_span * rng.random(m)), split + rng.exponential(1.0 / theta, m))
            accept_p = np.where(low, np.exp(-theta * (y - eps)), split / y)
            y = y[rng.random(m) < accept_p][:need]
            out[filled : filled + len(y)] = y
            filled += len(y)
        return out.reshape(shape)

    return draw


def _passage_block(law, x, t, delta, step_cap, creep_possible, batch):
    def work(rng, size):
        pos = np.zeros(size)
        tau = np.zeros(size)
        T = np.full(size, np.inf)
        creep = np.zeros(size, dtype=bool)
        events = np.zeros(size, dtype=np.int64)
        active = np.arange(size)
        d = law.drift
        while active.size:
            na = active.size
            gaps = rng.exponential(1.0 / law.rate, (na, batch))
            jumps = law.draw(rng, (na, batch))
            times = tau[active, None] + np.cumsum(gaps, axis=1)
            after = pos[active, None] + np.cumsum(jumps, axis=1) + d * (times - tau[active, None])
            before = after - jumps
            over = after > x
            hit = over.any(axis=1)
            k = np.argmax(over, axis=1)
            rows = np.nonzero(hit)[0]
            kk = k[rows]
            idx = active[rows]
            by_drift = before[rows, kk] >= x
            # state just after the previous jump (or the carried state when k == 0)
            prev_pos = np.where(kk > 0, after[rows, np.maximum(kk - 1, 0)], pos[idx])
            prev_time = np.where(kk > 0, times[rows, np.maximum(kk - 1, 0)], tau[idx])
            with np.errstate(divide="ignore", invalid="ignore"):
                drift_time = prev_time + (x - prev_pos) / d if d > 0 else np.full(rows.size, np.inf)
            T[idx] = np.where(by_drift, drift_time, times[rows, kk])
            creep[idx] = by_drift & creep_possible
            events[idx] += kk + 1
            miss = np.nonzero(~hit)[0]
            cont = active[miss]
            pos[cont] = after[miss, -1]
            tau[cont] = times[miss, -1]
            events[cont] += batch
            capped = events[cont] >= step_cap
            events_capped = cont[capped]
            T[events_capped] = np.nan
            active = cont[~capped]
        discarded = np.isnan(T)
        ok = ~discarded
        Tok, cok = T[ok], creep[ok]
        in_window = (Tok > t) & (Tok <= t + delta)
        return {
            "n_discarded": int(discarded.sum()),
            "n_after_t": int(np.count_nonzero(Tok > t)),
            "n_by_t": int(np.count_nonzero(Tok <= t)),
            "n_window": int(np.count_nonzero(in_window)),
            "n_creep": int(np.count_nonzero(cok)),
            "n_jump": int(np.count_nonzero(~cok)),
            "n_window_creep": int(np.count_nonzero(in_window & cok)),
            "n_window_jump": int(np.count_nonzero(in_window & ~cok)),
        }

    return work


def simulate_passage(spec, x, t, delta, cfg):
    """Simulate passage above ``x`` for ``cfg.n`` paths, each run until it crosses.

    Compound Poisson models are simulated exactly. Infinite-activity models keep
    jumps of size at least ``cfg.eps`` and replace the rest by their mean
    ``int_0^eps y Pi(dy)`` added to the drift; creeping is then classified by
    whether the crossing happened on a drift segment and flagged approximate.
    Without drift no crossing is ever classed as creeping.
    """
    if not x > 0.0:
        raise DomainError(f"x must be > 0, got {x}")
    if not (t >= 0.0 and delta > 0.0):
        raise DomainError(f"need t >= 0 and delta > 0, got t={t}, delta={delta}")
    law = _jump_law(spec, cfg.eps)
    mean_step = law.drift / law.rate + float(_mean_jump(spec, cfg.eps, law))
    batch = int(min(_MAX_BATCH, max(8, math.ceil(1.25 * x / mean_step) + 4)))
    work = _passage_block(law, float(x), float(t), float(delta), cfg.step_cap, spec.drift_b > 0.0, batch)
    tot = _merge(_run_blocks(cfg, work))
    n_ok = cfg.n - tot["n_discarded"]
    if tot["n_discarded"] > DISCARD_LIMIT * cfg.n:
        raise StepCapExceeded(f"{tot['n_discarded']} of {cfg.n} paths exceeded the step cap")
    if n_ok == 0:
        raise StepCapExceeded("every path exceeded the step cap")
    out = McSummary(
        n=n_ok,
        seed=cfg.seed,
        eps=cfg.eps if law.approximate else None,
        n_crossed_by_t=tot["n_by_t"],
        n_crossed_in_window=tot["n_window"],
        n_creep=tot["n_creep"],
        n_jump=tot["n_jump"],
        n_discarded=tot["n_discarded"],
        approximate_creep_flag=law.approximate,
    )
    out.estimates["P(T_x>t)"] = _proportion(tot["n_after_t"], n_ok)
    out.estimates["P(T_x in (t,t+delta])"] = _proportion(tot["n_window"], n_ok)
    out.estimates["P(creep)"] = _proportion(tot["n_creep"], n_ok)
    out.estimates["P(T_x in (t,t+delta], creep)"] = _proportion(tot["n_window_creep"], n_ok)
    out.estimates["P(T_x in (t,t+delta], jump)"] = _proportion(tot["n_window_jump"], n_ok)
    return out


def _mean_jump(spec, eps, law):
    if isinstance(spec, CompoundPoissonExp):
        return 1.0 / spec.eta
    if isinstance(spec, Gamma):
        return (spec.jump_mean - float(spec.truncated_moment(1, eps))) / law.rate
    # stable: conditional mean of a Pareto jump, infinite for alpha < 1; use the median scale
    return eps * 2.0 ** (1.0 / spec.alpha)


# ---------------------------------------------------------------------------
# tilted moments


def tilted_moment_check(spec, t, x, cfg):
    """Importance-reweighted moments of the tilted process from marginal samples.

    Weights ``exp(-rho X_t + t psi(rho))`` turn ``X_t`` samples into ``Y_t``
    expectations. Reported against ``x``, ``t sigma^2(rho)`` and the
    third-absolute-moment bound ``6 t rho^-3 Q(1/rho) + 2 x t sigma^2(rho)``.
    """
    sp = solve_rho(spec, t, x)
    rho = sp.rho
    draw = marginal_sampler(spec, t)
    log_norm = t * sp.exps.psi

    def work(rng, size):
        v = draw(rng, size)
        w = np.exp(-rho * v + log_norm)
        dev = v - x
        cols = {"mass": w, "mean": w * v, "var": w * dev * dev, "abs_third": w * np.abs(dev) ** 3}
        part = {}
        for name, c in cols.items():
            part[name] = float(c.sum())
            part[name + "_sq"] = float((c * c).sum())
        return part

    tot = _merge(_run_blocks(cfg, work))
    out = McSummary(n=cfg.n, seed=cfg.seed)
    for name in ("mass", "mean", "var", "abs_third"):
        out.moments[name] = _mean_se(tot[name], tot[name + "_sq"], cfg.n)
    var = t * sp.exps.sigma2
    out.targets.update(
        mass=1.0,
        mean=x,
        var=var,
        abs_third_bound=6.0 * t * _q(spec, 1.0 / rho) / rho**3 + 2.0 * x * var,
    )
    return out
