"""Acceptance battery: exact-oracle equalities, convergence rates and Monte Carlo cross-checks."""
from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import montecarlo as mc
from . import oracles, passage, saddle
from .levy_model import CompoundPoissonExp, Gamma, Stable, exponent_inequalities, stable_half

__all__ = ["CriterionResult", "run_battery", "CRITERIA"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0


def _rel(log_a, log_b):
    return abs(math.expm1(log_a - log_b))


HALF_GRID_T = (0.1, 1.0, 10.0, 100.0)
HALF_GRID_X = (0.05, 0.5, 5.0, 50.0)


def c1_density_exact(ctx):
    spec = stable_half()
    worst = 0.0
    for t in HALF_GRID_T:
        for x in HALF_GRID_X:
            est = saddle.density_estimate(spec, t, x)
            exact = math.log(t) - 0.5 * math.log(2.0 * math.pi * x**3) - t * t / (2.0 * x)
            worst = max(worst, _rel(est.log_value, exact))
    return worst <= 1e-8, {"max_rel_error": worst, "tol": 1e-8}


def c2_hJ_exact(ctx):
    spec = stable_half()
    worst = 0.0
    for t in HALF_GRID_T:
        for x in HALF_GRID_X:
            est = passage.hJ_density(spec, t, x)
            exact = 0.5 * math.log(2.0 / (math.pi * x)) - t * t / (2.0 * x)
            worst = max(worst, _rel(est.log_value, exact))
    return worst <= 1e-8, {"max_rel_error": worst, "tol": 1e-8}


def _interval_error(spec, t, x, delta):
    est = passage.hJ_interval(spec, t, x, delta).value
    return abs(est / oracles.exact_interval_probability(spec, t, x, delta) - 1.0)


def c3_interval_convergence(ctx):
    spec = stable_half()
    worst = 0.0
    for t, x in ((10.0, 1.0), (5.0, 0.25), (20.0, 2.0), (20.0, 1.0), (30.0, 1.0)):
        for f in (0.01, 0.1, 1.0, 10.0):
            worst = max(worst, _interval_error(spec, t, x, f * x / t))
    sweep = []
    for r in (4.0, 16.0, 64.0, 256.0):
        t, x = math.sqrt(r), 1.0
        sweep.append(_interval_error(spec, t, x, x / t))
    decreasing = all(b < a for a, b in zip(sweep, sweep[1:]))
    return worst <= 0.02 and decreasing, {"max_rel_error_t2x_ge_100": worst, "sweep_errors": sweep, "decreasing": decreasing}


def c4_gamma_stirling(ctx):
    worst = 0.0
    errors = {}
    ok = True
    for at in (10.0, 100.0, 1000.0):
        spec = Gamma(a=1.0, theta=1.0)
        t, x = at, 0.5 * at
        ratio = math.exp(saddle.density_estimate(spec, t, x).log_value - oracles.exact_log_density(spec, t, x))
        err = abs(ratio - 1.0)
        errors[at] = err
        ok = ok and err <= 1.0 / (10.0 * at)
        worst = max(worst, err)
    # same a*t through different (a, t, theta) and a different x_t / mu
    r1 = math.exp(saddle.density_estimate(Gamma(a=1.0), 100.0, 50.0).log_value - oracles.exact_log_density(Gamma(a=1.0), 100.0, 50.0))
    g2 = Gamma(a=10.0, theta=3.0)
    r2 = math.exp(saddle.density_estimate(g2, 10.0, 12.0).log_value - oracles.exact_log_density(g2, 10.0, 12.0))
    same = abs(r1 - r2) <= 1e-9
    return ok and same, {"errors_by_at": errors, "pair_ratio_gap": abs(r1 - r2)}


def c5_oracle_triangle(ctx):
    cases = [(stable_half(), t, x) for t in (2.0, 4.0, 8.0) for x in (0.25, 0.5, 1.0)]
    g = Gamma(a=1.0, theta=1.0)
    cases += [(g, t, xt * t) for t in (20.0, 40.0, 80.0) for xt in (0.2, 0.35, 0.5)]
    worst = 0.0
    min_tH = math.inf
    for spec, t, x in cases:
        sp = saddle.solve_rho(spec, t, x)
        min_tH = min(min_tH, sp.tH)
        a = oracles.invert_g(spec, t, x, sp.rho).hJ_value
        b = oracles.convolve_hJ(spec, t, x)
        worst = max(worst, abs(a - b) / b)
    return worst <= 1e-5 and min_tH >= 2.0, {"max_rel_gap": worst, "min_tH": min_tH, "cases": len(cases)}


SHIPPED = (
    Stable(alpha=0.3, s=2.0),
    stable_half(),
    Stable(alpha=0.8),
    Gamma(a=1.0, theta=1.0),
    Gamma(a=2.5, theta=0.3, drift_b=0.1),
    CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5),
    CompoundPoissonExp(rate=3.0, eta=0.2),
)


def c6_exponent_inequalities(ctx):
    counts = {m.render(): exponent_inequalities(m).violations for m in SHIPPED}
    return sum(counts.values()) == 0, {"violations": counts}


def c7_moments(ctx):
    detail = {}
    ok = True
    for spec, t, x in ((stable_half(), 2.0, 1.0), (Gamma(a=1.0, theta=1.0), 10.0, 5.0)):
        sp = saddle.solve_rho(spec, t, x)
        var = t * sp.exps.sigma2
        bound = 6.0 * t * saddle._q(spec, 1.0 / sp.rho) / sp.rho**3 + 2.0 * x * var
        q = oracles.tilted_moments_quadrature(spec, t, x)
        quad_ok = abs(q["mean"] / x - 1) <= 1e-8 and abs(q["var"] / var - 1) <= 1e-8 and q["abs_third"] <= bound
        cfg = mc.McConfig(n=ctx["n"], seed=ctx["seed"], workers=ctx["workers"])
        s = mc.tilted_moment_check(spec, t, x, cfg)
        z = {k: abs(s.moments[k][0] - tgt) / s.moments[k][1] for k, tgt in (("mass", 1.0), ("mean", x), ("var", var))}
        mc_ok = all(v <= 4.0 for v in z.values()) and s.moments["abs_third"][0] <= bound
        detail[spec.render()] = {"quadrature": q, "target_var": var, "bound": bound, "mc_z_scores": z, "quad_ok": quad_ok, "mc_ok": mc_ok}
        ok = ok and quad_ok and mc_ok
    return ok, detail


def c8_creep_split(ctx):
    cp = CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5)
    target = oracles.creep_probability(cp, 1.0)
    s = mc.simulate_passage(cp, 1.0, 0.0, 1.0, mc.McConfig(n=ctx["n"], seed=ctx["seed"], workers=ctx["workers"]))
    p, se = s.estimates["P(creep)"]
    mc_ok = abs(p - target) <= 4.0 * se
    worst = 0.0
    rng = np.random.default_rng(ctx["seed"])
    models = (cp, Gamma(a=2.0, theta=1.0, drift_b=0.3), stable_half(drift_b=0.4), Stable(alpha=0.7, drift_b=1.0))
    for spec in models:
        for _ in range(25):
            t = float(10 ** rng.uniform(-1, 2))
            lo, hi = spec.drift_b, min(spec.mean_mu, 50.0 * spec.drift_b)
            x = t * float(lo + (hi - lo) * rng.uniform(0.02, 0.98))
            delta = float(10 ** rng.uniform(-2, 1))
            j = passage.hJ_interval(spec, t, x, delta)
            c = passage.hC_interval(spec, t, x, delta)
            split = 1.0 / (1.0 + math.exp(j.log_value - c.log_value))
            worst = max(worst, abs(split - passage.creep_conditional(spec, t, x)))
    return mc_ok and worst <= 1e-12, {"target": target, "mc": (p, se), "z": abs(p - target) / se, "max_split_gap": worst}


def c9_regime_g(ctx):
    cp = CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5)
    rows = []
    for i, t in enumerate((10.0, 20.0, 40.0)):
        x = t
        cfg = mc.McConfig(n=ctx["n"], seed=ctx["seed"] + i, workers=ctx["workers"])
        s = mc.simulate_passage(cp, x, t, 1.0, cfg)
        exact = oracles.cp_passage_interval(cp, t, x, 1.0)
        est = (passage.hJ_interval(cp, t, x, 1.0).value, passage.hC_interval(cp, t, x, 1.0).value)
        row = {"t": t}
        for k, name in enumerate(("jump", "creep")):
            p, se = s.estimates[f"P(T_x in (t,t+delta], {name})"]
            row[name] = {
                "mc": p,
                "se": se,
                "estimate": est[k],
                "exact": exact[k],
                "mc_ratio": p / est[k],
                "mc_ratio_se": se / est[k],
                "exact_ratio_error": abs(est[k] / exact[k] - 1.0),
                "mc_vs_exact_z": abs(p - exact[k]) / se,
            }
        rows.append(row)
    last = rows[-1]
    within = all(abs(last[n]["mc_ratio"] - 1.0) <= max(0.1, 3.0 * last[n]["mc_ratio_se"]) for n in ("jump", "creep"))
    oracle_ok = all(r[n]["mc_vs_exact_z"] <= 4.0 for r in rows for n in ("jump", "creep"))
    trend = all(
        b[n]["exact_ratio_error"] <= a[n]["exact_ratio_error"] for a, b in zip(rows, rows[1:]) for n in ("jump", "creep")
    )
    raw_trend = all(
        abs(b[n]["mc_ratio"] - 1) <= abs(a[n]["mc_ratio"] - 1) for a, b in zip(rows, rows[1:]) for n in ("jump", "creep")
    )
    detail = {"rows": rows, "within_at_40": within, "mc_matches_exact": oracle_ok, "error_trend_exact": trend, "error_trend_mc_raw": raw_trend}
    return within and oracle_ok and trend, detail


def c10_stable_scaling(ctx):
    spec = stable_half()
    worst = 0.0
    for t in (0.5, 1.0, 2.0, 4.0):
        for x in (0.25, 1.0, 4.0, 16.0):
            lim = passage.stable_limit(spec, t, x)
            worst = max(worst, abs(t * passage.hJ_density(spec, t, x).value / lim.hJ_scaled - 1.0))
    return worst <= 1e-8, {"max_rel_error": worst}


def c11_hypothesis_h(ctx):
    verdicts = {}
    for spec in (Stable(alpha=0.3), Stable(alpha=0.5), Stable(alpha=0.8), Gamma(a=1.0, theta=1.0)):
        verdicts[spec.render()] = (oracles.hypothesis_H_check(spec).verdict, "Pass")
    cp = CompoundPoissonExp(rate=1.0, eta=1.0)
    verdicts[cp.render()] = (oracles.hypothesis_H_check(cp).verdict, "Fail")
    return all(v == want for v, want in verdicts.values()), {"verdicts": verdicts}


def c12_determinism(ctx):
    from .cli import main

    commands = (
        ["mc", "--model", "cpexp:rate=1,eta=1,b=0.5", "--t", "1", "--x", "1", "--n", "50000"],
        ["mc", "--model", "stable_half", "--t", "2", "--x", "1", "--delta", "0.5", "--n", "20000", "--eps", "1e-4"],
        ["mc", "--model", "gamma:a=1,theta=1", "--t", "3", "--x", "2", "--mode", "tilted", "--n", "50000"],
    )
    same = {}
    for cmd in commands:
        outs = []
        for w in (1, 4, 8):
            buf = io.StringIO()
            main(cmd + ["--seed", str(ctx["seed"]), "--workers", str(w)], stdout=buf)
            outs.append(buf.getvalue())
        same[" ".join(cmd[:3])] = all(o == outs[0] for o in outs)
    return all(same.values()), {"identical": same}


CRITERIA = {
    1: ("stable_half density exactness", c1_density_exact),
    2: ("stable_half jump density exactness", c2_hJ_exact),
    3: ("interval estimate convergence", c3_interval_convergence),
    4: ("gamma Stirling rate", c4_gamma_stirling),
    5: ("oracle triangle", c5_oracle_triangle),
    6: ("exponent inequalities", c6_exponent_inequalities),
    7: ("tilted moment identities", c7_moments),
    8: ("creep split", c8_creep_split),
    9: ("regime G trend", c9_regime_g),
    10: ("stable scaling identity", c10_stable_scaling),
    11: ("hypothesis H verdicts", c11_hypothesis_h),
    12: ("determinism across workers", c12_determinism),
}


def run_battery(seed=0, workers=1, only=None, quick=False):
    ctx = {"seed": seed, "workers": workers, "n": 100_000 if quick else 1_000_000}
    out = []
    for number, (name, fn) in CRITERIA.items():
        if only and number not in only:
            continue
        start = time.perf_counter()
        passed, detail = fn(ctx)
        out.append(CriterionResult(number, name, bool(passed), detail, time.perf_counter() - start))
    return out
