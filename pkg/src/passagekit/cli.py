"""Command-line front end.

Every command prints one JSON document on stdout; logs go to stderr. Sweeps
write CSV through a temporary file renamed into place, so a failed sweep
leaves no partial output.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import re
import sys
import tempfile

import numpy as np

from . import montecarlo, oracles, passage, saddle
from .errors import (
    ConvergenceFailure,
    DomainError,
    HypothesisHFailed,
    ParseError,
    PassageKitError,
    StepCapExceeded,
    Unsupported,
)
from .levy_model import CompoundPoissonExp, Gamma, Stable, exponent_inequalities

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_SUITE = 0, 2, 3, 4

log = logging.getLogger("passagekit")

# ---------------------------------------------------------------------------
# model grammar

_KINDS = {
    "stable": (Stable, {"alpha": "alpha", "s": "s"}),
    "gamma": (Gamma, {"a": "a", "theta": "theta"}),
    "cpexp": (CompoundPoissonExp, {"rate": "rate", "eta": "eta"}),
}
_ALIASES = {"stable_half": "stable:alpha=0.5,s=1.4142135623730951"}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?inf")


def parse_model(text, aliases=None):
    """Parse ``name[:key=val[,key=val]*]`` into a model.

    ``stable_half`` expands to ``stable:alpha=0.5,s=sqrt(2)``; extra keys after
    an alias override its values. ``aliases`` maps further names to model strings.
    """
    table = dict(_ALIASES)
    table.update(aliases or {})
    m = _NAME.match(text)
    if not m:
        raise ParseError("expected a model name", 0)
    name = m.group(0)
    pos = m.end()
    base = {}
    if name in table:
        alias_text = table[name]
        if _NAME.match(alias_text).group(0) in table:
            raise ParseError(f"alias {name!r} refers to another alias", 0)
        target = parse_model(alias_text, {})
        kind = target.kind
        base = _values(target)
    elif name in _KINDS:
        kind = name
    else:
        raise ParseError(f"unknown model {name!r}; expected one of {sorted(set(_KINDS) | set(table))}", 0)
    cls, keymap = _KINDS[kind]
    allowed = set(keymap) | {"b"}
    values = dict(base)
    if pos < len(text):
        if text[pos] != ":":
            raise ParseError("expected ':' after the model name", pos)
        pos += 1
        while True:
            km = _NAME.match(text, pos)
            if not km:
                raise ParseError("expected a key", pos)
            key = km.group(0)
            if key not in allowed:
                raise ParseError(f"unknown key {key!r} for {kind}; expected one of {sorted(allowed)}", pos)
            pos = km.end()
            if pos >= len(text) or text[pos] != "=":
                raise ParseError("expected '='", pos)
            pos += 1
            nm = _NUMBER.match(text, pos)
            if not nm:
                raise ParseError("expected a number", pos)
            values[key] = float(nm.group(0))
            pos = nm.end()
            if pos == len(text):
                break
            if text[pos] != ",":
                raise ParseError("expected ',' or end of input", pos)
            pos += 1
    b = values.pop("b", 0.0)
    kwargs = {keymap[k]: v for k, v in values.items()}
    return cls(**kwargs, drift_b=b)


def _values(spec):
    cls, keymap = _KINDS[spec.kind]
    out = {k: getattr(spec, attr) for k, attr in keymap.items()}
    out["b"] = spec.drift_b
    return out


def render_model(spec):
    return spec.render()


# ---------------------------------------------------------------------------
# JSON output


def jsonable(obj):
    """Convert results to JSON-ready values; non-finite floats become ``"overflow"``/``"underflow"``."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "render") and hasattr(obj, "kind"):
            return obj.render()
        out = {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for extra in ("residual", "underflow", "violations"):
            if hasattr(type(obj), extra) and isinstance(getattr(type(obj), extra), property):
                out[extra] = jsonable(getattr(obj, extra))
        return out
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            raise ValueError("NaN in output")
        if math.isinf(v):
            return "overflow" if v > 0 else "underflow"
        return v
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def run_output(command, inputs, diagnostics=None, results=None, warnings=()):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": jsonable(inputs),
        "diagnostics": jsonable(diagnostics or {}),
        "results": jsonable(results or {}),
        "warnings": sorted(set(warnings)),
    }


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)


# ---------------------------------------------------------------------------
# commands


def _saddle_diag(spec, t, x):
    sp = saddle.solve_rho(spec, t, x)
    diag = {"saddle": sp}
    try:
        diag["regime"] = saddle.classify_regime(spec, t, x)
    except PassageKitError as exc:  # regime labels are advisory
        log.warning("regime classification skipped: %s", exc)
    return sp, diag


def cmd_saddle(args, spec):
    sp, diag = _saddle_diag(spec, args.t, args.x)
    results = {"norming": saddle.norming_pair(spec, args.t)}
    warnings = set(saddle.estimate_warnings(sp, 1.0, 0.0))
    if sp.x_rho >= 1.0:
        results["lambda"] = saddle.lambda_diagnostic(spec, args.t, args.x)
    if "regime" in diag:
        warnings |= diag["regime"].warnings
    return diag, results, warnings


def cmd_density(args, spec):
    est = saddle.density_estimate(spec, args.t, args.x, args.z)
    _, diag = _saddle_diag(spec, args.t, args.x)
    results = {"density_estimate": est.value, "log_density_estimate": est.log_value, "z": est.z}
    warnings = set(est.warnings)
    try:
        log_exact = oracles.exact_log_density(spec, args.t, est.z)
        results["exact_density"] = math.exp(log_exact)
        results["log_exact_density"] = log_exact
        results["ratio"] = math.exp(est.log_value - log_exact)
    except Unsupported as exc:
        warnings.add("no-oracle")
        log.info("%s", exc)
    return diag, results, warnings


def cmd_passage(args, spec):
    _, diag = _saddle_diag(spec, args.t, args.x)
    est = passage.all_estimates(spec, args.t, args.x, args.delta, args.delta0)
    results = {}
    warnings = set()
    for name, e in est.items():
        results[name] = e.value
        results["log_" + name] = e.log_value
        warnings |= e.warnings
    results["creep_conditional"] = passage.creep_conditional(spec, args.t, args.x)
    return diag, results, warnings


def cmd_oracle(args, spec):
    _, diag = _saddle_diag(spec, args.t, args.x)
    results, warnings = {}, set()

    def attempt(name, fn):
        try:
            results[name] = fn()
        except (Unsupported, HypothesisHFailed) as exc:
            warnings.add(f"unsupported:{name}")
            log.info("%s: %s", name, exc)

    t, x = args.t, args.x
    attempt("exact_density", lambda: oracles.exact_density(spec, t, x))
    attempt("exact_hJ", lambda: oracles.exact_hJ(spec, t, x))
    attempt("convolve_hJ", lambda: oracles.convolve_hJ(spec, t, x))
    lam = args.lam if args.lam is not None else diag["saddle"].rho
    attempt("invert_g", lambda: oracles.invert_g(spec, t, x, lam))
    if args.delta is not None:
        attempt("interval_probability", lambda: oracles.exact_interval_probability(spec, t, x, args.delta))
        attempt("cp_passage_interval", lambda: dict(zip(("jump", "creep"), oracles.cp_passage_interval(spec, t, x, args.delta))))
    if spec.drift_b > 0.0:
        attempt("creep_probability", lambda: oracles.creep_probability(spec, x))
        if args.delta is not None:
            attempt("potential_density", lambda: oracles.potential_density(spec, args.delta, x))
    return diag, results, warnings


def _mc_config(args):
    return montecarlo.McConfig(n=args.n, seed=args.seed, eps=args.eps, step_cap=args.step_cap, workers=args.workers)


def cmd_mc(args, spec):
    cfg = _mc_config(args)
    if args.mode == "passage":
        out = montecarlo.simulate_passage(spec, args.x, args.t, args.delta, cfg)
    elif args.mode == "marginal":
        out = montecarlo.sample_marginal(spec, args.t, cfg, probes=args.probe or (args.x,), tilt=args.tilt)
    else:
        out = montecarlo.tilted_moment_check(spec, args.t, args.x, cfg)
    warnings = {"approximate-creep"} if out.approximate_creep_flag else set()
    return {}, {"mc": out}, warnings


# ---------------------------------------------------------------------------
# sweep

_AXIS = re.compile(r"^(t|x)=(.+?)\.\.(.+?):(log|lin)(\d+)$")
SWEEP_QUANTITIES = ("density", "hJ_density", "hJ_interval", "hC_interval")


def parse_axis(text):
    """``t=a..b:logN`` or ``x=a..b:linN`` into ``(name, values)``."""
    m = _AXIS.match(text)
    if not m:
        raise ParseError("axis must look like t=a..b:logN or x=a..b:linN", 0)
    name, a, b, scale, n = m.groups()
    try:
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ParseError(f"bad axis bounds: {exc}", 2) from None
    if n < 1 or not (a > 0 and b > 0):
        raise ParseError("axis needs positive bounds and at least one point", 0)
    if n == 1:
        return name, [a]
    vals = np.geomspace(a, b, n) if scale == "log" else np.linspace(a, b, n)
    # 15 digits keeps grid points like 8.0 exact in the output
    return name, [float(f"{v:.15g}") for v in vals]


def _sweep_log_oracle(spec, quantity, t, x, delta):
    """Log of the exact counterpart of ``quantity``, or ``None`` when no oracle applies."""
    try:
        if quantity == "density":
            return oracles.exact_log_density(spec, t, x)
        if quantity == "hJ_density":
            if isinstance(spec, Stable) and spec.alpha == 0.5 and spec.drift_b == 0.0:
                c = spec.s / math.sqrt(2.0)
                return math.log(c) + 0.5 * math.log(2.0 / (math.pi * x)) - (c * t) ** 2 / (2.0 * x)
            value = oracles.convolve_hJ(spec, t, x)
        elif quantity == "hJ_interval":
            if isinstance(spec, CompoundPoissonExp):
                value = oracles.cp_passage_interval(spec, t, x, delta)[0]
            else:
                value = oracles.exact_interval_probability(spec, t, x, delta)
        elif quantity == "hC_interval" and isinstance(spec, CompoundPoissonExp):
            value = oracles.cp_passage_interval(spec, t, x, delta)[1]
        else:
            return None
    except Unsupported:
        return None
    return math.log(value) if value > 0.0 else None


def _sweep_estimate(spec, quantity, t, x, delta, delta0):
    if quantity == "density":
        return saddle.density_estimate(spec, t, x).log_value
    if quantity == "hJ_density":
        return passage.hJ_density(spec, t, x).log_value
    if quantity == "hJ_interval":
        return passage.hJ_interval(spec, t, x, delta, delta0).log_value
    return passage.hC_interval(spec, t, x, delta, delta0).log_value


def sweep_rows(spec, axis, quantity, fixed_t=None, fixed_x=None, fixed_xt=None, delta=1.0, delta0=passage.DELTA0_DEFAULT):
    name, values = axis
    if quantity not in SWEEP_QUANTITIES:
        raise DomainError(f"quantity must be one of {SWEEP_QUANTITIES}")
    rows = []
    for v in values:
        if name == "t":
            t = v
            x = fixed_xt * t if fixed_xt is not None else fixed_x
        else:
            x = v
            t = fixed_t
        if t is None or x is None:
            raise DomainError("sweep needs the other coordinate fixed (--x, --xt or --t)")
        sp = saddle.solve_rho(spec, t, x)
        log_est = _sweep_estimate(spec, quantity, t, x, delta, delta0)
        log_oracle = _sweep_log_oracle(spec, quantity, t, x, delta)
        ratio = None if log_oracle is None else math.exp(log_est - log_oracle)
        rows.append(
            {
                name: v,
                "t": t,
                "x": x,
                "rho": sp.rho,
                "tH": sp.tH,
                "estimate": math.exp(log_est),
                "log_estimate": log_est,
                "oracle": None if log_oracle is None else math.exp(log_oracle),
                "log_oracle": log_oracle,
                "ratio": ratio,
                "abs_ratio_error": None if ratio is None else abs(ratio - 1.0),
            }
        )
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return "overflow" if v > 0 else "underflow"
        return repr(v)
    return str(v)


def write_csv_atomic(path, rows):
    fields = list(rows[0].keys())
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".sweep-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(fields)
            for row in rows:
                w.writerow([_fmt(row[k]) for k in fields])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_sweep(args, spec):
    axis = parse_axis(args.axis)
    rows = sweep_rows(spec, axis, args.quantity, args.t, args.x, args.xt, args.delta, args.delta0)
    if args.out:
        write_csv_atomic(args.out, rows)
    return {}, {"rows": rows, "out": args.out}, set()


# ---------------------------------------------------------------------------
# check suites

SUITES = ("lemma2", "moments", "hypH", "sc", "determinism")


def suite_lemma2(spec, args):
    rep = exponent_inequalities(spec)
    return rep.violations == 0, {"violations": rep.violations, "points": len(rep.grid)}, False


def suite_moments(spec, args):
    t, x = args.t, args.x
    sp = saddle.solve_rho(spec, t, x)
    var = t * sp.exps.sigma2
    bound = 6.0 * t * saddle._q(spec, 1.0 / sp.rho) / sp.rho**3 + 2.0 * x * var
    detail = {"target_mean": x, "target_var": var, "abs_third_bound": bound}
    try:
        q = oracles.tilted_moments_quadrature(spec, t, x)
        detail["quadrature"] = q
        ok = (
            abs(q["mass"] - 1.0) <= 1e-8
            and abs(q["mean"] / x - 1.0) <= 1e-8
            and abs(q["var"] / var - 1.0) <= 1e-8
            and q["abs_third"] <= bound
        )
    except Unsupported:
        ok = True
    if args.n:
        mc = montecarlo.tilted_moment_check(spec, t, x, _mc_config(args))
        detail["mc"] = mc
        for name, target in (("mass", 1.0), ("mean", x), ("var", var)):
            m, se = mc.moments[name]
            ok = ok and abs(m - target) <= 4.0 * se
        ok = ok and mc.moments["abs_third"][0] <= bound
    return ok, detail, False


def suite_hypH(spec, args):
    rep = oracles.hypothesis_H_check(spec)
    expected_fail = isinstance(spec, CompoundPoissonExp)
    passed = rep.verdict == "Pass"
    return passed or (expected_fail and rep.verdict == "Fail"), {"report": rep, "verdict": rep.verdict}, expected_fail


def suite_sc(spec, args):
    detail = {}
    for toward in ("zero", "inf"):
        y, sc, sc00 = saddle.feller_ratios(spec, toward)
        detail[toward] = {
            "max_tail_over_K": float(np.nanmax(sc)),
            "max_centering_ratio": float(np.nanmax(np.abs(sc00))),
            "stabilises": saddle.sc_holds(spec, toward),
        }
    return True, detail, False


def suite_determinism(spec, args):
    docs = []
    for workers in (1, 4, 8):
        cfg = montecarlo.McConfig(n=args.n or 40_000, seed=args.seed, eps=args.eps, step_cap=args.step_cap, block_size=4096, workers=workers)
        if isinstance(spec, Stable) and spec.alpha != 0.5:
            out = montecarlo.simulate_passage(spec, args.x, args.t, args.delta, cfg)
        else:
            out = montecarlo.sample_marginal(spec, args.t, cfg, probes=(args.x,))
        docs.append(dumps(jsonable(out)))
    same = all(d == docs[0] for d in docs)
    return same, {"identical": same, "workers": [1, 4, 8]}, False


def cmd_check(args, spec):
    fn = globals()["suite_" + args.suite]
    passed, detail, expected_fail = fn(spec, args)
    results = {"suite": args.suite, "passed": bool(passed), "detail": detail}
    warnings = {"expected-fail"} if expected_fail else set()
    return {}, results, warnings, (EXIT_OK if passed else EXIT_SUITE)


def cmd_verify(args, spec):
    from . import verify

    report = verify.run_battery(seed=args.seed, workers=args.workers, only=args.only, quick=args.quick)
    ok = all(r.passed for r in report)
    return {}, {"criteria": report, "all_passed": ok}, set(), (EXIT_OK if ok else EXIT_SUITE)


# ---------------------------------------------------------------------------
# argument parsing


def _default_seed():
    raw = os.environ.get("PASSAGEKIT_SEED")
    return int(raw) if raw else 0


def build_parser():
    p = argparse.ArgumentParser(prog="passagekit", description="Local estimates for subordinator densities and passage times.")
    p.add_argument("--log-level", default="WARNING")
    p.add_argument("--config", help="JSON file with {\"models\": {alias: model-string}}")
    sub = p.add_subparsers(dest="command", required=True)

    def model(sp, required=True):
        sp.add_argument("--model", required=required, help="e.g. gamma:a=1,theta=1 or stable_half")

    def tx(sp, x_default=None):
        sp.add_argument("--t", type=float, required=True)
        sp.add_argument("--x", type=float, required=x_default is None, default=x_default)

    def mc_opts(sp, n_default=100_000):
        sp.add_argument("--n", type=int, default=n_default)
        sp.add_argument("--seed", type=int, default=_default_seed())
        sp.add_argument("--eps", type=float, default=1e-6)
        sp.add_argument("--step-cap", type=int, default=10_000_000)
        sp.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("saddle")
    model(s)
    tx(s)
    s = sub.add_parser("density")
    model(s)
    tx(s)
    s.add_argument("--z", type=float)
    s = sub.add_parser("passage")
    model(s)
    tx(s)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--delta0", type=float, default=passage.DELTA0_DEFAULT)
    s = sub.add_parser("oracle")
    model(s)
    tx(s)
    s.add_argument("--delta", type=float)
    s.add_argument("--lam", type=float)
    s = sub.add_parser("mc")
    model(s)
    tx(s)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--mode", choices=("passage", "marginal", "tilted"), default="passage")
    s.add_argument("--probe", type=float, action="append")
    s.add_argument("--tilt", type=float)
    mc_opts(s)
    s = sub.add_parser("sweep")
    model(s)
    s.add_argument("--axis", required=True, help="t=a..b:logN or x=a..b:linN")
    s.add_argument("--quantity", choices=SWEEP_QUANTITIES, default="hJ_density")
    s.add_argument("--t", type=float)
    s.add_argument("--x", type=float)
    s.add_argument("--xt", type=float, help="hold x/t fixed along a t axis")
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--delta0", type=float, default=passage.DELTA0_DEFAULT)
    s.add_argument("--out")
    s = sub.add_parser("check")
    model(s)
    s.add_argument("--suite", choices=SUITES, required=True)
    s.add_argument("--t", type=float, default=2.0)
    s.add_argument("--x", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=1.0)
    mc_opts(s, n_default=0)
    s = sub.add_parser("verify")
    s.add_argument("--seed", type=int, default=_default_seed())
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--only", type=int, action="append", help="criterion number; repeatable")
    s.add_argument("--quick", action="store_true", help="smaller Monte Carlo runs")
    s.add_argument("--suite", help="run one check suite instead of the battery")
    s.add_argument("--model")
    return p


COMMANDS = {
    "saddle": cmd_saddle,
    "density": cmd_density,
    "passage": cmd_passage,
    "oracle": cmd_oracle,
    "mc": cmd_mc,
    "sweep": cmd_sweep,
    "check": cmd_check,
    "verify": cmd_verify,
}


def _load_aliases(path):
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    models = cfg.get("models", {})
    if not isinstance(models, dict):
        raise DomainError("config 'models' must be an object")
    return {str(k): str(v) for k, v in models.items()}


def _inputs(args):
    return {k: v for k, v in vars(args).items() if k not in ("log_level", "config", "workers") and v is not None}


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    inputs = _inputs(args)
    try:
        aliases = _load_aliases(args.config)
        if args.command == "verify" and args.suite:
            # a single check suite run through the verify entry point
            spec = parse_model(args.model or "stable_half", aliases)
            args.t, args.x, args.delta = 2.0, 1.0, 1.0
            args.n, args.eps, args.step_cap = 0, 1e-6, 10_000_000
            args.command = "check"
            outcome = cmd_check(args, spec)
        else:
            spec = parse_model(args.model, aliases) if getattr(args, "model", None) else None
            outcome = COMMANDS[args.command](args, spec)
        if spec is not None:
            inputs["model"] = spec.render()
    except ParseError as exc:
        return _fail(stdout, args, inputs, "ParseError", exc, EXIT_DOMAIN, position=exc.position)
    except (DomainError, Unsupported, HypothesisHFailed) as exc:
        return _fail(stdout, args, inputs, type(exc).__name__, exc, EXIT_DOMAIN)
    except (ConvergenceFailure, StepCapExceeded) as exc:
        return _fail(stdout, args, inputs, type(exc).__name__, exc, EXIT_CONVERGENCE)
    diag, results, warnings = outcome[:3]
    code = outcome[3] if len(outcome) > 3 else EXIT_OK
    print(dumps(run_output(args.command, inputs, diag, results, warnings)), file=stdout)
    return code


def _fail(stdout, args, inputs, kind, exc, code, position=None):
    log.error("%s: %s", kind, exc)
    err = {"type": kind, "message": str(exc)}
    if position is not None:
        err["position"] = position
    doc = run_output(args.command, inputs, results={"error": err}, warnings=("error",))
    print(dumps(doc), file=stdout)
    return code


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
