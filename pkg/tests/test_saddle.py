import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_kinds
from passagekit import CompoundPoissonExp, Gamma, Stable, stable_half
from passagekit.errors import DomainError, OutOfRegime
from passagekit.oracles import exact_log_density
from passagekit.saddle import (
    PRE_ASYMPTOTIC_TH,
    _q,
    classify_regime,
    density_estimate,
    feller_ratios,
    lambda_diagnostic,
    norming_pair,
    solve_rho,
)


def half_log_density(t, x):
    return math.log(t) - 0.5 * math.log(2.0 * math.pi * x**3) - t * t / (2.0 * x)


def test_solve_rho_examples(half, gamma11):
    sp = solve_rho(half, 2.0, 1.0)
    assert sp.rho == pytest.approx(2.0, rel=1e-14)
    assert sp.exps.H == pytest.approx(1.0, rel=1e-14)
    assert sp.exps.sigma2 == pytest.approx(0.125, rel=1e-14)
    assert sp.tH == pytest.approx(2.0, rel=1e-14)
    assert solve_rho(gamma11, 10.0, 5.0).rho == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(OutOfRegime):
        solve_rho(gamma11, 10.0, 15.0)
    with pytest.raises(DomainError):
        solve_rho(half, 0.0, 1.0)


@pytest.mark.parametrize("spec", all_kinds(), ids=lambda s: s.render())
def test_residual_and_bounds(spec):
    mu = spec.mean_mu
    hi = mu if math.isfinite(mu) else spec.drift_b + 100.0
    for frac in (0.01, 0.3, 0.7, 0.99):
        xt = spec.drift_b + frac * (hi - spec.drift_b)
        for t in (0.1, 1.0, 10.0, 1000.0):
            sp = solve_rho(spec, t, xt * t)
            assert sp.residual <= 1e-12 * max(1.0, sp.x_t)
            assert sp.s_t * sp.rho <= math.sqrt(2.0 * sp.tH) * (1 + 1e-12)


@given(t=st.floats(0.1, 100), x1=st.floats(0.01, 50), x2=st.floats(0.01, 50))
def test_rho_non_increasing_in_x(t, x1, x2):
    spec = Stable(alpha=0.6, s=1.3)
    lo, hi = sorted((x1, x2))
    if lo == hi:
        return
    assert solve_rho(spec, t, lo).rho >= solve_rho(spec, t, hi).rho


def test_density_examples(half, gamma11):
    assert density_estimate(half, 2.0, 1.0).value == pytest.approx(0.1079819, abs=5e-8)
    # phi(0.4) e^{-2} e^{0.4} / 0.5
    at_12 = math.exp(-0.08) / math.sqrt(2 * math.pi) * math.exp(-2.0) * math.exp(0.4) / 0.5
    assert density_estimate(half, 2.0, 1.0, z=1.2).value == pytest.approx(at_12, rel=1e-12)
    assert math.exp(half_log_density(2.0, 1.2)) == pytest.approx(2.0 * (2 * math.pi * 1.2**3) ** -0.5 * math.exp(-4 / 2.4), rel=1e-14)
    expected = math.exp(-(math.log(2.0) - 0.5) * 10) / math.sqrt(2 * math.pi * 10 * 0.25)
    assert density_estimate(gamma11, 10.0, 5.0).value == pytest.approx(expected, rel=1e-12)


def test_half_density_exact_on_grid(half):
    for t in np.logspace(-1, 2, 5):
        for x in np.logspace(-1.3, 1.7, 5):
            est = density_estimate(half, float(t), float(x))
            assert abs(math.expm1(est.log_value - half_log_density(t, x))) <= 1e-8


def test_underflow_and_pre_asymptotic(half):
    deep = density_estimate(half, 100.0, 0.05)
    assert deep.value == 0.0 and deep.underflow and math.isfinite(deep.log_value)
    shallow = density_estimate(half, 1.0, 1.0)
    assert shallow.sp.tH < PRE_ASYMPTOTIC_TH and "pre-asymptotic" in shallow.warnings


@given(at=st.floats(5, 500), a2=st.floats(0.2, 5.0), theta=st.floats(0.2, 5.0), frac=st.floats(0.1, 0.9))
def test_gamma_ratio_depends_on_at_only(at, a2, theta, frac):
    ref = Gamma(a=1.0, theta=1.0)
    other = Gamma(a=a2, theta=theta)
    t2 = at / a2
    r1 = density_estimate(ref, at, 0.5 * at).log_value - exact_log_density(ref, at, 0.5 * at)
    x2 = frac * other.mean_mu * t2
    r2 = density_estimate(other, t2, x2).log_value - exact_log_density(other, t2, x2)
    assert abs(math.expm1(r1 - r2)) <= 1e-9


def test_norming_examples(half):
    n1 = norming_pair(half, 1.0)
    c = 32.0 / (9.0 * math.pi)
    assert n1.c_t == pytest.approx(c, rel=1e-12)
    assert n1.b_t == pytest.approx(2.0 * math.sqrt(c) / math.sqrt(2.0 * math.pi), rel=1e-12)
    assert norming_pair(half, 4.0).c_t == pytest.approx(16.0 * c, rel=1e-12)


@pytest.mark.parametrize("spec", all_kinds()[:5], ids=lambda s: s.render())
def test_norming_solves(spec):
    for t in (0.01, 1.0, 100.0):
        n = norming_pair(spec, t)
        assert n.solved
        assert t * _q(spec, n.c_t) == pytest.approx(1.0, rel=1e-10)


def test_norming_unsolved_for_small_cp_activity():
    n = norming_pair(CompoundPoissonExp(rate=1.0, eta=1.0), 0.5)
    assert not n.solved


def test_lambda_examples(half):
    a = lambda_diagnostic(half, 2.0, 1.0)
    b = lambda_diagnostic(half, 20.0, 10.0)
    assert _q(half, 0.5) == pytest.approx(_q(half, 1.0) * math.sqrt(2.0), rel=1e-14)
    assert a.lambda_bar == pytest.approx(20.054, abs=5e-4)
    assert b.lambda_bar == pytest.approx(25.0676 / 2.5**1.5, rel=1e-5)
    assert a.lambda_bar * math.sqrt(a.tH) == pytest.approx(b.lambda_bar * math.sqrt(b.tH), rel=1e-8)
    assert a.lambda_bar * math.sqrt(a.tH) == pytest.approx(28.36, abs=5e-3)


@given(xt=st.floats(0.01, 10.0), t1=st.floats(0.5, 100), t2=st.floats(0.5, 100))
def test_lambda_self_similar(xt, t1, t2):
    spec = Stable(alpha=0.4, s=0.7)
    try:
        a = lambda_diagnostic(spec, t1, xt * t1)
        b = lambda_diagnostic(spec, t2, xt * t2)
    except DomainError:
        return
    assert a.lambda_bar * math.sqrt(a.tH) == pytest.approx(b.lambda_bar * math.sqrt(b.tH), rel=1e-8)


def test_regime_examples(half, gamma11, cp_drift):
    r = classify_regime(half, 100.0, 1.0)
    assert "SC0_I" in r.labels and r.tH == pytest.approx(5000.0, rel=1e-12)
    assert "G" in classify_regime(gamma11, 100.0, 50.0).labels
    with pytest.raises(OutOfRegime):
        classify_regime(cp_drift, 10.0, 3.0)


def test_regime_small_time_and_infinite_mean(half):
    assert "SC0_II" in classify_regime(half, 0.5, 0.005).labels
    assert "SCinf" in classify_regime(Stable(alpha=0.5), 10.0, 1e4).labels
    assert classify_regime(Gamma(a=1.0), 10.0, 9.9).labels == {"Indeterminate"}


def test_feller_ratios_stable_constant():
    y, sc, sc00 = feller_ratios(Stable(alpha=0.4), "zero")
    assert np.allclose(sc, (2 - 0.4) / 0.4, rtol=1e-10)
    with pytest.raises(DomainError):
        feller_ratios(Stable(alpha=0.4), "sideways")
