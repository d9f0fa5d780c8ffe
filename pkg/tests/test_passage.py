import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from passagekit import CompoundPoissonExp, Gamma, Stable, stable_half
from passagekit.errors import DomainError, Unsupported
from passagekit.oracles import exact_interval_probability
from passagekit.passage import (
    all_estimates,
    creep_conditional,
    hC_density,
    hC_interval,
    hJ_density,
    hJ_interval,
    stable_limit,
)
from passagekit.saddle import solve_rho


def half_h(t, x):
    return math.sqrt(2.0 / (math.pi * x)) * math.exp(-t * t / (2.0 * x))


DRIFTED = [
    CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5),
    Gamma(a=2.0, theta=1.0, drift_b=0.3),
    stable_half(drift_b=0.4),
    Stable(alpha=0.7, drift_b=1.0),
]


def test_hJ_density_examples(half, gamma11):
    assert hJ_density(half, 2.0, 1.0).value == pytest.approx(half_h(2.0, 1.0), rel=1e-12)
    assert hJ_density(half, 2.0, 1.0).value == pytest.approx(0.1079819, abs=5e-8)
    assert hJ_density(half, 4.0, 1.0).value == pytest.approx(math.sqrt(2 / math.pi) * math.exp(-8.0), rel=1e-12)
    expected = math.log(2.0) / (math.sqrt(20 * math.pi) * 0.5) * math.exp(-10 * (math.log(2.0) - 0.5))
    assert hJ_density(gamma11, 10.0, 5.0).value == pytest.approx(expected, rel=1e-12)


def test_hJ_interval_examples(half):
    e = hJ_interval(half, 2.0, 1.0, 0.5)
    assert e.value == pytest.approx(half_h(2.0, 1.0) * (1 - math.exp(-1.0)) / 2.0, rel=1e-12)
    assert e.value == pytest.approx(0.0341288, abs=5e-8)
    assert "pre-asymptotic" in e.warnings
    assert exact_interval_probability(half, 2.0, 1.0, 0.5) == pytest.approx(0.0330809, abs=5e-8)
    deep = hJ_interval(half, 20.0, 1.0, 0.1)
    expected = half_h(20.0, 1.0) * (1.0 / 20.0) * -math.expm1(-2.0)
    assert deep.value == pytest.approx(expected, rel=1e-12)


def test_delta_bounds(half):
    with pytest.raises(DomainError):
        hJ_interval(half, 2.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        hJ_interval(half, 2.0, 1.0, 11.0)
    assert hJ_interval(half, 2.0, 1.0, 11.0, delta0=20.0).value > 0


@given(t=st.floats(0.5, 50), xt=st.floats(0.01, 5), delta=st.floats(1e-8, 1.0))
def test_small_delta_limit(t, xt, delta):
    spec = stable_half()
    sp = solve_rho(spec, t, xt * t)
    dpsi = delta * sp.exps.psi
    assume(dpsi <= 0.1)
    j = hJ_interval(spec, t, xt * t, delta)
    d = hJ_density(spec, t, xt * t)
    assume(d.value > 1e-250)
    assert abs(j.value / (delta * d.value) - 1.0) <= dpsi


def test_cp_creep_examples(cp_drift):
    sp = solve_rho(cp_drift, 20.0, 20.0)
    rho = math.sqrt(2.0) - 1.0
    assert sp.rho == pytest.approx(rho, rel=1e-12)
    assert sp.exps.psi == pytest.approx(0.5, rel=1e-12)
    assert sp.tH / 20.0 == pytest.approx(0.5 - rho, rel=1e-12)
    assert sp.exps.sigma2 == pytest.approx(2.0 / (1 + rho) ** 3, rel=1e-12)
    common = math.exp(-sp.tH) / (math.sqrt(2 * math.pi * 20.0) * rho * math.sqrt(sp.exps.sigma2))
    c = hC_interval(cp_drift, 20.0, 20.0, 1.0)
    assert c.value == pytest.approx(0.5 * rho * common * -math.expm1(-0.5) / 0.5, rel=1e-12)
    assert c.value == pytest.approx(7.5e-3, rel=1e-3)
    cd = hC_density(cp_drift, 20.0, 20.0)
    assert cd.value == pytest.approx(0.5 * math.exp(-sp.tH) / math.sqrt(2 * math.pi * 20 * sp.exps.sigma2), rel=1e-12)
    j = hJ_interval(cp_drift, 20.0, 20.0, 1.0)
    assert c.value / (c.value + j.value) == pytest.approx(rho, rel=1e-12)
    assert creep_conditional(cp_drift, 20.0, 20.0) == pytest.approx(rho, rel=1e-12)


def test_zero_drift_creep(half):
    c = hC_interval(half, 2.0, 1.0, 0.5)
    assert c.value == 0.0 and "zero-drift" in c.warnings
    d = hC_density(half, 2.0, 1.0)
    assert d.value == 0.0 and "zero-drift" in d.warnings
    assert creep_conditional(half, 2.0, 1.0) == 0.0


def test_creep_density_boundary():
    spec = Gamma(a=1.0, drift_b=0.5)
    with pytest.raises(DomainError):
        hC_density(spec, 2.0, 1.0)


def test_creep_conditional_limits(cp_drift):
    assert creep_conditional(cp_drift, 1e6, 1.5e6 * (1 - 1e-9)) == pytest.approx(1.0 / 3.0, rel=1e-4)
    assert creep_conditional(cp_drift, 1.0, 0.5 * (1 + 1e-9)) > 0.999


@pytest.mark.parametrize("spec", DRIFTED, ids=lambda s: s.render())
@given(t=st.floats(0.1, 100), frac=st.floats(0.02, 0.98), delta=st.floats(0.01, 10.0))
def test_creep_split_identity(spec, t, frac, delta):
    hi = min(spec.mean_mu, 50.0 * spec.drift_b)
    x = t * (spec.drift_b + frac * (hi - spec.drift_b))
    j = hJ_interval(spec, t, x, delta)
    c = hC_interval(spec, t, x, delta)
    split = 1.0 / (1.0 + math.exp(j.log_value - c.log_value))
    assert split == pytest.approx(creep_conditional(spec, t, x), rel=1e-12)


def test_replacement_limits(half):
    # rho -> 0: factor -> delta; rho -> infinity: factor -> 1/psi
    for t, x, delta in ((0.1, 100.0, 0.5), (50.0, 0.1, 5.0)):
        sp = solve_rho(half, t, x)
        psi = sp.exps.psi
        factor = -math.expm1(-delta * psi) / psi
        if delta * psi < 0.1:
            assert abs(factor / delta - 1) <= delta * psi / 2
        else:
            assert abs(factor * psi - 1) <= math.exp(-delta * psi)


def test_half_jump_density_shape_in_x(half):
    # x^{-1/2} e^{-t^2/2x} rises up to x = t^2 and falls after it
    for t in (0.5, 2.0, 10.0):
        xs = np.logspace(-1, 3, 60)
        vals = np.array([hJ_density(half, t, float(x)).log_value for x in xs])
        diffs = np.diff(vals)
        mids = xs[1:]
        assert np.all(diffs[mids < t * t] > 0)
        assert np.all(diffs[xs[:-1] > t * t] < 0)
        assert np.all(np.exp(vals) >= 0)


def test_stable_limit_examples(half):
    lim = stable_limit(half, 2.0, 1.0)
    assert lim.c_t == pytest.approx(8.0 / math.pi, rel=1e-12)
    assert lim.y_t == pytest.approx(math.pi / 8.0, rel=1e-12)
    y = lim.y_t
    assert lim.hJ_scaled == pytest.approx(y**-0.5 * math.exp(-math.pi / (4 * y)), rel=1e-12)
    assert lim.hJ_scaled == pytest.approx(2.0 * hJ_density(half, 2.0, 1.0).value, rel=1e-12)
    lim8 = stable_limit(half, 8.0, 2.0)
    assert lim8.c_t == pytest.approx(128.0 / math.pi, rel=1e-12)
    assert lim8.hJ_scaled == pytest.approx(8.0 * hJ_density(half, 8.0, 2.0).value, rel=1e-8)
    with pytest.raises(Unsupported):
        stable_limit(Gamma(a=1.0), 2.0, 1.0)


@given(t=st.floats(0.2, 5), x=st.floats(0.1, 20))
def test_stable_scaling_identity(t, x):
    spec = stable_half()
    d = hJ_density(spec, t, x)
    assume(d.value > 1e-250)
    assert t * d.value == pytest.approx(stable_limit(spec, t, x).hJ_scaled, rel=1e-8)


def test_all_estimates(cp_drift, half):
    out = all_estimates(cp_drift, 20.0, 20.0, 1.0)
    assert set(out) == {"hJ_density", "hJ_interval", "hC_interval", "hC_density"}
    assert all(e.value >= 0 for e in out.values())
    assert set(all_estimates(half, 2.0, 1.0, 0.5)) == {"hJ_density", "hJ_interval", "hC_interval", "hC_density"}
