import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from passagekit import CompoundPoissonExp, Gamma, Stable, stable_half
from passagekit.errors import DomainError, HypothesisHFailed, Unsupported, ZeroDrift
from passagekit.oracles import (
    _stable_std_density,
    convolve_hJ,
    cp_passage_densities,
    cp_passage_interval,
    creep_probability,
    exact_density,
    exact_hJ,
    hypothesis_H_check,
    invert_density,
    invert_g,
    potential_density,
)
from passagekit.passage import hJ_density
from passagekit.quadrature import half_line, tanh_sinh
from passagekit.saddle import solve_rho


def half_h(t, x):
    return math.sqrt(2.0 / (math.pi * x)) * math.exp(-t * t / (2.0 * x))


# --- marginal densities ---------------------------------------------------


def test_exact_density_examples(half, gamma11):
    assert exact_density(half, 2.0, 1.0) == pytest.approx(2.0 / math.sqrt(2 * math.pi) * math.exp(-2.0), rel=1e-14)
    assert exact_density(half, 2.0, 1.0) == pytest.approx(0.1079819, abs=5e-8)
    assert exact_density(gamma11, 2.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_exact_density_rejects_cp(cp_drift):
    with pytest.raises(Unsupported):
        exact_density(cp_drift, 1.0, 1.0)
    with pytest.raises(Unsupported):
        convolve_hJ(cp_drift, 1.0, 1.0)


@pytest.mark.parametrize("spec,t", [(stable_half(), 2.0), (Gamma(a=1.0), 3.0), (Gamma(a=0.4, theta=2.0, drift_b=0.5), 1.5)])
def test_density_normalisation(spec, t):
    bt = spec.drift_b * t
    f = np.vectorize(lambda z: exact_density(spec, t, bt + z) if 0 < z < math.inf else 0.0)
    total = float(tanh_sinh(f, 0.0, 1.0)) + float(half_line(f, 1.0, scale=1.0 + t * t))
    assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha,x", [(0.3, 0.5), (0.7, 0.3), (0.7, 1.0), (0.7, 4.0), (0.85, 2.0)])
def test_inversion_matches_zolotarev(alpha, x):
    # two unrelated routes to the same stable density
    spec = Stable(alpha=alpha)
    res = invert_density(spec, 1.0, x)
    assert res.value == pytest.approx(_stable_std_density(x, alpha), rel=1e-8)
    assert abs(res.imag_residual) <= 1e-10 * abs(res.value)


def test_zolotarev_half_closed_form():
    for x in (0.01, 0.3, 1.0, 5.0, 100.0):
        closed = x**-1.5 / (2 * math.sqrt(math.pi)) * math.exp(-1 / (4 * x))
        assert _stable_std_density(x, 0.5) == pytest.approx(closed, rel=1e-12)


# --- jump-passage densities -----------------------------------------------


def test_convolve_examples(half, gamma11):
    assert convolve_hJ(half, 2.0, 1.0) == pytest.approx(half_h(2.0, 1.0), rel=1e-8)
    assert convolve_hJ(half, 2.0, 1.0) == pytest.approx(0.1079819, abs=5e-8)
    assert convolve_hJ(half, 4.0, 1.0) == pytest.approx(half_h(4.0, 1.0), rel=1e-8)
    ref = convolve_hJ(gamma11, 10.0, 5.0)
    est = hJ_density(gamma11, 10.0, 5.0)
    assert est.sp.tH == pytest.approx(10 * (math.log(2.0) - 0.5), rel=1e-12)
    assert abs(est.value / ref - 1.0) <= 0.05


def test_invert_g_examples(half):
    out = invert_g(half, 2.0, 1.0, 2.0)
    assert out.g_value == pytest.approx(math.exp(2.0) * half_h(2.0, 1.0), rel=1e-8)
    assert out.g_value == pytest.approx(0.7978846, abs=5e-7)
    assert out.hJ_value == pytest.approx(0.1079819, abs=5e-8)
    assert abs(out.inversion.imag_residual) <= 1e-10 * out.g_value


def test_invert_g_off_saddle_tilt(half):
    # the tilt is a free parameter; any lam recovers the same h
    for lam in (0.5, 2.0, 8.0):
        assert invert_g(half, 2.0, 1.0, lam).hJ_value == pytest.approx(half_h(2.0, 1.0), rel=1e-7)


def test_g_normalisation(half):
    t, lam = 2.0, 2.0
    f = np.vectorize(lambda y: invert_g(half, t, y, lam).g_value if y > 0 else 0.0)
    total = float(tanh_sinh(f, 0.0, 1.0, rtol=1e-8, strict=False)) + float(
        tanh_sinh(f, 1.0, 12.0, rtol=1e-8, strict=False)
    )
    assert total == pytest.approx(1.0, abs=1e-6)


def test_invert_g_refuses_cp(cp_drift):
    with pytest.raises(HypothesisHFailed):
        invert_g(cp_drift, 2.0, 3.0, 1.0)
    with pytest.raises(DomainError):
        invert_g(stable_half(), 2.0, 1.0, 0.0)


@pytest.mark.parametrize(
    "spec,t,x",
    [
        (stable_half(), 2.0, 1.0),
        (stable_half(), 6.0, 4.0),
        (Gamma(a=1.0), 10.0, 5.0),
        (Gamma(a=2.0, theta=0.5), 8.0, 14.0),
        (Gamma(a=1.0, drift_b=0.3), 10.0, 6.0),
    ],
)
def test_oracle_agreement(spec, t, x):
    a = convolve_hJ(spec, t, x)
    b = invert_g(spec, t, x, solve_rho(spec, t, x).rho).hJ_value
    assert abs(a - b) <= 1e-5 * a


def test_exact_hj_half_closed_form(half):
    assert exact_hJ(half, 3.0, 2.0) == pytest.approx(half_h(3.0, 2.0), rel=1e-14)


# --- potential densities --------------------------------------------------


def test_cp_potential_example(cp_drift):
    u = potential_density(cp_drift, math.inf, 1.0)
    assert u == pytest.approx(2 / 3 + 4 / 3 * math.exp(-3.0), rel=1e-14)
    assert u == pytest.approx(0.7330494, abs=5e-8)
    assert creep_probability(cp_drift, 1.0) == pytest.approx(0.3665247, abs=5e-8)


def test_potential_zero_drift(half):
    with pytest.raises(ZeroDrift):
        potential_density(half, 1.0, 1.0)
    with pytest.raises(DomainError):
        potential_density(stable_half(drift_b=1.0), 1.0, -1.0)
    assert creep_probability(half, 1.0) == 0.0


def test_half_stable_u_inf_closed_form():
    spec = stable_half(drift_b=1.0)
    for y in (1e-200, 1e-3, 0.3, 1.0, 30.0, 1e4):
        want = special.erfcx(math.sqrt(2 * y)) / 1.0
        assert potential_density(spec, math.inf, y) == pytest.approx(want, rel=1e-12)


LAMBDAS = (0.25, 0.5, 1.0, 2.0, 4.0)


def _laplace(spec, delta, lam):
    f = np.vectorize(lambda y: math.exp(-lam * y) * potential_density(spec, delta, y) if 0 < y < math.inf else 0.0)
    end = spec.drift_b * delta if math.isfinite(delta) else 1.0
    return float(tanh_sinh(f, 0.0, end, rtol=1e-9, strict=False)) + float(
        half_line(f, end, scale=1.0 / lam, rtol=1e-9, strict=False)
    )


@pytest.mark.parametrize(
    "spec,delta",
    [
        (CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5), math.inf),
        (CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5), 2.0),
        (Gamma(a=1.0, drift_b=0.5), 2.0),
        (stable_half(drift_b=1.0), 1.5),
        (Stable(alpha=0.6, drift_b=1.0), math.inf),
    ],
)
def test_potential_laplace_identity(spec, delta):
    for lam in LAMBDAS:
        psi = float(spec.psi(lam))
        want = 1.0 / psi if math.isinf(delta) else -math.expm1(-delta * psi) / psi
        assert _laplace(spec, delta, lam) == pytest.approx(want, rel=1e-6)


@pytest.mark.parametrize(
    "spec,ys",
    [
        (CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5), (0.3, 1.0, 3.0)),
        (Gamma(a=1.0, drift_b=0.5), (0.3, 1.0, 3.0)),
        (stable_half(drift_b=1.0), (0.3, 1.0, 3.0)),
        (Stable(alpha=0.7, drift_b=0.5), (1.0, 3.0)),
    ],
)
def test_potential_monotone_in_delta(spec, ys):
    for y in ys:
        vals = [potential_density(spec, d, y) for d in (0.5, 1.0, 2.0, 8.0, 40.0)] + [potential_density(spec, math.inf, y)]
        assert all(a <= b * (1 + 1e-9) for a, b in zip(vals, vals[1:]))
        assert vals[-2] == pytest.approx(vals[-1], rel=1e-6)


def test_potential_below_drift_line_equals_u_inf():
    # X_s >= bs, so y <= b delta is passed before time delta
    spec = Stable(alpha=0.7, drift_b=0.5)
    assert potential_density(spec, 4.0, 1.5) == potential_density(spec, math.inf, 1.5)


def test_fourier_cross_check():
    spec = stable_half(drift_b=1.0)
    y = 3.0
    assert potential_density(spec, math.inf, y, method="fourier") == pytest.approx(
        potential_density(spec, math.inf, y), rel=1e-7
    )


# --- integrability check ---------------------------------------------------


@pytest.mark.parametrize(
    "spec,verdict",
    [
        (Stable(alpha=0.6), "Pass"),
        (Stable(alpha=0.3), "Pass"),
        (Gamma(a=1.0), "Pass"),
        (CompoundPoissonExp(rate=1.0, eta=1.0), "Fail"),
        (CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5), "Fail"),
    ],
)
def test_hypothesis_H(spec, verdict):
    rep = hypothesis_H_check(spec)
    assert rep.verdict == verdict
    assert rep.integrand_samples
    if verdict == "Fail":
        assert rep.decay_exponent_estimate <= 0.2


def test_gamma_H_decay_matches_log_growth():
    # integrand ~ z^{-t0 a - 1} log z for gamma
    rep = hypothesis_H_check(Gamma(a=1.0), t0_candidates=(2.0,))
    assert rep.t0_used == 2.0
    assert rep.decay_exponent_estimate == pytest.approx(2.0, abs=0.2)


# --- compound Poisson passage times ---------------------------------------


@given(
    rate=st.floats(0.2, 3.0),
    eta=st.floats(0.2, 3.0),
    b=st.floats(0.1, 2.0),
    x=st.floats(0.2, 4.0),
)
def test_cp_passage_total_mass(rate, eta, b, x):
    spec = CompoundPoissonExp(rate=rate, eta=eta, drift_b=b)
    jump, creep = cp_passage_interval(spec, 0.0, x, x / b + 1.0)
    assert jump + creep == pytest.approx(1.0, abs=1e-10)
    assert creep == pytest.approx(creep_probability(spec, x), rel=1e-9)


def test_cp_passage_driftless():
    spec = CompoundPoissonExp(rate=2.0, eta=1.0)
    jump, creep = cp_passage_interval(spec, 0.0, 1.5, 200.0)
    assert creep == 0.0
    assert jump == pytest.approx(1.0, abs=1e-10)


def test_cp_passage_densities_vanish_past_drift_line(cp_drift):
    j, c = cp_passage_densities(cp_drift, np.array([2.0, 3.0]), 1.0)
    assert np.all(j == 0.0) and np.all(c == 0.0)


def test_cp_passage_refuses_other_kinds(half):
    with pytest.raises(Unsupported):
        cp_passage_interval(half, 1.0, 1.0, 1.0)
