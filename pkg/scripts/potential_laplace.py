"""Potential densities u_delta(y): Laplace transform check and convergence to u_inf as delta grows."""
import math

import numpy as np

from passagekit import CompoundPoissonExp, Gamma, Stable, stable_half
from passagekit.oracles import potential_density
from passagekit.quadrature import half_line, tanh_sinh

MODELS = [
    (CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5), 2.0),
    (Gamma(a=1.0, drift_b=0.5), 2.0),
    (stable_half(drift_b=1.0), 1.5),
    (Stable(alpha=0.6, drift_b=1.0), math.inf),
]


def laplace(spec, delta, lam):
    f = np.vectorize(lambda y: math.exp(-lam * y) * potential_density(spec, delta, y) if 0 < y < math.inf else 0.0)
    end = spec.drift_b * delta if math.isfinite(delta) else 1.0
    return float(tanh_sinh(f, 0.0, end, rtol=1e-9, strict=False)) + float(half_line(f, end, scale=1.0 / lam, rtol=1e-9, strict=False))


def main():
    for spec, delta in MODELS:
        worst = 0.0
        for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
            psi = float(spec.psi(lam))
            want = 1.0 / psi if math.isinf(delta) else -math.expm1(-delta * psi) / psi
            worst = max(worst, abs(laplace(spec, delta, lam) / want - 1.0))
        print(f"{spec.render():40s} delta={delta:<5g} max Laplace mismatch {worst:.2e}")
    spec = Gamma(a=1.0, drift_b=0.5)
    print("\nGamma(1) with b=0.5 at y=1: u_delta for growing delta, then u_inf")
    for d in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, math.inf):
        print(f"  delta={d:<5g} u={potential_density(spec, d, 1.0):.10f}")


if __name__ == "__main__":
    main()
