"""Jump-passage density: saddle estimate, quadrature convolution and Fourier inversion side by side."""
from dataclasses import dataclass, field

from passagekit import Gamma, Stable, stable_half
from passagekit.oracles import convolve_hJ, invert_g
from passagekit.passage import hJ_density
from passagekit.saddle import solve_rho


@dataclass
class Config:
    cases: list = field(
        default_factory=lambda: [
            (stable_half(), 2.0, 1.0),
            (stable_half(), 8.0, 4.0),
            (Gamma(a=1.0), 10.0, 5.0),
            (Gamma(a=1.0), 40.0, 20.0),
            (Gamma(a=2.0, theta=0.5, drift_b=0.2), 10.0, 20.0),
            (Stable(alpha=0.7), 4.0, 1.0),
        ]
    )


def run(cfg):
    print(f"{'model':44s} {'t':>5} {'x':>5} {'tH':>7} {'estimate':>12} {'inversion':>12} {'convolution':>12} {'est/inv':>9}")
    for spec, t, x in cfg.cases:
        sp = solve_rho(spec, t, x)
        est = hJ_density(spec, t, x).value
        inv = invert_g(spec, t, x, sp.rho).hJ_value
        conv = convolve_hJ(spec, t, x) if not isinstance(spec, Stable) or spec.alpha == 0.5 else float("nan")
        print(f"{spec.render():44s} {t:5g} {x:5g} {sp.tH:7.3f} {est:12.6e} {inv:12.6e} {conv:12.6e} {est / inv:9.6f}")


if __name__ == "__main__":
    run(Config())
