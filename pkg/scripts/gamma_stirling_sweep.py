"""Relative error of the gamma density estimate against the exact density at fixed x/t."""
import argparse
import math
from dataclasses import dataclass

from passagekit import Gamma
from passagekit.oracles import exact_log_density
from passagekit.saddle import density_estimate


@dataclass
class Config:
    a: float = 1.0
    theta: float = 1.0
    xt: float = 0.5
    at_values: tuple = (1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0)


def run(cfg):
    spec = Gamma(a=cfg.a, theta=cfg.theta)
    print(f"{'a*t':>8} {'tH':>10} {'|ratio-1|':>12} {'1/(12at)':>12}")
    for at in cfg.at_values:
        t = at / cfg.a
        x = cfg.xt * t
        est = density_estimate(spec, t, x)
        err = abs(math.exp(est.log_value - exact_log_density(spec, t, x)) - 1.0)
        print(f"{at:8.0f} {est.sp.tH:10.4f} {err:12.4e} {1 / (12 * at):12.4e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--xt", type=float, default=0.5)
    args = p.parse_args()
    run(Config(a=args.a, xt=args.xt))
