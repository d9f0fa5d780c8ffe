"""Interval passage estimates for compound Poisson with drift at x = t, as t grows."""
import argparse
from dataclasses import dataclass

from passagekit import CompoundPoissonExp
from passagekit.montecarlo import McConfig, simulate_passage
from passagekit.oracles import cp_passage_interval
from passagekit.passage import hC_interval, hJ_interval


@dataclass
class Config:
    ts: tuple = (5.0, 10.0, 20.0, 40.0, 80.0)
    delta: float = 1.0
    n: int = 0  # 0 skips the simulation column
    seed: int = 0


def run(cfg):
    spec = CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5)
    print(f"{'t':>6} {'tH':>8} {'jump err':>10} {'creep err':>10}" + ("  mc jump z  mc creep z" if cfg.n else ""))
    for i, t in enumerate(cfg.ts):
        hj = hJ_interval(spec, t, t, cfg.delta)
        hc = hC_interval(spec, t, t, cfg.delta)
        jump, creep = cp_passage_interval(spec, t, t, cfg.delta)
        line = f"{t:6.0f} {hj.sp.tH:8.3f} {abs(hj.value / jump - 1):10.3e} {abs(hc.value / creep - 1):10.3e}"
        if cfg.n:
            out = simulate_passage(spec, t, t, cfg.delta, McConfig(n=cfg.n, seed=cfg.seed + i))
            zs = []
            for name, exact in (("jump", jump), ("creep", creep)):
                p, se = out.estimates[f"P(T_x in (t,t+delta], {name})"]
                zs.append((p - exact) / se if se > 0 else float("nan"))
            line += f"  {zs[0]:+9.2f}  {zs[1]:+9.2f}"
        print(line)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    run(Config(n=args.n, seed=args.seed))
