"""Sup deviation of the full loop from its average as the dither frequency grows."""

import argparse

from etes import Dither, Gains, MapParams, SimConfig, TriggerConfig, run_average, run_full
from etes.analysis import averaging_deviation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omegas", type=float, nargs="+", default=[3.0, 6.0, 12.0, 24.0])
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--t-end", type=float, default=200.0)
    args = ap.parse_args()

    p = MapParams(7.0, -0.15, 5.0)
    print(f"{'omega':>6} {'sup dev':>9} {'dev*omega':>10}")
    for w in args.omegas:
        cfg = SimConfig(p, Dither(0.1, w), Gains(18.0, 1.0), TriggerConfig(0.9, args.beta),
                        theta_hat0=2.0, gamma0=-0.1, t_end=args.t_end)
        full, _ = run_full(cfg)
        avg, _ = run_average(cfg)
        dev = averaging_deviation(full, avg, (0.0, args.t_end), p.theta_star)
        print(f"{w:6.1f} {dev:9.4f} {dev * w:10.3f}")


if __name__ == "__main__":
    main()
