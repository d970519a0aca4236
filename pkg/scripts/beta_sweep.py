"""Update counts of both schemes, full loop and averaged loop, across trigger weights."""

import argparse

from etes import Dither, Gains, MapParams, SimConfig, TriggerConfig, min_dwell_time, run_average, run_full
from etes.analysis import convergence_time, update_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.2, 0.3, 0.5, 0.7, 1.0])
    ap.add_argument("--t-end", type=float, default=500.0)
    args = ap.parse_args()

    p = MapParams(7.0, -0.15, 5.0)
    print(f"{'beta':>5} {'tau*':>7} | {'newton':>7} {'grad':>5} | {'avg N':>6} {'avg G':>6} | {'t_conv N':>8} {'t_conv G':>8}")
    for beta in args.betas:
        row = []
        for scheme in ("newton", "gradient"):
            cfg = SimConfig(p, Dither(0.1, 3.0), Gains(18.0, 1.0), TriggerConfig(0.9, beta),
                            scheme=scheme, theta_hat0=2.0, gamma0=-0.1, t_end=args.t_end,
                            record_stride=10)
            traj, log = run_full(cfg)
            _, avg_log = run_average(cfg)
            row.append((update_count(log), update_count(avg_log), convergence_time(traj, 5.0, 0.3)))
        tau = min_dwell_time(0.1, 18.0, -0.15, 0.9, beta)
        (n, na, tn), (g, ga, tg) = row
        print(f"{beta:5.2f} {tau:7.4f} | {n:7d} {g:5d} | {na:6d} {ga:6d} | {tn:8.1f} {tg:8.1f}")


if __name__ == "__main__":
    main()
