"""Show why the controller needs the output front-end.

Without the washout and low-pass stages the Hessian estimate carries a ripple
of amplitude 8 Q*/a^2 at twice the dither frequency. The Riccati filter passes
enough of it to drive gamma through a pole within a fraction of a period.
"""

import argparse

from etes import (Conditioning, Dither, DivergenceError, Gains, MapParams, SimConfig, TriggerConfig,
                  run_full)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-end", type=float, default=20.0)
    args = ap.parse_args()

    p = MapParams(7.0, -0.15, 5.0)
    for label, cond in (("bare", Conditioning.raw()), ("conditioned", Conditioning())):
        cfg = SimConfig(p, Dither(0.1, 3.0), Gains(18.0, 1.0), TriggerConfig(0.9, 1.0),
                        theta_hat0=2.0, gamma0=-0.1, t_end=args.t_end, conditioning=cond)
        try:
            traj, log = run_full(cfg)
            print(f"{label:>12}: ok, theta_hat({traj.t[-1]:.1f}) = {traj.theta_hat[-1]:.4f}, "
                  f"gamma = {traj.gamma[-1]:.4f}, {len(log) - 1} updates")
        except DivergenceError as exc:
            print(f"{label:>12}: {exc}")


if __name__ == "__main__":
    main()
