"""Compare the closed-form snap-off probability with a Monte Carlo estimate."""
import argparse

import numpy as np

from qpoker import strategic_games as sg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deals", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    p = sg.solve_nash_shapley().p
    exact = sg.snap_off_probability(p)
    est, se = sg.simulate_snap_off(p, args.deals, np.random.default_rng(args.seed))
    print(f"p = {p:.6f}")
    print(f"closed form {exact:.6f}  monte carlo {est:.6f} +- {se:.6f}  z = {(est - exact) / se:+.2f}")


if __name__ == "__main__":
    main()
