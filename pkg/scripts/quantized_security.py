"""Check that the discrete quantum mixtures secure the uniform payoff against random opponents."""
import argparse

from qpoker import quantized_analysis as qa
from qpoker import strategic_games as sg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--opponents", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    runs = (("sp", 0), ("sp", 1), ("ns", (0, 1)))
    for name, holder in runs:
        game = sg.builtin_game(name)
        rep = qa.verify_security(game, holder, args.samples, args.opponents, args.seed)
        target = ", ".join(str(t) for t in rep.target)
        print(f"{name} holder={holder}: target ({target}) max z {rep.max_z:.2f} "
              f"{'ok' if rep.passed else 'FAILED'}")
        if rep.single_holder_max_z is not None:
            print(f"  one holder alone: max z {rep.single_holder_max_z:.1f}")


if __name__ == "__main__":
    main()
