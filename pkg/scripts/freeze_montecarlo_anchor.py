"""Write the seeded Monte Carlo RMSE table used as a regression anchor.

    python scripts/freeze_montecarlo_anchor.py [--out tests/data/montecarlo_anchor.csv]

Only rerun this on purpose, after a change that is meant to move the numbers.
"""

import argparse
import time

from harmtrack import csvio, monte_carlo

ANCHOR_TRIALS = 200
ANCHOR_SEED = 0
ANCHOR_SIGMA = 0.25


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="tests/data/montecarlo_anchor.csv")
    args = ap.parse_args()
    t0 = time.perf_counter()
    report = monte_carlo(noise_sigma=ANCHOR_SIGMA, n_trials=ANCHOR_TRIALS, base_seed=ANCHOR_SEED)
    csvio.write_montecarlo_csv(args.out, report)
    print(f"wrote {args.out} in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
