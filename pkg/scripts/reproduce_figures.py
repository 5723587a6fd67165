"""Regenerate the data behind the experimental figures.

Writes CSV files under --out:
  ratios_m5_N{36,108,479,1845}.csv  50 runs of k = 0..10 at m = 5
  random_k_m23_N{18439,56477}.csv   10 random k in [1, 500] at m = 23
  error_curve_{mean,sum}.csv        analytic p_err over (m, <N_c>)
and prints the thresholds and error probabilities next to the measured rates.

    python3 scripts/reproduce_figures.py --out figures --seed 7
"""

import argparse
import warnings
from pathlib import Path

import numpy as np

from photonqfa.cli import error_curve_rows
from photonqfa.photonic import (
    Convention,
    PhotonExperimentConfig,
    RegimeWarning,
    empirical_error_rate,
    error_probability,
    random_word_lengths,
    records_to_csv,
    run_experiment,
)

SMALL_RUN_MEANS = (36, 108, 479, 1845)
LARGE_RUN_MEANS = (18439, 56477)


def ratio_panels(out: Path, seed: int) -> None:
    for mean in SMALL_RUN_MEANS:
        cfg = PhotonExperimentConfig(m=5, mean_counts=mean, word_lengths=tuple(range(11)),
                                     repetitions=50, rng_seed=seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            records = run_experiment(cfg)
        (out / f"ratios_m5_N{mean}.csv").write_text(records_to_csv(records))
        by_k = {}
        for r in records:
            by_k.setdefault(r.k, []).append(r.ratio)
        spread = " ".join(f"{k}:{np.mean(v):.3f}" for k, v in sorted(by_k.items()))
        print(f"m=5 <N_c>={mean:5d} mean ratio per k  {spread}")


def random_k_panels(out: Path, seed: int, reps: int) -> None:
    ks = random_word_lengths(10, 1, 500, seed)
    print(f"random k: {list(ks)}  (k mod 23: {[k % 23 for k in ks]})")
    for mean in LARGE_RUN_MEANS:
        cfg = PhotonExperimentConfig(m=23, mean_counts=mean, word_lengths=ks, repetitions=reps, rng_seed=seed)
        records = run_experiment(cfg)
        model = error_probability(23, mean)
        (out / f"random_k_m23_N{mean}.csv").write_text(records_to_csv(records))
        hard = [r for r in records if r.k % 23 in (0, 1, 22)]
        print(f"m=23 <N_c>={mean}  N_th={model.n_th:.1f}  p_err={model.p_err:.4f} ({model.convention.value})"
              f"  wrong verdicts {empirical_error_rate(records):.4f} overall,"
              f" {empirical_error_rate(hard) if hard else float('nan'):.4f} on k mod 23 in {{0, +-1}}")


def error_curve(out: Path) -> None:
    means = np.logspace(1, 6, 51).tolist()
    for convention in Convention:
        text = error_curve_rows([5, 10, 15, 23, 30, 40, 50], means, convention)
        (out / f"error_curve_{convention.value}.csv").write_text(text)
    print(f"error curves: {len(means)} points per m, both conventions")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="figures")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--reps", type=int, default=1, help="runs per random-k panel")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ratio_panels(out, args.seed)
    random_k_panels(out, args.seed, args.reps)
    error_curve(out)


if __name__ == "__main__":
    main()
