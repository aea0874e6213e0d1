"""Regenerate the plot data for the reference current and its decomposition.

    python scripts/reproduce_figures.py [--out results/figures] [--png]

Writes CSVs for: the reference spectrum (clean and noisy), the convergence
trace of one segment, per-segment tracked parameters, and the spectrum of
every component of every segment. With --png (needs matplotlib) a few
summary plots are drawn from the same data.
"""

import argparse
from pathlib import Path

import numpy as np

from harmtrack import (
    EstimatorConfig,
    Mode,
    NoiseSpec,
    csvio,
    dft_magnitude,
    fit_segment,
    initialize_from_spectrum,
    reference_signal,
    segment_signal,
    track,
)

M = 250


def build(out: Path, sigma: float, seed: int) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    clean, truth, structure = reference_signal(NoiseSpec(0.0, seed))
    noisy, _, _ = reference_signal(NoiseSpec(sigma, seed))
    fs = clean.sample_rate

    spectra = {"clean": dft_magnitude(clean), "noisy": dft_magnitude(noisy)}
    for name, spec in spectra.items():
        csvio.write_spectrum_csv(out / f"reference_spectrum_{name}.csv", spec)

    # convergence of the joint descent from spectral frequencies and zero phasors
    seg0 = segment_signal(noisy, M).segments[0]
    init = initialize_from_spectrum(seg0, structure)
    cold = init.replace(phasors={k: 0j for k in structure.keys()})
    traces = {
        "joint": fit_segment(seg0, cold, structure, EstimatorConfig(mode=Mode.JOINT)).loss_history,
        "concentrated": fit_segment(seg0, init, structure, EstimatorConfig()).loss_history,
    }
    for name, h in traces.items():
        csvio.write_trace_csv(out / f"convergence_{name}.csv", h)

    result = track(noisy, M, structure)
    for s, res in enumerate(result.per_segment):
        csvio.write_params_csv(out / f"segment{s}_params.csv", res.params, fs)
        csvio.write_decomposition_csv(out / f"segment{s}_decomposition.csv", res.components)
        for name, part in res.components.items():
            csvio.write_spectrum_csv(out / f"segment{s}_{name}_spectrum.csv", dft_magnitude(part, 4 * M))
    csvio.write_params_csv(out / "truth_params.csv", truth, fs)
    return {"spectra": spectra, "traces": traces, "result": result}


def plot(out: Path, data: dict) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    for ax, (name, spec) in zip(axes, data["spectra"].items()):
        ax.plot(spec.bin_frequencies, spec.magnitudes, lw=0.8)
        ax.set_title(f"{name} reference current")
        ax.set_ylabel("|X(f)| / N")
    axes[-1].set_xlabel("frequency (Hz)")
    axes[-1].set_xlim(-50, 300)
    fig.tight_layout()
    fig.savefig(out / "reference_spectrum.png", dpi=120)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, h in data["traces"].items():
        ax.semilogy(np.arange(1, len(h) + 1), h, label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "convergence.png", dpi=120)

    res = data["result"].per_segment[0]
    fig, axes = plt.subplots(4, 1, figsize=(8, 8), sharex=True)
    for ax, (name, part) in zip(axes, res.components.items()):
        spec = dft_magnitude(part, 4 * M)
        ax.plot(spec.bin_frequencies, spec.magnitudes, lw=0.8)
        ax.set_title(name)
    axes[-1].set_xlabel("frequency (Hz)")
    axes[-1].set_xlim(-50, 300)
    fig.tight_layout()
    fig.savefig(out / "segment0_components.png", dpi=120)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/figures")
    ap.add_argument("--sigma", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--png", action="store_true", help="also draw PNGs (requires matplotlib)")
    args = ap.parse_args()
    out = Path(args.out)
    data = build(out, args.sigma, args.seed)
    if args.png:
        plot(out, data)
    for s, res in enumerate(data["result"].per_segment):
        p = res.params
        print(f"segment {s}: f0 = {p.f0_hz(1000.0):.4f} Hz, fc = {p.fc_hz(1000.0):.4f} Hz, "
              f"iterations = {res.trace.iterations_run}")
    print(f"outputs in {out}/")


if __name__ == "__main__":
    main()
