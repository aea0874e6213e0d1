"""``harmtrack`` command-line entry point.

    harmtrack <command> [--config PATH] [--out DIR] [--seed U64] [--sigma F]
                        [--alpha F] [--iters N] [--mode joint|concentrated]

Commands: generate, spectrum, estimate, track, montecarlo. Flags override
values from the config file. Set HARMTRACK_LOG (DEBUG, INFO, ...) for
log output on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import csvio
from .config import RunConfig, parse_config
from .errors import (
    ConfigError,
    CSVFormatError,
    DivergenceError,
    HarmtrackError,
    InitializationError,
    RankDeficiencyError,
    UnderdeterminedModelError,
)
from .estimation import fit_segment
from .signal_model import ComplexSignal, reference_signal
from .spectral import dft_magnitude, initialize_from_spectrum
from .tracking import segment_signal, track
from .validation import monte_carlo

log = logging.getLogger("harmtrack")

COMMANDS = ("generate", "spectrum", "estimate", "track", "montecarlo")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATION = 3
EXIT_IO = 4
EXIT_MODEL = 5


def _load_signal(cfg: RunConfig, input_path: str | None) -> ComplexSignal:
    if input_path:
        return csvio.read_signal_csv(input_path, cfg.signal.sample_rate)
    signal, _, _ = reference_signal(cfg.noise(), cfg.recipe())
    return signal


def _n_fft(cfg: RunConfig, length: int) -> int:
    return max(cfg.spectral.n_fft, length)


def run_command(command: str, cfg: RunConfig, out_dir: str | Path, input_path: str | None = None) -> int:
    """Execute one command and write its CSV outputs into ``out_dir``.

    Errors propagate; :func:`main` maps them to exit codes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fs = cfg.signal.sample_rate
    structure = cfg.structure()
    f0_search, fc_search = cfg.search_ranges()

    if command == "generate":
        signal, truth, _ = reference_signal(cfg.noise(), cfg.recipe())
        csvio.write_signal_csv(out / "signal.csv", signal)
        csvio.write_params_csv(out / "truth_params.csv", truth, fs)
        log.info("wrote %d samples", len(signal))

    elif command == "spectrum":
        signal = _load_signal(cfg, input_path)
        csvio.write_spectrum_csv(out / "spectrum.csv", dft_magnitude(signal, _n_fft(cfg, len(signal))))

    elif command == "estimate":
        signal = _load_signal(cfg, input_path)
        seg = segment_signal(signal, cfg.tracking.segment_length).segments[0]
        init = initialize_from_spectrum(seg, structure, f0_search, fc_search)
        trace = fit_segment(seg, init, structure, cfg.estimator_config())
        csvio.write_trace_csv(out / "trace.csv", trace.loss_history)
        csvio.write_params_csv(out / "params.csv", trace.final_params, fs)
        log.info("estimate: %d iterations, final loss %.6g", trace.iterations_run, trace.loss_history[-1])

    elif command == "track":
        signal = _load_signal(cfg, input_path)
        result = track(
            signal, cfg.tracking.segment_length, structure, cfg.estimator_config(),
            None, f0_search, fc_search,
        )
        for s, res in enumerate(result.per_segment):
            stem = f"segment{s}"
            csvio.write_params_csv(out / f"{stem}_params.csv", res.params, fs)
            csvio.write_trace_csv(out / f"{stem}_trace.csv", res.trace.loss_history)
            csvio.write_decomposition_csv(out / f"{stem}_decomposition.csv", res.components)
            for name, part in res.components.items():
                spec = dft_magnitude(part, _n_fft(cfg, len(part)))
                csvio.write_spectrum_csv(out / f"{stem}_{name}_spectrum.csv", spec)
            log.info(
                "segment %d: f0=%.6f Hz fc=%.6f Hz loss=%.6g",
                s, res.params.f0_hz(fs), res.params.fc_hz(fs), res.trace.loss_history[-1],
            )

    elif command == "montecarlo":
        mc = cfg.montecarlo
        report = monte_carlo(
            cfg.recipe(), cfg.signal.sigma, mc.n_trials, cfg.estimator_config(), mc.base_seed,
            segment_length=cfg.tracking.segment_length, init=mc.init,
            f0_search=f0_search, fc_search=fc_search, n_jobs=mc.n_jobs,
        )
        csvio.write_montecarlo_csv(out / "montecarlo.csv", report)

    else:
        raise ValueError(f"unknown command {command!r}")
    return EXIT_OK


def _overrides(args) -> dict:
    o: dict = {}
    if args.seed is not None:
        o.setdefault("signal", {})["seed"] = args.seed
        o.setdefault("montecarlo", {})["base_seed"] = args.seed
    if args.sigma is not None:
        o.setdefault("signal", {})["sigma"] = args.sigma
    if args.alpha is not None:
        o.setdefault("estimator", {})["alpha"] = args.alpha
    if args.iters is not None:
        o.setdefault("estimator", {})["max_iters"] = args.iters
    if args.mode is not None:
        o.setdefault("estimator", {})["mode"] = args.mode
    if args.trials is not None:
        o.setdefault("montecarlo", {})["n_trials"] = args.trials
    if args.jobs is not None:
        o.setdefault("montecarlo", {})["n_jobs"] = args.jobs
    return o


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="harmtrack",
        description="Track fundamental/harmonic/interharmonic current components by gradient descent.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML run configuration (defaults used when omitted)")
    p.add_argument("--out", default=".", help="output directory for CSV files")
    p.add_argument("--input", help="signal CSV (index,real,imag) to analyse instead of a synthetic one")
    p.add_argument("--seed", type=int, help="noise seed (also the Monte Carlo base seed)")
    p.add_argument("--sigma", type=float, help="noise standard deviation per real/imag channel")
    p.add_argument("--alpha", type=float, help="learning rate")
    p.add_argument("--iters", type=int, help="maximum iterations per segment")
    p.add_argument("--mode", choices=("joint", "concentrated"))
    p.add_argument("--trials", type=int, help="Monte Carlo trial count")
    p.add_argument("--jobs", type=int, help="Monte Carlo worker processes")
    return p


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("HARMTRACK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, _overrides(args))
        return run_command(args.command, cfg, args.out, args.input)
    except ConfigError as exc:
        print(f"harmtrack: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, InitializationError, RankDeficiencyError, UnderdeterminedModelError) as exc:
        print(f"harmtrack: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (OSError, CSVFormatError) as exc:
        print(f"harmtrack: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HarmtrackError as exc:
        print(f"harmtrack: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
