"""Command line pipeline around the library.

Subcommands: ``synth`` corrupts a clean PGM with synthetic speckle,
``denoise`` runs one filter over a PGM, ``eval`` scores a denoised
image against its reference, and ``bench`` times a filter.

Exit codes: 0 success, 2 usage or parameter problems (including a
missing input file), 1 runtime failures (parse errors, numeric
blowups, I/O). Every run echoes its fully resolved configuration to
standard error before doing any work, so logs capture the effective
parameters. The default worker cap for the non-local filters comes
from the DESPECKLE_THREADS environment variable when --threads is not
given; 0 means one worker per CPU.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .baselines import FrostParams, LeeParams, SradParams, frost_filter, lee_filter, srad
from .errors import DomainError, NumericError, ParameterError, PgmParseError
from .image import GrayImage
from .metrics import CSV_HEADER, SsimParams, evaluate
from .nlm import NlmParams, RobustNlmParams, nlm_denoise, robust_nlm_denoise
from .noise import SpeckleParams, add_multiplicative_speckle, estimate_noise_sigma, exp_expand, log_compress
from .pgm import load_pgm, save_pgm

THREADS_ENV_VAR = "DESPECKLE_THREADS"
H2_CAP = 1e12
H1_FLOOR = 1e-6

FILTER_CHOICES = ("nlm", "robust-nlm", "lee", "frost", "srad")
MODEL_CHOICES = {"mult-gauss": "multiplicative_gaussian", "rayleigh": "rayleigh"}


@dataclass(frozen=True)
class JobConfig:
    """Resolved invocation of one subcommand.

    Optional fields hold None when the flag was not given; resolution
    to effective values happens in the runners and is echoed to stderr.
    """

    command: str
    input_path: str | None = None
    output_path: str | None = None
    reference_path: str | None = None
    test_path: str | None = None
    filter: str = "robust-nlm"
    domain: str | None = None
    epsilon: float = 1.0
    model: str = "mult-gauss"
    sigma: float = 0.2
    seed: int = 0
    maxval: int = 255
    search_radius: int = 10
    patch_radius: int = 3
    sigma_s: float | None = None
    h: float | None = None
    h2: float | None = None
    prefilter_sigma: float = 1.5
    sigma_n: float | None = None
    self_weight: str = "natural"
    window_radius: int = 2
    noise_sigma: float | None = None
    damping: float = 1.0
    iterations: int = 100
    dt: float = 0.05
    q0: float = 1.0
    rho: float = 1.0
    threads: int | None = None
    report_path: str | None = None
    image_id: str | None = None
    filter_name: str = "-"
    peak: float = 255.0
    repeats: int = 3


def _echo(pairs: dict) -> None:
    text = " ".join(f"{key}={value}" for key, value in pairs.items())
    print(f"resolved-config: {text}", file=sys.stderr)


def _fmt(value: float) -> str:
    return f"{value:g}"


def _resolve_threads(config: JobConfig) -> int:
    if config.threads is not None:
        requested = config.threads
    else:
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw is None or raw.strip() == "":
            requested = 0
        else:
            try:
                requested = int(raw)
            except ValueError:
                raise ParameterError(
                    f"{THREADS_ENV_VAR} must be an integer, got {raw!r}"
                ) from None
    if requested < 0:
        raise ParameterError(f"--threads must be >= 0 (0 = auto), got {requested}")
    return requested


def _prepare_filter(config: JobConfig, work: GrayImage, threads: int):
    """Resolve filter parameters against the working-domain image.

    Returns (run, echo) where run maps GrayImage -> GrayImage and echo
    is the dict of effective parameters for the stderr line.
    """
    name = config.filter
    echo: dict = {"filter": name}

    if name in ("nlm", "robust-nlm"):
        if config.sigma_n is not None:
            if not (math.isfinite(config.sigma_n) and config.sigma_n >= 0):
                raise ParameterError(f"--sigma-n must be a non-negative finite real, got {config.sigma_n}")
            sigma_n = float(config.sigma_n)
        else:
            sigma_n = estimate_noise_sigma(work).sigma_n
        h1 = float(config.h) if config.h is not None else max(9.0 * sigma_n, H1_FLOOR)
        self_weight = config.self_weight.replace("-", "_")
        base = NlmParams(h=h1, search_radius=config.search_radius,
                         patch_radius=config.patch_radius, sigma_s=config.sigma_s,
                         self_weight=self_weight)
        side = 2 * base.search_radius + 1
        patch_side = 2 * base.patch_radius + 1
        echo.update({
            "search_window": f"{side}x{side}",
            "patch_window": f"{patch_side}x{patch_side}",
            "sigma_s": _fmt(base.sigma_s),
            "self_weight": base.self_weight,
            "sigma_n": _fmt(sigma_n),
            "threads": threads,
        })
        if name == "nlm":
            echo["h"] = _fmt(base.h)
            return (lambda image: nlm_denoise(image, base, threads=threads)), echo
        if config.h2 is not None:
            h2 = float(config.h2)
        elif sigma_n < 1e-6:
            h2 = H2_CAP
        else:
            h2 = min(148.0 / sigma_n, H2_CAP)
        params = RobustNlmParams(base=base, h2=h2, prefilter_sigma=config.prefilter_sigma)
        echo.update({"h1": _fmt(base.h), "h2": _fmt(h2),
                     "prefilter_sigma": _fmt(params.prefilter_sigma)})
        return (lambda image: robust_nlm_denoise(image, params, threads=threads)), echo

    if name == "lee":
        if config.noise_sigma is not None:
            noise_sigma = float(config.noise_sigma)
        else:
            est = estimate_noise_sigma(work).sigma_n
            mean = float(work.pixels.mean())
            noise_sigma = est / mean if mean > 0 else 0.0
        params = LeeParams(window_radius=config.window_radius, noise_sigma=noise_sigma)
        side = 2 * params.window_radius + 1
        echo.update({"window": f"{side}x{side}", "noise_sigma": _fmt(params.noise_sigma)})
        return (lambda image: lee_filter(image, params)), echo

    if name == "frost":
        params = FrostParams(window_radius=config.window_radius, damping=config.damping)
        side = 2 * params.window_radius + 1
        echo.update({"window": f"{side}x{side}", "damping": _fmt(params.damping)})
        return (lambda image: frost_filter(image, params)), echo

    # srad: the diffusion needs strictly positive pixels; PGM inputs may
    # contain zeros, so shift up before and back down after.
    params = SradParams(iterations=config.iterations, dt=config.dt,
                        q0=config.q0, rho=config.rho)
    lo = float(work.pixels.min())
    shift = (1e-6 - lo) if lo <= 0.0 else 0.0
    echo.update({"iterations": params.iterations, "dt": _fmt(params.dt),
                 "q0": _fmt(params.q0), "rho": _fmt(params.rho),
                 "positivity_shift": _fmt(shift)})

    def run(image: GrayImage) -> GrayImage:
        if shift == 0.0:
            return srad(image, params)
        lifted = srad(GrayImage(image.pixels + shift), params)
        return GrayImage(lifted.pixels - shift)

    return run, echo


def run_synth(config: JobConfig) -> int:
    img = load_pgm(config.input_path)
    params = SpeckleParams(model=MODEL_CHOICES[config.model], sigma=config.sigma,
                           seed=config.seed)
    _echo({"command": "synth", "input": config.input_path, "output": config.output_path,
           "model": config.model, "sigma": _fmt(params.sigma), "seed": params.seed,
           "maxval": config.maxval})
    noisy = add_multiplicative_speckle(img, params)
    save_pgm(noisy, config.output_path, maxval=config.maxval)
    sidecar = str(config.output_path) + ".noise.txt"
    Path(sidecar).write_text(
        f"model={config.model}\nsigma={_fmt(params.sigma)}\nseed={params.seed}\n",
        encoding="ascii",
    )
    return 0


def run_denoise(config: JobConfig) -> int:
    img = load_pgm(config.input_path)
    domain = config.domain or ("log" if config.filter == "robust-nlm" else "linear")
    if not (math.isfinite(config.epsilon) and config.epsilon > 0):
        raise ParameterError(f"--epsilon must be a positive finite real, got {config.epsilon}")
    work = log_compress(img, config.epsilon) if domain == "log" else img
    threads = _resolve_threads(config)
    run, filter_echo = _prepare_filter(config, work, threads)
    echo = {"command": "denoise", "input": config.input_path, "output": config.output_path,
            "domain": domain, "epsilon": _fmt(config.epsilon), "maxval": config.maxval}
    echo.update(filter_echo)
    _echo(echo)
    filtered = run(work)
    out = exp_expand(filtered, config.epsilon) if domain == "log" else filtered
    save_pgm(out, config.output_path, maxval=config.maxval)
    return 0


def run_eval(config: JobConfig) -> int:
    reference = load_pgm(config.reference_path)
    test = load_pgm(config.test_path)
    image_id = config.image_id if config.image_id is not None else Path(config.test_path).stem
    _echo({"command": "eval", "reference": config.reference_path, "test": config.test_path,
           "image_id": image_id, "filter_name": config.filter_name,
           "peak": _fmt(config.peak),
           "report": config.report_path if config.report_path else "-"})
    report = evaluate(reference, test, peak=config.peak, ssim_params=SsimParams())
    row = report.csv_row(image_id, config.filter_name)
    print(row)
    if config.report_path:
        path = Path(config.report_path)
        fresh = not path.exists() or path.stat().st_size == 0
        with path.open("a", encoding="ascii") as handle:
            if fresh:
                handle.write(CSV_HEADER + "\n")
            handle.write(row + "\n")
    return 0


def run_bench(config: JobConfig) -> int:
    if config.repeats < 1:
        raise ParameterError(f"--repeats must be >= 1, got {config.repeats}")
    img = load_pgm(config.input_path)
    domain = config.domain or ("log" if config.filter == "robust-nlm" else "linear")
    work = log_compress(img, config.epsilon) if domain == "log" else img
    threads = _resolve_threads(config)
    run, filter_echo = _prepare_filter(config, work, threads)
    echo = {"command": "bench", "input": config.input_path, "domain": domain,
            "repeats": config.repeats}
    echo.update(filter_echo)
    _echo(echo)
    times = []
    digests = []
    for _ in range(config.repeats):
        start = time.perf_counter()
        out = run(work)
        times.append(time.perf_counter() - start)
        digests.append(hashlib.sha256(out.pixels.tobytes()).hexdigest())
    if len(set(digests)) != 1:
        raise NumericError("filter outputs differ across bench repeats")
    best = min(times)
    med = statistics.median(times)
    pixels = img.height * img.width
    rate = pixels / best if best > 0 else math.inf
    print(f"bench: filter={config.filter} repeats={config.repeats} threads={threads} "
          f"pixels={pixels} min_s={best:.6f} median_s={med:.6f} "
          f"pixels_per_second={rate:.0f} checksum={digests[0]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="despeckle",
        description="Speckle denoising pipeline: synthesize noise, filter, score, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    filter_args = argparse.ArgumentParser(add_help=False)
    filter_args.add_argument("--filter", choices=FILTER_CHOICES, default="robust-nlm")
    filter_args.add_argument("--domain", choices=("linear", "log"), default=None,
                             help="filtering domain; default log for robust-nlm, linear otherwise")
    filter_args.add_argument("--epsilon", type=float, default=1.0,
                             help="offset used by the log transform (default 1.0)")
    filter_args.add_argument("--search-radius", type=int, default=10)
    filter_args.add_argument("--patch-radius", type=int, default=3)
    filter_args.add_argument("--sigma-s", type=float, default=None,
                             help="patch kernel sigma; default patch_radius / 2")
    filter_args.add_argument("--h", type=float, default=None,
                             help="similarity decay (h1 for robust-nlm); default 9 * sigma_n")
    filter_args.add_argument("--h2", type=float, default=None,
                             help="corruption decay for robust-nlm; default 148 / sigma_n, capped at 1e12")
    filter_args.add_argument("--prefilter-sigma", type=float, default=1.5)
    filter_args.add_argument("--sigma-n", type=float, default=None,
                             help="noise level override; skips blind estimation")
    filter_args.add_argument("--self-weight", choices=("natural", "max-neighbor"),
                             default="natural")
    filter_args.add_argument("--window-radius", type=int, default=2,
                             help="lee/frost window radius")
    filter_args.add_argument("--noise-sigma", type=float, default=None,
                             help="lee noise coefficient of variation; default sigma_n / mean")
    filter_args.add_argument("--damping", type=float, default=1.0, help="frost damping K")
    filter_args.add_argument("--iterations", type=int, default=100, help="srad iterations")
    filter_args.add_argument("--dt", type=float, default=0.05, help="srad time step")
    filter_args.add_argument("--q0", type=float, default=1.0, help="srad initial speckle scale")
    filter_args.add_argument("--rho", type=float, default=1.0, help="srad q0 decay rate")
    filter_args.add_argument("--threads", type=int, default=None,
                             help=f"worker cap for nlm filters; 0 = auto; default from {THREADS_ENV_VAR}")

    synth = sub.add_parser("synth", help="corrupt a clean PGM with synthetic speckle")
    synth.add_argument("input")
    synth.add_argument("output")
    synth.add_argument("--model", choices=tuple(MODEL_CHOICES), default="mult-gauss")
    synth.add_argument("--sigma", type=float, default=0.2)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--maxval", type=int, choices=(255, 65535), default=255)

    denoise = sub.add_parser("denoise", parents=[filter_args], help="run one filter over a PGM")
    denoise.add_argument("input")
    denoise.add_argument("output")
    denoise.add_argument("--maxval", type=int, choices=(255, 65535), default=255)

    evaluate_cmd = sub.add_parser("eval", help="score a denoised image against its reference")
    evaluate_cmd.add_argument("reference")
    evaluate_cmd.add_argument("test")
    evaluate_cmd.add_argument("--report", default=None,
                              help="CSV file to append the row to (header written when new)")
    evaluate_cmd.add_argument("--image-id", default=None,
                              help="identifier column; default: test file stem")
    evaluate_cmd.add_argument("--filter-name", default="-")
    evaluate_cmd.add_argument("--peak", type=float, default=255.0)

    bench = sub.add_parser("bench", parents=[filter_args], help="time a filter on one input")
    bench.add_argument("input")
    bench.add_argument("--repeats", type=int, default=3)

    return parser


def _config_from_args(args: argparse.Namespace) -> JobConfig:
    if args.command == "synth":
        return JobConfig(command="synth", input_path=args.input, output_path=args.output,
                         model=args.model, sigma=args.sigma, seed=args.seed,
                         maxval=args.maxval)
    if args.command == "denoise":
        return JobConfig(command="denoise", input_path=args.input, output_path=args.output,
                         filter=args.filter, domain=args.domain, epsilon=args.epsilon,
                         search_radius=args.search_radius, patch_radius=args.patch_radius,
                         sigma_s=args.sigma_s, h=args.h, h2=args.h2,
                         prefilter_sigma=args.prefilter_sigma, sigma_n=args.sigma_n,
                         self_weight=args.self_weight, window_radius=args.window_radius,
                         noise_sigma=args.noise_sigma, damping=args.damping,
                         iterations=args.iterations, dt=args.dt, q0=args.q0, rho=args.rho,
                         threads=args.threads, maxval=args.maxval)
    if args.command == "eval":
        return JobConfig(command="eval", reference_path=args.reference, test_path=args.test,
                         report_path=args.report, image_id=args.image_id,
                         filter_name=args.filter_name, peak=args.peak)
    return JobConfig(command="bench", input_path=args.input, filter=args.filter,
                     domain=args.domain, epsilon=args.epsilon,
                     search_radius=args.search_radius, patch_radius=args.patch_radius,
                     sigma_s=args.sigma_s, h=args.h, h2=args.h2,
                     prefilter_sigma=args.prefilter_sigma, sigma_n=args.sigma_n,
                     self_weight=args.self_weight, window_radius=args.window_radius,
                     noise_sigma=args.noise_sigma, damping=args.damping,
                     iterations=args.iterations, dt=args.dt, q0=args.q0, rho=args.rho,
                     threads=args.threads, repeats=args.repeats)


_RUNNERS = {"synth": run_synth, "denoise": run_denoise, "eval": run_eval, "bench": run_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors (exit 2) and --help (exit 0)
        return int(exc.code or 0)
    config = _config_from_args(args)
    try:
        return _RUNNERS[config.command](config)
    except FileNotFoundError as exc:
        missing = exc.filename if exc.filename else exc
        print(f"error: missing input file: {missing}", file=sys.stderr)
        return 2
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PgmParseError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
