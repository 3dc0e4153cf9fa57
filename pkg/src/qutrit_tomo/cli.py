"""Command-line interface.

Subcommands: bench, ratio, estimate, region, area, boundary, sample.
Exit codes: 0 success, 1 configuration error, 2 I/O error,
3 more than half of the benchmark trials failed.
"""

import argparse
import json
import sys

import numpy as np

from .bench import ScenarioConfig, emit_region_plot_data, ratio_analysis, run_benchmark
from .estimators import OptimizerOptions, com, ensemble_mse, mse, mvne, random_estimator
from .exceptions import ConfigError, TomographyError
from .measurement import PriorData
from .metrics import region_area
from .region import trace_boundary
from .sampling import SamplerSpec, make_sampler, purity

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_TOO_MANY_FAILURES = 3


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sampler", type=str, default=None,
                   help="hs | eig | puremix | pure | rank2")
    p.add_argument("--purity-band", type=str, default=None, help="lo,hi purity filter")
    p.add_argument("--unmeasured", type=int, choices=(1, 2), default=None)
    p.add_argument("--estimators", type=str, default=None, help="comma-separated tags")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--config", type=str, default=None, help="JSON config file (overrides flags)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qutrit-tomo",
        description="Qutrit incomplete-tomography estimators, regions, and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("bench", help="run the estimator-comparison benchmark")
    _add_common(p_bench)
    p_bench.add_argument("--com-samples", type=int, default=None)
    p_bench.add_argument("--progress", type=int, default=None, help="print every N trials")

    p_ratio = sub.add_parser("ratio", help="distance/sqrt(area) ratio histograms")
    _add_common(p_ratio)
    p_ratio.add_argument("--bins", type=int, default=40)

    p_est = sub.add_parser("estimate", help="run one estimator on a prior-data file")
    p_est.add_argument("prior", type=str, help="prior-data JSON file")
    p_est.add_argument("--method", type=str, default="mvne",
                       choices=("mvne", "mse", "com", "random", "ensemble_mse"))
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--out", type=str, default=None)

    p_region = sub.add_parser("region", help="emit min-eigenvalue grid for plotting")
    p_region.add_argument("prior", type=str)
    p_region.add_argument("--grid-n", type=int, default=200)
    p_region.add_argument("--out", type=str, required=True)

    p_area = sub.add_parser("area", help="Monte Carlo region area")
    p_area.add_argument("prior", type=str)
    p_area.add_argument("--samples", type=int, default=100_000)
    p_area.add_argument("--seed", type=int, default=0)
    p_area.add_argument("--out", type=str, default=None)

    p_bound = sub.add_parser("boundary", help="trace the region boundary to CSV")
    p_bound.add_argument("prior", type=str)
    p_bound.add_argument("--angles", type=int, default=1024)
    p_bound.add_argument("--out", type=str, required=True)

    p_sample = sub.add_parser("sample", help="emit random true states")
    p_sample.add_argument("--sampler", type=str, default="hs")
    p_sample.add_argument("--purity-band", type=str, default=None)
    p_sample.add_argument("--n", type=int, default=10)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", type=str, default=None)

    return parser


def _sampler_spec(kind, purity_band):
    kwargs = {}
    if kind is not None:
        kwargs["kind"] = kind
    if purity_band is not None:
        lo, hi = (float(x) for x in purity_band.split(","))
        kwargs["purity_band"] = (lo, hi)
    return SamplerSpec(**kwargs)


def _scenario_from_args(args):
    cfg = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as err:
            raise IOError(f"cannot read config file: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"bad config JSON: {err}") from err

    spec = _sampler_spec(
        cfg.get("sampler", {}).get("kind", args.sampler) if isinstance(cfg.get("sampler"), dict)
        else cfg.get("sampler", args.sampler),
        args.purity_band,
    )
    if isinstance(cfg.get("sampler"), dict) and cfg["sampler"].get("purity_band"):
        spec = SamplerSpec(kind=spec.kind, purity_band=tuple(cfg["sampler"]["purity_band"]))

    fields = dict(
        seed=cfg.get("seed", args.seed),
        trials=cfg.get("trials", args.trials if args.trials is not None else 10_000),
        sampler=spec,
        unmeasured_count=cfg.get(
            "unmeasured_count", args.unmeasured if args.unmeasured is not None else 1
        ),
        out_dir=cfg.get("out_dir", args.out),
    )
    est = cfg.get("estimators", args.estimators)
    if est is not None:
        fields["estimators"] = tuple(est.split(",")) if isinstance(est, str) else tuple(est)
    elif fields["unmeasured_count"] == 2:
        fields["estimators"] = ("mvne", "mse_mub", "com", "random")
    if "distances" in cfg:
        fields["distances"] = tuple(cfg["distances"])
    for key in ("com_samples", "area_samples", "sample_budget"):
        if key in cfg:
            fields[key] = cfg[key]
    if getattr(args, "com_samples", None) is not None and "com_samples" not in cfg:
        fields["com_samples"] = args.com_samples
    return ScenarioConfig(**fields)


def _cmd_bench(args):
    config = _scenario_from_args(args)
    _, summary = run_benchmark(config, progress=args.progress)
    print(json.dumps(summary, indent=2))
    return EXIT_TOO_MANY_FAILURES if summary["failure_rate"] > 0.5 else EXIT_OK


def _cmd_ratio(args):
    config = _scenario_from_args(args)
    records, histograms = ratio_analysis(config, bins=args.bins)
    failure_rate = 1.0 - sum(r.status == "Ok" for r in records) / max(len(records), 1)
    print(json.dumps({"histograms": histograms, "failure_rate": failure_rate}, indent=2))
    return EXIT_TOO_MANY_FAILURES if failure_rate > 0.5 else EXIT_OK


def _load_prior(path):
    try:
        with open(path) as fh:
            return PriorData.from_json(fh.read())
    except OSError as err:
        raise IOError(f"cannot read prior file: {err}") from err
    except (json.JSONDecodeError, KeyError) as err:
        raise ConfigError(f"bad prior-data file: {err}") from err


def _write_or_print(text, out):
    if out is None:
        print(text)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    except OSError as err:
        raise IOError(f"cannot write {out}: {err}") from err


def _cmd_estimate(args):
    prior = _load_prior(args.prior)
    rng = np.random.default_rng(args.seed)
    opts = OptimizerOptions()
    runners = {
        "mvne": lambda: mvne(prior, opts),
        "mse": lambda: mse(prior, opts=opts),
        "com": lambda: com(prior, rng=rng),
        "random": lambda: random_estimator(prior, rng=rng),
        "ensemble_mse": lambda: ensemble_mse(prior, rng=rng, opts=opts),
    }
    est = runners[args.method]()
    _write_or_print(est.to_json(), args.out)
    return EXIT_OK


def _cmd_region(args):
    prior = _load_prior(args.prior)
    try:
        emit_region_plot_data(prior, args.grid_n, args.out)
    except OSError as err:
        raise IOError(str(err)) from err
    return EXIT_OK


def _cmd_area(args):
    prior = _load_prior(args.prior)
    rng = np.random.default_rng(args.seed)
    result = region_area(prior, n=args.samples, rng=rng)
    _write_or_print(result.to_json(), args.out)
    return EXIT_OK


def _cmd_boundary(args):
    prior = _load_prior(args.prior)
    mesh = trace_boundary(prior, n_angles=args.angles)
    try:
        mesh.to_csv(args.out)
    except OSError as err:
        raise IOError(f"cannot write {args.out}: {err}") from err
    return EXIT_OK


def _cmd_sample(args):
    spec = _sampler_spec(args.sampler, args.purity_band)
    sampler = make_sampler(spec)
    rng = np.random.default_rng(args.seed)
    states = []
    for _ in range(args.n):
        rho = sampler(rng)
        states.append(
            {
                "rho": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
                "purity": purity(rho),
            }
        )
    _write_or_print(json.dumps(states, indent=2), args.out)
    return EXIT_OK


_COMMANDS = {
    "bench": _cmd_bench,
    "ratio": _cmd_ratio,
    "estimate": _cmd_estimate,
    "region": _cmd_region,
    "area": _cmd_area,
    "boundary": _cmd_boundary,
    "sample": _cmd_sample,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (IOError, OSError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except TomographyError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
