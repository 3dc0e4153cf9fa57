"""Benchmark harness: scenario configuration, the per-trial pipeline
(sample a true state, measure, estimate, score), aggregation into summary
tables and ratio histograms, and flat-file output.
"""

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import OptimizerOptions, com, mse, mvne, random_estimator
from .exceptions import ConfigError, DegenerateFutureMeasurement
from .measurement import PriorData
from .metrics import angular_distance, fidelity, hs_distance, region_area, relative_entropy
from .region import membership_batch, min_eig_field_batch, trace_boundary
from .sampling import SamplerSpec, haar_unitary, make_sampler, purity

CSV_HEADER = "trial_id,sampler,true_purity,region_area,estimator,status,d_hs,fidelity,d_relent,d_angular,ratio"

VALID_ESTIMATORS = ("mvne", "mse_mub", "mse_random_basis", "com", "random", "ensemble_mse")
VALID_DISTANCES = ("hs", "fidelity", "relative_entropy", "ratio_sqrt_area")

_OK_STATUSES = {"Converged", "BoundaryOptimum"}


@dataclass(frozen=True)
class ScenarioConfig:
    """One benchmark scenario; every run derives deterministically from `seed`."""

    seed: int = 0
    trials: int = 10_000
    sampler: SamplerSpec = field(default_factory=SamplerSpec)
    unmeasured_count: int = 1
    estimators: tuple = ("mvne", "mse_mub", "mse_random_basis", "com", "random")
    distances: tuple = ("hs", "fidelity", "relative_entropy")
    com_samples: int = 2_000
    area_samples: int = 4_000
    sample_budget: int = 200_000
    out_dir: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.unmeasured_count not in (1, 2):
            raise ConfigError("unmeasured_count must be 1 or 2")
        if not self.estimators:
            raise ConfigError("estimator set must be nonempty")
        for e in self.estimators:
            if e not in VALID_ESTIMATORS:
                raise ConfigError(f"unknown estimator {e!r}")
        for d in self.distances:
            if d not in VALID_DISTANCES:
                raise ConfigError(f"unknown distance {d!r}")
        if self.unmeasured_count == 2 and "mse_random_basis" in self.estimators:
            raise ConfigError("mse_random_basis is only defined for one unmeasured basis")

    def echo(self):
        return {
            "seed": self.seed,
            "trials": self.trials,
            "sampler": {
                "kind": self.sampler.kind,
                "dirichlet_alpha": list(self.sampler.dirichlet_alpha),
                "purity_band": list(self.sampler.purity_band) if self.sampler.purity_band else None,
            },
            "unmeasured_count": self.unmeasured_count,
            "estimators": list(self.estimators),
            "distances": list(self.distances),
            "com_samples": self.com_samples,
            "area_samples": self.area_samples,
            "sample_budget": self.sample_budget,
        }


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one benchmark trial (one row per estimator in the CSV)."""

    trial_id: int
    sampler_tag: str
    true_purity: float
    region_area: float  # nan when not computed
    results: dict  # estimator tag -> dict of status + distance columns
    status: str  # Ok | AllNaN

    def csv_rows(self):
        rows = []
        for tag, r in self.results.items():
            rows.append(
                f"{self.trial_id},{self.sampler_tag},{self.true_purity:.12g},"
                f"{self.region_area:.12g},{tag},{r['status']},"
                f"{r['d_hs']:.12g},{r['fidelity']:.12g},{r['d_relent']:.12g},"
                f"{r['d_angular']:.12g},{r['ratio']:.12g}"
            )
        return rows


def _trial_rng(seed, trial_id):
    return np.random.default_rng(np.random.SeedSequence((seed, trial_id)))


def _run_stream(seed):
    """Stream for run-level draws (e.g. the fixed non-optimal measurement basis)."""
    return np.random.default_rng(np.random.SeedSequence((seed, 0xFACE)))


def fixed_random_basis(seed):
    """The benchmark's fixed Haar future basis, a pure function of the seed."""
    return haar_unitary(_run_stream(seed))


def _run_estimator(tag, prior, cfg, rng, fixed_basis, opts):
    if tag == "mvne":
        return mvne(prior, opts)
    if tag == "mse_mub":
        return mse(prior, opts=opts, method_tag="mse_mub")
    if tag == "mse_random_basis":
        try:
            return mse(prior, future=[fixed_basis], opts=opts, method_tag="mse_random_basis")
        except DegenerateFutureMeasurement:
            from .estimators import _failed

            return _failed("mse_random_basis", prior)
    if tag == "com":
        return com(prior, n_samples=cfg.com_samples, rng=rng, budget=cfg.sample_budget)
    if tag == "random":
        return random_estimator(prior, rng=rng, budget=cfg.sample_budget)
    if tag == "ensemble_mse":
        from .estimators import ensemble_mse
        from .exceptions import EnsembleTooSmall

        try:
            return ensemble_mse(prior, n_bases=20, rng=rng, opts=opts)
        except EnsembleTooSmall:
            from .estimators import _failed

            return _failed("ensemble_mse", prior)
    raise ConfigError(f"unknown estimator {tag!r}")


def run_trial(config, trial_id, fixed_basis=None, opts=None):
    """One full sample-measure-estimate-score trial, deterministic in (seed, id)."""
    rng = _trial_rng(config.seed, trial_id)
    sampler = make_sampler(config.sampler)
    rho_true = sampler(rng)
    unmeasured = tuple(range(config.unmeasured_count))
    prior = PriorData.from_state(rho_true, unmeasured)
    true_point = prior.born_unmeasured(rho_true)

    if fixed_basis is None and "mse_random_basis" in config.estimators:
        fixed_basis = fixed_random_basis(config.seed)
    opts = opts or OptimizerOptions()

    want_ratio = "ratio_sqrt_area" in config.distances
    area = np.nan
    if want_ratio:
        area = region_area(prior, n=max(config.area_samples, 1000), rng=rng).area

    estimates = {}
    any_failed = False
    for tag in config.estimators:
        est = _run_estimator(tag, prior, config, rng, fixed_basis, opts)
        estimates[tag] = est
        if est.status not in _OK_STATUSES:
            any_failed = True

    results = {}
    for tag, est in estimates.items():
        if any_failed:
            results[tag] = {
                "status": est.status if est.status not in _OK_STATUSES else "Invalidated",
                "d_hs": np.nan, "fidelity": np.nan, "d_relent": np.nan,
                "d_angular": np.nan, "ratio": np.nan,
            }
            continue
        d_ang = angular_distance(true_point, est.point)
        results[tag] = {
            "status": est.status,
            "d_hs": hs_distance(rho_true, est.rho),
            "fidelity": fidelity(rho_true, est.rho),
            "d_relent": relative_entropy(rho_true, est.rho),
            "d_angular": d_ang,
            "ratio": d_ang / np.sqrt(area) if want_ratio and area > 0 else np.nan,
        }

    return TrialRecord(
        trial_id=trial_id,
        sampler_tag=config.sampler.kind,
        true_purity=purity(rho_true),
        region_area=area,
        results=results,
        status="AllNaN" if any_failed else "Ok",
    )


_DISTANCE_COLUMNS = {
    "hs": "d_hs",
    "fidelity": "fidelity",
    "relative_entropy": "d_relent",
    "angular": "d_angular",
    "ratio_sqrt_area": "ratio",
}


def summarize(records, config):
    """Aggregate per-trial records into per-estimator distance statistics."""
    valid = [r for r in records if r.status == "Ok"]
    n_total = len(records)
    summary = {"estimators": {}, "failure_rate": 1.0 - len(valid) / max(n_total, 1)}
    for tag in config.estimators:
        per_dist = {}
        for dist in config.distances:
            col = _DISTANCE_COLUMNS[dist]
            vals = np.array([r.results[tag][col] for r in valid], dtype=float)
            vals = vals[np.isfinite(vals)]
            n = vals.size
            per_dist[dist] = {
                "mean": float(vals.mean()) if n else float("nan"),
                "stderr": float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"),
                "n": int(n),
            }
        summary["estimators"][tag] = per_dist
    return summary


def run_benchmark(config, progress=None):
    """Run all trials, optionally write CSV + summary JSON, return both."""
    t0 = time.time()
    fixed_basis = (
        fixed_random_basis(config.seed) if "mse_random_basis" in config.estimators else None
    )
    opts = OptimizerOptions()
    records = []
    for i in range(config.trials):
        records.append(run_trial(config, i, fixed_basis=fixed_basis, opts=opts))
        if progress and (i + 1) % progress == 0:
            print(f"  trial {i + 1}/{config.trials}", flush=True)
    summary = summarize(records, config)
    summary["config"] = config.echo()
    summary["wall_time_seconds"] = time.time() - t0

    if config.out_dir is not None:
        write_outputs(records, summary, config.out_dir)
    return records, summary


def write_outputs(records, summary, out_dir):
    import os

    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "trials.csv"), "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in records:
                for row in r.csv_rows():
                    fh.write(row + "\n")
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2)
    except OSError as err:
        raise IOError(f"cannot write benchmark outputs to {out_dir}: {err}") from err


def ratio_analysis(config, bins=40, bin_range=(0.0, 2.0)):
    """Distance/sqrt(area) ratio histograms per estimator.

    Returns (records, histograms) where histograms maps estimator tag to
    {edges, counts, mode}; the mode is the center of the fullest bin.
    """
    if "ratio_sqrt_area" not in config.distances:
        config = replace(config, distances=tuple(config.distances) + ("ratio_sqrt_area",))
    records, summary = run_benchmark(config)
    edges = np.linspace(bin_range[0], bin_range[1], bins + 1)
    histograms = {}
    valid = [r for r in records if r.status == "Ok"]
    for tag in config.estimators:
        vals = np.array([r.results[tag]["ratio"] for r in valid], dtype=float)
        vals = vals[np.isfinite(vals)]
        counts, _ = np.histogram(vals, bins=edges)
        mode_bin = int(np.argmax(counts)) if counts.sum() else 0
        histograms[tag] = {
            "edges": edges.tolist(),
            "counts": counts.tolist(),
            "mode": float(0.5 * (edges[mode_bin] + edges[mode_bin + 1])),
            "n": int(counts.sum()),
        }
    if config.out_dir is not None:
        import os

        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "ratio_histograms.json"), "w") as fh:
            json.dump({"histograms": histograms, "summary": summary}, fh, indent=2)
    return records, histograms


def emit_region_plot_data(prior, grid_n, out_path, boundary_angles=512):
    """Barycentric grid of the minimum-eigenvalue field plus the boundary mesh.

    Writes `(p1,p2,p3,min_eig,det,feasible)` rows to out_path and the traced
    boundary to a `_boundary.csv` sibling.  Requires one unmeasured basis.
    """
    if prior.m != 1:
        raise ValueError("region plot data needs exactly one unmeasured basis")
    pts = []
    for i in range(grid_n):
        for j in range(grid_n - i):
            p1 = i / max(grid_n - 1, 1)
            p2 = j / max(grid_n - 1, 1)
            pts.append((p1, p2, 1.0 - p1 - p2))
    P = np.asarray(pts)
    rho = prior.rho_of_p_batch(P)
    eigs = min_eig_field_batch(P, prior)
    dets = np.real(np.linalg.det(rho))
    feas = membership_batch(P, prior)
    data = np.column_stack([P, eigs, dets, feas.astype(float)])
    header = "p1,p2,p3,min_eig,det,feasible"
    np.savetxt(out_path, data, delimiter=",", header=header, comments="")

    mesh = trace_boundary(prior, n_angles=boundary_angles)
    boundary_path = str(out_path)
    boundary_path = (
        boundary_path[:-4] + "_boundary.csv" if boundary_path.endswith(".csv")
        else boundary_path + "_boundary.csv"
    )
    mesh.to_csv(boundary_path)
    return out_path, boundary_path
