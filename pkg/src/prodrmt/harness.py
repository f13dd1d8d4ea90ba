"""Experiment orchestration: configs, reports, artifacts.

Validates JSON experiment configurations, runs sampling campaigns and
exact-formula evaluations, compares Monte Carlo histograms against
closed forms with per-bin z-scores, and writes CSV/JSON/figure
artifacts atomically.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile

import jsonschema
import numpy as np

from . import asymptotics as _asy
from . import ensembles as _ens
from . import exact_ev as _ev
from . import exact_sv as _sv
from . import exponents as _ex
from .specfun import DomainError

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_STATISTICAL = 3

MODES = (
    "sample",
    "exact-density",
    "hole",
    "sv-density",
    "kernel",
    "converge",
    "lyapunov",
    "stability",
    "verify",
)

_SAMPLING_MODES = {"sample", "hole", "lyapunov", "stability", "verify"}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["mode"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "spec": {
            "type": "object",
            "additionalProperties": False,
            "required": ["beta", "n", "factors"],
            "properties": {
                "beta": {"enum": [1, 2, 4]},
                "n": {"type": "integer", "minimum": 1},
                "factors": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind"],
                        "properties": {
                            "kind": {"type": "string"},
                            "offset": {"type": "integer", "minimum": 0},
                            "truncation": {"type": ["integer", "null"]},
                        },
                    },
                },
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "points": {"type": "integer", "minimum": 2},
            },
        },
        "n_steps": {"type": "integer", "minimum": 1},
        "replicas": {"type": "integer", "minimum": 2},
        "converge_edge": {"enum": ["origin", "hard-edge"]},
        "n_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "z_max": {"type": "number", "exclusiveMinimum": 0},
                "min_expected": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


@dataclasses.dataclass
class ExperimentConfig:
    """A validated experiment description."""

    mode: str
    spec: object = None
    seed: int = None
    samples: int = 20000
    out: str = "."
    radius: float = 0.5
    grid: dict = None
    n_steps: int = 1000
    replicas: int = 50
    converge_edge: str = "origin"
    n_values: tuple = (16, 32, 64)
    z_max: float = 3.0
    min_expected: float = 30.0

    @classmethod
    def from_dict(cls, raw):
        """Validate a raw mapping and build a config.

        Raises
        ------
        jsonschema.ValidationError
            On schema violations, including unknown fields.
        ValueError
            When a sampling mode lacks a seed.
        """
        jsonschema.validate(raw, CONFIG_SCHEMA)
        mode = raw["mode"]
        if mode in _SAMPLING_MODES and "seed" not in raw:
            raise ValueError("mode %r requires a seed" % mode)
        kwargs = {"mode": mode}
        if "spec" in raw:
            kwargs["spec"] = _ens.ProductSpec.from_json_dict(raw["spec"])
        for key in ("seed", "samples", "out", "radius", "grid", "n_steps",
                    "replicas", "converge_edge"):
            if key in raw:
                kwargs[key] = raw[key]
        if "n_values" in raw:
            kwargs["n_values"] = tuple(raw["n_values"])
        tol = raw.get("tolerances", {})
        if "z_max" in tol:
            kwargs["z_max"] = tol["z_max"]
        if "min_expected" in tol:
            kwargs["min_expected"] = tol["min_expected"]
        return cls(**kwargs)


def load_config(path):
    """Read and validate a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def worker_count():
    """Worker pool size, capped by the RMT_THREADS environment variable."""
    cap = os.environ.get("RMT_THREADS")
    cores = os.cpu_count() or 1
    if cap:
        return max(1, min(cores, int(cap)))
    return cores


def _atomic_write(path, data):
    """Write bytes or text to path via a temp file and rename."""
    mode = "wb" if isinstance(data, bytes) else "w"
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    """Stable-key-order UTF-8 JSON artifact."""
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path, header, columns):
    """Comma-separated artifact with 17 significant digits."""
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join("%.17g" % float(v) for v in row))
    _atomic_write(path, "\n".join(rows) + "\n")


def _figure(path, draw):
    """Render a matplotlib figure to path via the Agg backend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def histogram(samples, n_bins=None, range_=None):
    """Density-normalized histogram with per-bin standard errors.

    Parameters
    ----------
    samples : array_like
        At least 1000 draws.
    n_bins : int, optional
        Defaults to sqrt(len(samples)) capped at 200.
    range_ : (float, float), optional

    Returns
    -------
    dict
        {edges, density, standard_errors, counts, n_samples}
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 1000:
        raise DomainError("need at least 1000 samples")
    if range_ is not None and range_[1] <= range_[0]:
        raise DomainError("empty histogram range")
    if n_bins is None:
        n_bins = min(200, int(math.sqrt(samples.size)))
    counts, edges = np.histogram(samples, bins=n_bins, range=range_)
    widths = np.diff(edges)
    n = samples.size
    p = counts / n
    density = p / widths
    se = np.sqrt(p * (1.0 - p) / n) / widths
    return {
        "edges": edges,
        "density": density,
        "standard_errors": se,
        "counts": counts,
        "n_samples": n,
    }


def compare_counts(observed, expected, n_samples, z_max=3.0, min_expected=30.0):
    """Per-bin z-score comparison of observed vs expected bin counts.

    Returns
    -------
    dict
        {z_scores, sup_z, verdict, expected, observed} where verdict is
        "pass" iff every bin has expected >= min_expected and |z| <=
        z_max.
    """
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    p = expected / n_samples
    sd = np.sqrt(np.maximum(expected * (1.0 - p), 1e-300))
    z = (observed - expected) / sd
    ok = bool(np.all(expected >= min_expected) and np.max(np.abs(z)) <= z_max)
    return {
        "z_scores": z,
        "sup_z": float(np.max(np.abs(z))),
        "verdict": "pass" if ok else "fail",
        "expected": expected,
        "observed": observed,
    }


def equal_mass_edges(model, n_bins, n_samples, min_expected=30.0, r_max=None):
    """Radial bin edges with equal exact expected counts per bin.

    Uses the exact radial CDF of the eigenvalue model; the outermost
    edge is pushed to infinity so all mass is covered.
    """
    n_dim = model.spec.n
    total = n_dim * n_samples
    n_bins = min(n_bins, int(total / max(min_expected, 1.0)))
    if r_max is None:
        r_max = 1.0
        while _ev.radial_cdf(model, n_dim, r_max) < 1.0 - 1e-12 and r_max < 64:
            r_max *= 2.0
    # Invert the mean radial CDF by bisection on each quantile.
    def mean_cdf(r):
        return sum(_ev.radial_cdf(model, k, r) for k in range(1, n_dim + 1)) / n_dim

    edges = [0.0]
    for j in range(1, n_bins):
        target = j / n_bins
        lo, hi = edges[-1], r_max
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if mean_cdf(mid) < target:
                lo = mid
            else:
                hi = mid
        edges.append(0.5 * (lo + hi))
    edges.append(np.inf)
    return np.array(edges)


def radial_comparison(spec, n_samples, seed, n_bins=40, z_max=3.0,
                      min_expected=30.0):
    """MC radial histogram vs exact expected counts for an eigenvalue spec.

    Returns
    -------
    dict
        ComparisonReport fields: edges, observed, expected, z_scores,
        sup_z, verdict.
    """
    model = _ev.eigen_model(spec)
    radii = _ens.eigenvalue_radii_batch(spec, n_samples, _ens.make_rng(seed))
    edges = equal_mass_edges(model, n_bins, n_samples, min_expected)
    expected = _ev.expected_bin_counts(model, edges, n_samples)
    observed, _ = np.histogram(radii, bins=edges)
    rep = compare_counts(observed, expected, n_samples * spec.n,
                         z_max=z_max, min_expected=min_expected)
    rep["edges"] = edges
    return rep


def sv_comparison(spec, n_samples, seed, n_bins=40, z_max=3.0,
                  min_expected=30.0):
    """MC squared-singular-value histogram vs the exact one-point density."""
    system = _sv.sv_system(spec)
    vals = _ens.squared_singular_value_batch(spec, n_samples,
                                             _ens.make_rng(seed))
    edges = np.quantile(vals, np.linspace(0.0, 1.0, n_bins + 1))
    edges[0], edges[-1] = 0.0, float(np.max(vals)) * 1.5
    centers = 0.5 * (edges[:-1] + edges[1:])
    # Exact expected count per bin by Gauss-Legendre on the density.
    nodes, weights = np.polynomial.legendre.leggauss(12)
    expected = np.empty(n_bins)
    for i in range(n_bins):
        a, b = edges[i], edges[i + 1]
        xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        dens = _sv.sv_density(system, xs)
        expected[i] = 0.5 * (b - a) * float(np.dot(weights, dens)) * n_samples
    observed, _ = np.histogram(vals, bins=edges)
    rep = compare_counts(observed, expected, n_samples * spec.n,
                         z_max=z_max, min_expected=min_expected)
    rep["edges"] = edges
    rep["centers"] = centers
    return rep


def _report_base(config):
    base = {
        "mode": config.mode,
        "seed": config.seed,
        "tolerances": {"z_max": config.z_max,
                       "min_expected": config.min_expected},
    }
    if config.spec is not None:
        base["spec"] = config.spec.to_json_dict()
    return base


def _run_sample(config, out):
    spec = config.spec
    rng = _ens.make_rng(config.seed)
    samples, rejected = _ens.sample_batch(spec, config.samples, rng,
                                          want_singular_values=True,
                                          seed=config.seed)
    csv_path = os.path.join(out, "samples.csv")
    _ens.samples_to_csv(samples, csv_path)
    report = _report_base(config)
    report["samples"] = config.samples
    report["rejected"] = rejected
    report["artifacts"] = ["samples.csv", "samples.png"]
    eigs = np.concatenate([s.eigenvalues for s in samples
                           if s.eigenvalues is not None])

    def draw(ax):
        ax.plot(eigs.real, eigs.imag, ".", ms=1, alpha=0.4)
        ax.set_xlabel("Re z")
        ax.set_ylabel("Im z")
        ax.set_aspect("equal")

    _figure(os.path.join(out, "samples.png"), draw)
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK


def _run_exact_density(config, out):
    spec = config.spec
    model = _ev.eigen_model(spec)
    g = config.grid or {}
    r_hi = g.get("stop")
    if r_hi is None:
        r_hi = 1.0
        while _ev.radial_cdf(model, spec.n, r_hi) < 1.0 - 1e-9 and r_hi < 64:
            r_hi *= 1.5
    rs = np.linspace(g.get("start", 1e-3), r_hi, g.get("points", 200))
    dens = np.array([_ev.radial_density(model, r) for r in rs])
    # Exact integral over the emitted range via the radial CDF; free of
    # grid-resolution error.
    integral = float(sum(
        _ev.radial_cdf(model, k, rs[-1]) - _ev.radial_cdf(model, k, rs[0])
        for k in range(1, spec.n + 1)
    ))
    write_csv(os.path.join(out, "density.csv"), ["r", "density"], [rs, dens])

    def draw(ax):
        ax.plot(rs, dens)
        ax.set_xlabel("|z|")
        ax.set_ylabel("radial density")

    _figure(os.path.join(out, "density.png"), draw)
    report = _report_base(config)
    report["integral"] = integral
    report["integral_target"] = spec.n
    report["artifacts"] = ["density.csv", "density.png"]
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK


def _run_hole(config, out):
    spec = config.spec
    model = _ev.eigen_model(spec)
    r = config.radius
    closed = _ev.hole_probability(model, r, method="closed")
    quad = _ev.hole_probability(model, r, method="quadrature")
    rng = _ens.make_rng(config.seed)
    radii = _ens.eigenvalue_radii_batch(spec, config.samples, rng)
    radii = radii.reshape(config.samples, spec.n)
    hits = np.all(radii > r, axis=1)
    mc = float(np.mean(hits))
    se = math.sqrt(max(mc * (1.0 - mc), 1e-12) / config.samples)
    pairs = {
        "closed_vs_quadrature": abs(closed - quad),
        "closed_vs_mc_z": abs(closed - mc) / se,
        "quadrature_vs_mc_z": abs(quad - mc) / se,
    }
    ok = (pairs["closed_vs_quadrature"] <= 1e-4
          and pairs["closed_vs_mc_z"] <= config.z_max
          and pairs["quadrature_vs_mc_z"] <= config.z_max)
    report = _report_base(config)
    report.update({
        "radius": r,
        "closed": closed,
        "quadrature": quad,
        "mc": mc,
        "mc_standard_error": se,
        "comparisons": pairs,
        "verdict": "pass" if ok else "fail",
    })
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK if ok else EXIT_STATISTICAL


def _run_sv_density(config, out):
    spec = config.spec
    system = _sv.sv_system(spec)
    g = config.grid or {}
    xs = np.linspace(g.get("start", 1e-4), g.get("stop", 20.0),
                     g.get("points", 200))
    dens = _sv.sv_density(system, xs)
    write_csv(os.path.join(out, "sv_density.csv"), ["x", "density"],
              [xs, dens])

    def draw(ax):
        ax.plot(xs, dens)
        ax.set_xlabel("x")
        ax.set_ylabel("density")

    _figure(os.path.join(out, "sv_density.png"), draw)
    report = _report_base(config)
    report["artifacts"] = ["sv_density.csv", "sv_density.png"]
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK


def _run_kernel(config, out):
    spec = config.spec
    system = _sv.sv_system(spec)
    g = config.grid or {}
    pts = np.linspace(g.get("start", 0.5), g.get("stop", 4.0),
                      g.get("points", 3))
    rows = []
    worst = 0.0
    for x in pts:
        for y in pts:
            s = _sv.kernel_sum(system, float(x), float(y))
            c = _sv.kernel_contour(system, float(x), float(y))
            rel = abs(s - c) / max(abs(s), 1e-300)
            worst = max(worst, rel)
            rows.append([float(x), float(y), s, c, rel])
    cols = list(zip(*rows))
    write_csv(os.path.join(out, "kernel.csv"),
              ["x", "y", "sum_form", "contour_form", "relative_deviation"],
              cols)
    report = _report_base(config)
    report["max_relative_deviation"] = worst
    report["artifacts"] = ["kernel.csv"]
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK


def _run_converge(config, out):
    spec = config.spec
    if config.converge_edge == "origin":
        rep = _asy.converge_origin(spec, list(config.n_values))
    else:
        rep = _asy.converge_hard_edge(spec, list(config.n_values))
    devs = rep["deviations"]
    rep["monotone"] = bool(all(float(b) < float(a)
                               for a, b in zip(devs, devs[1:])))
    rep["deviations"] = [float(d) for d in devs]
    if rep.get("bounds"):
        rep["bounds"] = [None if b is None else float(b)
                         for b in rep["bounds"]]

    def draw(ax):
        ax.semilogy(rep["n_values"], rep["deviations"], "o-")
        ax.set_xlabel("N")
        ax.set_ylabel("sup deviation")

    _figure(os.path.join(out, "converge.png"), draw)
    report = _report_base(config)
    report.update(rep)
    report["artifacts"] = ["converge.png"]
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK


def _run_lyapunov(config, out):
    spec = config.spec
    exact = _ex.exact_exponents(spec)
    est = _ex.mc_lyapunov(spec, config.n_steps, config.replicas,
                          seed=config.seed)
    z = (est["means"] - np.array(exact.means)) / est["standard_errors"]
    ok = bool(np.max(np.abs(z)) <= 4.0)
    write_csv(os.path.join(out, "lyapunov.csv"),
              ["exact_mean", "mc_mean", "mc_standard_error", "z_score",
               "exact_sigma"],
              [exact.means, est["means"], est["standard_errors"], z,
               exact.sigmas])

    def draw(ax):
        idx = np.arange(1, spec.n + 1)
        ax.errorbar(idx, est["means"], yerr=4 * est["standard_errors"],
                    fmt="o", label="MC (4 SE)")
        ax.plot(idx, exact.means, "k_", ms=16, label="exact")
        ax.set_xlabel("n")
        ax.set_ylabel("exponent")
        ax.legend()

    _figure(os.path.join(out, "lyapunov.png"), draw)
    report = _report_base(config)
    report.update({
        "family": exact.family,
        "extrapolated_variances": exact.extrapolated,
        "exact_means": list(exact.means),
        "exact_sigmas": list(exact.sigmas),
        "mc_means": [float(v) for v in est["means"]],
        "mc_standard_errors": [float(v) for v in est["standard_errors"]],
        "z_scores": [float(v) for v in z],
        "rejected": est["rejected"],
        "n_steps": config.n_steps,
        "replicas": config.replicas,
        "verdict": "pass" if ok else "fail",
        "artifacts": ["lyapunov.csv", "lyapunov.png"],
    })
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK if ok else EXIT_STATISTICAL


def _run_stability(config, out):
    spec = config.spec
    exact = _ex.exact_exponents(spec)
    est = _ex.mc_stability(spec, config.n_steps, config.replicas,
                           seed=config.seed)
    z = (est["means"] - np.array(exact.means)) / est["standard_errors"]
    ok = bool(np.max(np.abs(z)) <= 4.0)
    write_csv(os.path.join(out, "stability.csv"),
              ["exact_mean", "mc_mean", "mc_standard_error", "z_score"],
              [exact.means, est["means"], est["standard_errors"], z])
    report = _report_base(config)
    report.update({
        "exact_means": list(exact.means),
        "mc_means": [float(v) for v in est["means"]],
        "mc_standard_errors": [float(v) for v in est["standard_errors"]],
        "z_scores": [float(v) for v in z],
        "rejected": est["rejected"],
        "verdict": "pass" if ok else "fail",
        "artifacts": ["stability.csv"],
    })
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK if ok else EXIT_STATISTICAL


def _run_verify(config, out):
    from . import acceptance

    results = acceptance.run_all(seed=config.seed)
    report = _report_base(config)
    report["criteria"] = results
    report["verdict"] = ("pass" if all(r["passed"] for r in results)
                         else "fail")
    write_json(os.path.join(out, "report.json"), report)
    return EXIT_OK if report["verdict"] == "pass" else EXIT_STATISTICAL


_RUNNERS = {
    "sample": _run_sample,
    "exact-density": _run_exact_density,
    "hole": _run_hole,
    "sv-density": _run_sv_density,
    "kernel": _run_kernel,
    "converge": _run_converge,
    "lyapunov": _run_lyapunov,
    "stability": _run_stability,
    "verify": _run_verify,
}


def run(config):
    """Execute one experiment; returns a process exit code.

    Artifacts (CSV data, JSON report, figures) are written under
    config.out atomically; the run is deterministic given the seed.
    """
    if config.mode not in _RUNNERS:
        return EXIT_USAGE
    if config.mode != "verify" and config.spec is None:
        return EXIT_USAGE
    out = config.out
    os.makedirs(out, exist_ok=True)
    try:
        return _RUNNERS[config.mode](config, out)
    except (ArithmeticError, DomainError) as exc:
        write_json(os.path.join(out, "report.json"), {
            "mode": config.mode,
            "error": "%s: %s" % (type(exc).__name__, exc),
            "verdict": "numerical-failure",
        })
        return EXIT_NUMERICAL
