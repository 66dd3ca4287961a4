"""Seeded, replicated experiments with JSON + CSV reports.

Every experiment is a pure function of (config, master_seed): replication r
draws its generator stream from (master_seed, r), so results are identical
whether replications run serially or on a thread pool, and reruns are
byte-identical on the CSV outputs. Wall-clock runtime is the only
non-reproducible field and lives in report metadata.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gaussians import (
    GaussianBump,
    IndicatorAtom,
    TargetFunction,
    density,
    norm_sq,
    shift_coefficients,
)
from .operators import DEFAULT_TAIL_TOL, build_restricted, quadratic_form
from .pointproc import (
    PointConfiguration,
    ProcessSpec,
    max_unit_count,
    reciprocal_sum,
    sample,
    unit_counts,
)
from .span_density import ORDERINGS, density_curve
from .spectral import decay_fit, spectrum, width_tail_bound, widths
from .windows import Window

_MAX_SEED = 2**64


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration (CLI exit code 1)."""


class NumericalError(RuntimeError):
    """Non-finite statistic or failed decomposition (CLI exit code 2)."""


_COMMON_KEYS = ("process", "window", "replications", "master_seed")
_EXPERIMENT_KEYS = {
    "campbell": ("variance", "probes"),
    "frame-bound": ("variance", "target"),
    "nuclear": ("variance", "interval", "tail_tol"),
    "widths": ("variance", "interval", "x_grid", "tail_tol"),
    "norm-growth": ("variance", "n_grid", "tail_tol"),
    "divergence": ("x_grid",),
    "muntz": ("variance", "interval", "target", "ordering"),
    "sample": (),
    "spectrum": ("variance", "interval", "tail_tol"),
}
# keys that carry a default and may be omitted from config documents
_OPTIONAL_KEYS = ("probes", "tail_tol", "ordering")

EXPERIMENTS = tuple(sorted(_EXPERIMENT_KEYS))


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one experiment run."""

    experiment: str
    process: ProcessSpec
    window: Window
    replications: int
    master_seed: int
    variance: float = None  # type: ignore[assignment]
    interval: Window = None  # type: ignore[assignment]
    x_grid: tuple = None  # type: ignore[assignment]
    n_grid: tuple = None  # type: ignore[assignment]
    probes: tuple = (0.0,)
    target: TargetFunction = None  # type: ignore[assignment]
    ordering: str = "by-distance-to-interval-center"
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self) -> None:
        if self.experiment not in _EXPERIMENT_KEYS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"replications must be a positive integer, got {self.replications}")
        if not isinstance(self.master_seed, int) or not (0 <= self.master_seed < _MAX_SEED):
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        needed = set(_EXPERIMENT_KEYS[self.experiment]) - set(_OPTIONAL_KEYS)
        for key in sorted(needed):
            if getattr(self, key) is None:
                raise ConfigError(f"experiment {self.experiment!r} requires {key!r}")
        if self.variance is not None and (not (self.variance > 0.0) or not math.isfinite(self.variance)):
            raise ConfigError(f"variance must be positive and finite, got {self.variance}")
        if not (0.0 < self.tail_tol < 1.0):
            raise ConfigError(f"tail_tol must be in (0, 1), got {self.tail_tol}")
        if self.interval is not None and not self.window.contains(self.interval):
            raise ConfigError(f"window {self.window} must contain interval {self.interval}")
        if self.ordering not in ORDERINGS:
            raise ConfigError(f"ordering must be one of {ORDERINGS}, got {self.ordering!r}")
        if self.x_grid is not None:
            xs = tuple(float(x) for x in self.x_grid)
            if len(xs) == 0 or any(not math.isfinite(x) for x in xs):
                raise ConfigError("x_grid must be a nonempty list of finite values")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ConfigError("x_grid must be strictly increasing")
            if self.experiment == "divergence":
                if xs[0] < 1.0:
                    raise ConfigError("divergence x_grid values must be at least 1")
            elif xs[0] <= 0.0:
                raise ConfigError("x_grid values must be positive")
            object.__setattr__(self, "x_grid", xs)
        if self.n_grid is not None:
            if any(not float(n).is_integer() for n in self.n_grid):
                raise ConfigError("n_grid entries must be integers")
            ns = tuple(int(n) for n in self.n_grid)
            if len(ns) == 0 or any(n < 3 for n in ns):
                raise ConfigError("n_grid entries must be integers of value at least 3")
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise ConfigError("n_grid must be strictly increasing")
            object.__setattr__(self, "n_grid", ns)
        if self.probes is not None:
            ps = tuple(float(p) for p in self.probes)
            if len(ps) == 0 or any(not math.isfinite(p) for p in ps):
                raise ConfigError("probes must be a nonempty list of finite values")
            object.__setattr__(self, "probes", ps)

    def to_dict(self) -> dict:
        """Canonical config echo with defaults resolved (JSON-serializable)."""
        doc = {
            "experiment": self.experiment,
            "process": _process_to_dict(self.process),
            "window": [self.window.lo, self.window.hi],
            "replications": self.replications,
            "master_seed": self.master_seed,
        }
        for key in _EXPERIMENT_KEYS[self.experiment]:
            value = getattr(self, key)
            if key == "interval":
                value = [value.lo, value.hi]
            elif key == "target":
                value = _target_to_dict(value)
            elif key in ("x_grid", "probes"):
                value = list(value)
            doc[key] = value
        return doc


def _process_to_dict(spec: ProcessSpec) -> dict:
    if spec.kind == "poisson":
        return {"kind": "poisson", "intensity": spec.intensity}
    if spec.kind == "renewal":
        return {"kind": "renewal", "shape": spec.shape, "mean": spec.mean}
    return {"kind": "lattice", "spacing": spec.spacing}


def _target_to_dict(target: TargetFunction) -> dict:
    atoms = []
    for atom in target.atoms:
        if isinstance(atom, GaussianBump):
            atoms.append(
                {"type": "bump", "center": atom.center, "variance": atom.variance, "coefficient": atom.coefficient}
            )
        else:
            atoms.append({"type": "indicator", "lo": atom.lo, "hi": atom.hi, "coefficient": atom.coefficient})
    return {"atoms": atoms}


def _require_number(doc: dict, key: str, context: str):
    if key not in doc:
        raise ConfigError(f"{context} is missing required key {key!r}")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context} key {key!r} must be a number, got {value!r}")
    return value


def _parse_window(value, context: str) -> Window:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{context} must be a two-element [lo, hi] list")
    lo, hi = value
    for v in (lo, hi):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{context} bounds must be numbers, got {v!r}")
    try:
        return Window(float(lo), float(hi))
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_process(doc, context: str = "process") -> ProcessSpec:
    if not isinstance(doc, dict):
        raise ConfigError(f"{context} must be an object")
    kind = doc.get("kind")
    params = {"poisson": ("intensity",), "renewal": ("shape", "mean"), "lattice": ("spacing",)}
    if kind not in params:
        raise ConfigError(f"{context} kind must be one of {sorted(params)}, got {kind!r}")
    allowed = {"kind", *params[kind]}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{context} has unknown keys {sorted(unknown)}")
    values = {name: float(_require_number(doc, name, context)) for name in params[kind]}
    try:
        return ProcessSpec(kind, **values)
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_target(doc, context: str = "target") -> TargetFunction:
    if not isinstance(doc, dict):
        raise ConfigError(f"{context} must be an object")
    unknown = set(doc) - {"atoms"}
    if unknown:
        raise ConfigError(f"{context} has unknown keys {sorted(unknown)}")
    atoms_doc = doc.get("atoms")
    if not isinstance(atoms_doc, list) or not atoms_doc:
        raise ConfigError(f"{context}.atoms must be a nonempty list")
    atoms = []
    for i, atom_doc in enumerate(atoms_doc):
        ctx = f"{context}.atoms[{i}]"
        if not isinstance(atom_doc, dict):
            raise ConfigError(f"{ctx} must be an object")
        kind = atom_doc.get("type")
        if kind == "bump":
            allowed = {"type", "center", "variance", "coefficient"}
        elif kind == "indicator":
            allowed = {"type", "lo", "hi", "coefficient"}
        else:
            raise ConfigError(f"{ctx} type must be 'bump' or 'indicator', got {kind!r}")
        unknown = set(atom_doc) - allowed
        if unknown:
            raise ConfigError(f"{ctx} has unknown keys {sorted(unknown)}")
        coeff = float(_require_number(atom_doc, "coefficient", ctx)) if "coefficient" in atom_doc else 1.0
        try:
            if kind == "bump":
                atoms.append(
                    GaussianBump(
                        center=float(_require_number(atom_doc, "center", ctx)),
                        variance=float(_require_number(atom_doc, "variance", ctx)),
                        coefficient=coeff,
                    )
                )
            else:
                atoms.append(
                    IndicatorAtom(
                        lo=float(_require_number(atom_doc, "lo", ctx)),
                        hi=float(_require_number(atom_doc, "hi", ctx)),
                        coefficient=coeff,
                    )
                )
        except ValueError as exc:
            raise ConfigError(f"{ctx}: {exc}") from exc
    return TargetFunction(tuple(atoms))


def config_from_dict(
    doc: dict,
    experiment: str = None,
    seed_override: int = None,
    reps_override: int = None,
) -> ExperimentConfig:
    """Build a validated config from a parsed document; unknown keys error."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    named = doc.get("experiment")
    if named is not None and experiment is not None and named != experiment:
        raise ConfigError(f"config names experiment {named!r} but {experiment!r} was requested")
    resolved = experiment or named
    if resolved is None:
        raise ConfigError("no experiment named on the command line or in the config")
    if resolved not in _EXPERIMENT_KEYS:
        raise ConfigError(f"unknown experiment {resolved!r}; expected one of {list(EXPERIMENTS)}")

    allowed = {"experiment", *_COMMON_KEYS, *_EXPERIMENT_KEYS[resolved]}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"config has unknown keys {sorted(unknown)} for experiment {resolved!r}")

    if "process" not in doc:
        raise ConfigError("config is missing required key 'process'")
    if "window" not in doc:
        raise ConfigError("config is missing required key 'window'")

    kwargs = {
        "experiment": resolved,
        "process": _parse_process(doc["process"]),
        "window": _parse_window(doc["window"], "window"),
    }

    if reps_override is not None:
        kwargs["replications"] = int(reps_override)
    else:
        reps = _require_number(doc, "replications", "config")
        if not isinstance(reps, int):
            raise ConfigError(f"replications must be an integer, got {reps!r}")
        kwargs["replications"] = reps

    if seed_override is not None:
        kwargs["master_seed"] = int(seed_override)
    else:
        seed = _require_number(doc, "master_seed", "config")
        if not isinstance(seed, int):
            raise ConfigError(f"master_seed must be an integer, got {seed!r}")
        kwargs["master_seed"] = seed

    for key in _EXPERIMENT_KEYS[resolved]:
        if key not in doc:
            continue
        value = doc[key]
        if key == "interval":
            kwargs[key] = _parse_window(value, "interval")
        elif key == "target":
            kwargs[key] = _parse_target(value)
        elif key in ("x_grid", "n_grid", "probes"):
            if not isinstance(value, list):
                raise ConfigError(f"{key} must be a list")
            for v in value:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"{key} entries must be numbers, got {v!r}")
            kwargs[key] = tuple(value)
        elif key in ("variance", "tail_tol"):
            kwargs[key] = float(_require_number(doc, key, "config"))
        elif key == "ordering":
            if not isinstance(value, str):
                raise ConfigError(f"ordering must be a string, got {value!r}")
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def load_config(path: str, **kwargs) -> ExperimentConfig:
    """Read a JSON config file and validate it."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc, **kwargs)


@dataclass
class ExperimentReport:
    """Everything one experiment run produced, ready for serialization."""

    experiment: str
    config: dict
    statistics: dict
    checks: dict
    tables: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_json(self) -> dict:
        return _sanitize(
            {
                "experiment": self.experiment,
                "config": self.config,
                "statistics": self.statistics,
                "checks": self.checks,
                "metadata": {
                    "master_seed": self.config["master_seed"],
                    "replications": self.config["replications"],
                    "runtime_seconds": self.runtime_seconds,
                },
            }
        )


def _sanitize(value):
    """Make a nested structure JSON-safe; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, (bool, str, int)) or value is None:
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.ndarray):
        return [_sanitize(v) for v in value.tolist()]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def format_value(value) -> str:
    """CSV cell formatting: integers verbatim, floats at 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_outputs(report: ExperimentReport, out_dir: str) -> None:
    """Write report.json plus one CSV per statistic table."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.as_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name in sorted(report.tables):
        columns, rows = report.tables[name]
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(v) for v in row])


def replication_seed(master_seed: int, r: int) -> int:
    """Stream seed for replication r: a pure function of (master_seed, r)."""
    state = np.random.SeedSequence(entropy=master_seed, spawn_key=(r,)).generate_state(1, np.uint64)
    return int(state[0])


def _replicate(fn, replications: int, workers: int) -> list:
    if workers <= 1:
        return [fn(r) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replications)))


def _mean_se(values) -> tuple:
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def _require_finite(name: str, values) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite value in per-replication statistic {name!r}")


def _sample_rep(cfg: ExperimentConfig, r: int) -> PointConfiguration:
    return sample(cfg.process, cfg.window, replication_seed(cfg.master_seed, r))


# --- individual experiments -------------------------------------------------


def _campbell_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated shift sums at probe points against the intensity value."""
    probes = np.asarray(cfg.probes)

    def one(r: int):
        config = _sample_rep(cfg, r)
        return [float(np.sum(density(cfg.variance, u0 - config.points))) for u0 in probes]

    values = np.asarray(_replicate(one, cfg.replications, workers))
    _require_finite("shift_sum", values)
    theory = cfg.process.rate
    rows = []
    per_probe = []
    all_within = True
    for j, u0 in enumerate(probes):
        mean, se = _mean_se(values[:, j])
        # The absolute floor covers near-deterministic processes (lattice):
        # the statistic is then a Riemann sum of the density, exact to < 1e-8,
        # while its sample SE collapses to zero.
        within = bool(abs(mean - theory) <= 4.0 * se + 1e-8 * max(1.0, abs(theory)))
        all_within = all_within and within
        per_probe.append({"probe": float(u0), "mean": mean, "se": se, "theory": theory, "within_band": within})
    for r in range(cfg.replications):
        for j, u0 in enumerate(probes):
            rows.append((r, float(u0), values[r, j]))
    statistics = {"shift_sum": per_probe}
    checks = {"mean_within_4se": all_within}
    tables = {"campbell.csv": (("replication", "probe", "value"), rows)}
    return statistics, checks, tables


def _frame_bound_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated full-line squared-coefficient sums against the C*||f||^2 bound."""
    f = cfg.target
    f_norm_sq = norm_sq(f)
    if f_norm_sq <= 0.0:
        raise ConfigError("frame-bound requires a target with positive norm")
    bound = cfg.process.rate * f_norm_sq

    def one(r: int) -> float:
        config = _sample_rep(cfg, r)
        c = shift_coefficients(f, cfg.variance, config.points)
        return float(np.dot(c, c))

    values = np.asarray(_replicate(one, cfg.replications, workers))
    _require_finite("frame_sum", values)
    mean, se = _mean_se(values)
    respected = not (mean - 4.0 * se > bound)
    statistics = {
        "frame_sum": {"mean": mean, "se": se, "bound": bound, "target_norm_sq": f_norm_sq}
    }
    checks = {"bound_respected": bool(respected)}
    rows = [(r, values[r]) for r in range(cfg.replications)]
    tables = {"frame_bound.csv": (("replication", "value"), rows)}
    return statistics, checks, tables


def _nuclear_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated trace of the weighted matrix against its expected value."""

    def one(r: int):
        config = _sample_rep(cfg, r)
        op = build_restricted(config, cfg.variance, cfg.interval, cfg.tail_tol)
        summary = spectrum(op)
        return summary.trace, summary.nuclear_norm

    results = _replicate(one, cfg.replications, workers)
    traces = np.asarray([t for t, _ in results])
    nuclears = np.asarray([n for _, n in results])
    _require_finite("trace", traces)
    _require_finite("nuclear_norm", nuclears)
    identity_ok = bool(np.all(np.abs(nuclears - traces) <= 1e-9 * (1.0 + traces)))
    mean, se = _mean_se(traces)
    theory = cfg.process.rate * cfg.interval.length * density(2.0 * cfg.variance, 0.0)
    statistics = {
        "trace": {"mean": mean, "se": se, "theory": theory},
        "max_identity_gap": float(np.max(np.abs(nuclears - traces), initial=0.0)),
    }
    checks = {
        "nuclear_equals_trace": identity_ok,
        "mean_within_4se": bool(abs(mean - theory) <= 4.0 * se),
    }
    rows = [(r, traces[r], nuclears[r]) for r in range(cfg.replications)]
    tables = {"nuclear.csv": (("replication", "trace", "nuclear_norm"), rows)}
    return statistics, checks, tables


def _widths_parts(cfg: ExperimentConfig, workers: int = 1):
    """Per-replication spectra, tail-bound checks on the x grid, and decay fits."""

    def one(r: int):
        config = _sample_rep(cfg, r)
        op = build_restricted(config, cfg.variance, cfg.interval, cfg.tail_tol)
        summary = spectrum(op)
        m = summary.eigenvalues.size
        width_seq = widths(summary, m) if m else np.zeros(1)
        tail = []
        for x in cfg.x_grid:
            n_x, bound = width_tail_bound(config, cfg.variance, cfg.interval, x, cfg.tail_tol)
            d = float(width_seq[n_x]) if n_x < width_seq.size else 0.0
            tail.append((x, n_x, d, bound, d <= bound + 1e-10))
        try:
            fit = decay_fit(width_seq, cfg.variance)
        except ValueError:
            fit = None
        return width_seq, tail, fit

    results = _replicate(one, cfg.replications, workers)

    width_rows = []
    tail_rows = []
    fit_rows = []
    slopes, r2s = [], []
    all_tail_ok = True
    for r, (width_seq, tail, fit) in enumerate(results):
        _require_finite("widths", width_seq)
        for n, d in enumerate(width_seq):
            if d > 0.0:
                log_d = math.log(d)
                y = math.sqrt(-cfg.variance * log_d) if d < 1.0 else float("nan")
                width_rows.append((r, n, float(d), log_d, y))
        for x, n_x, d, bound, ok in tail:
            all_tail_ok = all_tail_ok and ok
            tail_rows.append((r, x, n_x, d, bound, ok))
        if fit is not None:
            slopes.append(fit.slope)
            r2s.append(fit.r_squared)
            fit_rows.append((r, fit.slope, fit.intercept, fit.r_squared, fit.n_range[0], fit.n_range[1]))

    median_slope = float(np.median(slopes)) if slopes else float("nan")
    median_r2 = float(np.median(r2s)) if r2s else float("nan")
    statistics = {
        "tail_checks": {"total": len(tail_rows), "passed": int(sum(1 for row in tail_rows if row[5]))},
        "decay_fit": {
            "fitted_replications": len(slopes),
            "median_slope": median_slope,
            "median_r_squared": median_r2,
        },
    }
    checks = {
        "tail_bound_holds": bool(all_tail_ok),
        "median_slope_positive": bool(slopes and median_slope > 0.0),
        "median_r_squared": bool(r2s and median_r2 >= 0.9),
    }
    tables = {
        "widths.csv": (("replication", "n", "d_n", "log_d_n", "y_n"), width_rows),
        "tail_bound.csv": (("replication", "x", "count", "width", "bound", "satisfied"), tail_rows),
        "decay_fit.csv": (("replication", "slope", "intercept", "r_squared", "n_min", "n_max"), fit_rows),
    }
    return statistics, checks, tables


def _norm_growth_parts(cfg: ExperimentConfig, workers: int = 1):
    """Operator norms on growing intervals with the crowded-interval lower bound."""
    pad = 12.0 * math.sqrt(cfg.variance)
    n_max = cfg.n_grid[-1]
    needed = Window(-float(n_max) - pad, float(n_max) + pad)
    if not cfg.window.contains(needed):
        raise ConfigError(
            f"window {cfg.window} is smaller than the largest n plus padding {needed}"
        )

    def one(r: int):
        config = _sample_rep(cfg, r)
        out = []
        for n in cfg.n_grid:
            op = build_restricted(config, cfg.variance, Window(-float(n), float(n)), cfg.tail_tol)
            summary = spectrum(op)
            counts = unit_counts(config, -n, n - 1)
            max_count = max_unit_count(counts, len(counts)) if len(counts) else 0
            crowded = counts.base + int(np.argmax(counts.counts))
            f = TargetFunction.indicator(float(crowded), float(crowded + 1))
            rayleigh = quadratic_form(op, f)  # ||f||^2 on [-n, n] is exactly 1
            scaled = math.log(math.log(n)) / math.log(n) * summary.operator_norm
            out.append((n, summary.operator_norm, max_count, scaled, rayleigh))
        return out

    results = _replicate(one, cfg.replications, workers)
    rows = []
    monotone = True
    rayleigh_ok = True
    by_n = {n: [] for n in cfg.n_grid}
    for r, result in enumerate(results):
        norms = [norm for _, norm, _, _, _ in result]
        _require_finite("norm", norms)
        monotone = monotone and all(b >= a - 1e-10 for a, b in zip(norms, norms[1:]))
        for n, norm, max_count, scaled, rayleigh in result:
            rayleigh_ok = rayleigh_ok and norm >= rayleigh - 1e-10
            by_n[n].append(scaled)
            rows.append((r, n, norm, max_count, scaled, rayleigh))

    medians = {n: float(np.median(values)) for n, values in by_n.items()}
    first, last = cfg.n_grid[0], cfg.n_grid[-1]
    statistics = {
        "scaled_statistic_medians": [{"n": n, "median": medians[n]} for n in cfg.n_grid],
    }
    checks = {
        "norm_nondecreasing": bool(monotone),
        "rayleigh_lower_bound": bool(rayleigh_ok),
        "median_trend_increases": bool(medians[last] > medians[first]),
    }
    tables = {
        "norm_growth.csv": (
            ("replication", "n", "norm", "max_count", "scaled_statistic", "rayleigh_bound"),
            rows,
        )
    }
    return statistics, checks, tables


def _divergence_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated reciprocal sums along the x grid against rate * ln x."""
    x_max = cfg.x_grid[-1]
    if not cfg.window.contains(Window(1.0, float(x_max))):
        raise ConfigError(f"window {cfg.window} must cover [1, {x_max}] for the x_grid")

    def one(r: int):
        config = _sample_rep(cfg, r)
        return [reciprocal_sum(config, x) for x in cfg.x_grid]

    values = np.asarray(_replicate(one, cfg.replications, workers))
    _require_finite("reciprocal_sum", values)
    nondecreasing = bool(np.all(np.diff(values, axis=1) >= 0.0)) if values.shape[1] > 1 else True
    per_x = []
    all_within = True
    rows = []
    for j, x in enumerate(cfg.x_grid):
        mean, se = _mean_se(values[:, j])
        theory = cfg.process.rate * math.log(x)
        within = bool(abs(mean - theory) <= 4.0 * se + 1e-12 * max(1.0, abs(theory)))
        all_within = all_within and within
        per_x.append({"x": float(x), "mean": mean, "se": se, "theory": theory, "within_band": within})
    for r in range(cfg.replications):
        for j, x in enumerate(cfg.x_grid):
            rows.append((r, float(x), values[r, j]))
    statistics = {"reciprocal_sum": per_x}
    checks = {"sums_nondecreasing": nondecreasing, "mean_within_4se": all_within}
    tables = {"divergence.csv": (("replication", "x", "value"), rows)}
    return statistics, checks, tables


def _muntz_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated span-distance curves for growing atom families."""
    f = cfg.target
    target_norm = math.sqrt(norm_sq(f, cfg.interval))
    if target_norm <= 0.0:
        raise ConfigError("muntz requires a target with positive norm on the interval")

    def one(r: int):
        config = _sample_rep(cfg, r)
        return density_curve(config, cfg.variance, cfg.interval, f, cfg.ordering)

    curves = _replicate(one, cfg.replications, workers)
    rows = []
    finals = []
    monotone = True
    for r, curve in enumerate(curves):
        _require_finite("distance", curve.distances)
        if curve.distances.size:
            steps = np.diff(curve.distances)
            monotone = monotone and bool(np.all(steps <= 1e-8 * target_norm))
            finals.append(float(curve.distances[-1]))
        else:
            finals.append(target_norm)
        for k, d in zip(curve.counts, curve.distances):
            rows.append((r, int(k), float(d)))

    median_final = float(np.median(finals))
    statistics = {
        "target_norm": target_norm,
        "final_distance": {
            "median": median_final,
            "median_relative": median_final / target_norm,
        },
    }
    checks = {
        "curves_nonincreasing": bool(monotone),
        "median_final_small": bool(median_final <= 0.05 * target_norm),
    }
    tables = {"muntz.csv": (("replication", "count", "distance"), rows)}
    return statistics, checks, tables


def _sample_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated raw realizations, reported as point tables and count stats."""

    def one(r: int):
        return _sample_rep(cfg, r)

    configs = _replicate(one, cfg.replications, workers)
    rows = []
    counts = []
    for r, config in enumerate(configs):
        _require_finite("points", config.points)
        counts.append(len(config))
        for i, (theta, w) in enumerate(zip(config.points, config.weights)):
            rows.append((r, i, float(theta), float(w)))
    mean, se = _mean_se(counts)
    theory = cfg.process.rate * cfg.window.length
    # the +1 floor covers lattice realizations, whose counts are deterministic
    # up to the one boundary point that the random shift moves in or out
    within = bool(abs(mean - theory) <= 4.0 * se + 1.0)
    statistics = {"count": {"mean": mean, "se": se, "theory": theory}}
    checks = {"mean_count_within_4se": within}
    tables = {"sample.csv": (("replication", "index", "position", "weight"), rows)}
    return statistics, checks, tables


def _spectrum_parts(cfg: ExperimentConfig, workers: int = 1):
    """Replicated eigenvalue lists of the restricted operator."""

    def one(r: int):
        config = _sample_rep(cfg, r)
        op = build_restricted(config, cfg.variance, cfg.interval, cfg.tail_tol)
        return spectrum(op)

    summaries = _replicate(one, cfg.replications, workers)
    rows = []
    identity_ok = True
    norms = []
    for r, summary in enumerate(summaries):
        _require_finite("eigenvalues", summary.eigenvalues)
        norms.append(summary.operator_norm)
        identity_ok = identity_ok and abs(summary.nuclear_norm - summary.trace) <= 1e-9 * (1.0 + summary.trace)
        for i, value in enumerate(summary.eigenvalues):
            rows.append((r, i, float(value)))
    mean, se = _mean_se(norms)
    statistics = {"operator_norm": {"mean": mean, "se": se}}
    checks = {"nuclear_equals_trace": bool(identity_ok)}
    tables = {"spectrum.csv": (("replication", "index", "eigenvalue"), rows)}
    return statistics, checks, tables


_RUNNERS = {
    "campbell": _campbell_parts,
    "frame-bound": _frame_bound_parts,
    "nuclear": _nuclear_parts,
    "widths": _widths_parts,
    "norm-growth": _norm_growth_parts,
    "divergence": _divergence_parts,
    "muntz": _muntz_parts,
    "sample": _sample_parts,
    "spectrum": _spectrum_parts,
}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Dispatch the configured experiment and assemble its report."""
    start = time.perf_counter()
    statistics, checks, tables = _RUNNERS[cfg.experiment](cfg, workers)
    return ExperimentReport(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        statistics=statistics,
        checks=checks,
        tables=tables,
        runtime_seconds=time.perf_counter() - start,
    )


def _run_named(name: str, cfg: ExperimentConfig, workers: int) -> ExperimentReport:
    if cfg.experiment != name:
        raise ConfigError(f"config describes experiment {cfg.experiment!r}, not {name!r}")
    return run_experiment(cfg, workers)


def run_campbell(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated shift sums at probe points against the intensity value."""
    return _run_named("campbell", cfg, workers)


def run_frame_bound(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated squared-coefficient sums against the rate * ||f||^2 bound."""
    return _run_named("frame-bound", cfg, workers)


def run_nuclear(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated trace/nuclear-norm identity and mean-trace comparison."""
    return _run_named("nuclear", cfg, workers)


def run_widths(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated width sequences, tail bounds, and decay fits."""
    return _run_named("widths", cfg, workers)


def run_norm_growth(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated operator norms on growing intervals with Rayleigh bounds."""
    return _run_named("norm-growth", cfg, workers)


def run_divergence(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated reciprocal sums along the x grid against rate * ln x."""
    return _run_named("divergence", cfg, workers)


def run_muntz(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated span-distance curves for growing atom families."""
    return _run_named("muntz", cfg, workers)


def run_sample(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated raw realizations as point tables with count statistics."""
    return _run_named("sample", cfg, workers)


def run_spectrum(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Replicated eigenvalue lists of the restricted operator."""
    return _run_named("spectrum", cfg, workers)
