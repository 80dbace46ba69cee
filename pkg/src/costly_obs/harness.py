"""Seeded multi-run experiments, Gain/regret summaries and CSV output.

Config files are TOML with three tables::

    [model]                     # exactly one of: synthetic, benchmark, path, inline
    synthetic = { seed = 7, alphabet_sizes = [3, 2, 3, 2], correlation = 1.0 }

    [run]
    algorithms = ["sim-oos", "seq-oos", "contextual-ucb"]
    T = 200000
    m = 3
    beta = 100.0
    delta = 0.1
    costs = 1.0                 # uniform cost or one per observation
    seeds = [0, 1, 2, 3, 4]
    sweep = [0, 5, 10]          # optional uniform costs; overrides ``costs``
    radius_scale = 1.0

    [output]
    curves = false              # per-step regret curve files
    curve_points = 1000         # log-spaced checkpoints per curve; 0 keeps every step
"""
from __future__ import annotations

import csv
import io
import logging
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import baselines, seq_oos, sim_oos
from .environment import (
    GenerativeModel,
    SyntheticSpec,
    load_model,
    make_parity_model,
    make_switch_model,
    make_synthetic_medical,
    model_from_dict,
    oracle_seq,
    oracle_sim,
)
from .estimation import LearnerConfig
from .trace import RunTrace, compute_gain, compute_regret, log_checkpoints

log = logging.getLogger(__name__)

ALGORITHMS = ("sim-oos", "seq-oos", "contextual-ucb", "meta-ucb")
BENCHMARKS = {"parity": make_parity_model, "switch": make_switch_model}
WORKERS_ENV = "COSTLY_OBS_WORKERS"

RESULT_COLUMNS = ("algorithm", "cost", "seed", "T", "gain", "regret", "oracle_value", "rounds")
TIMING_COLUMNS = ("algorithm", "cost", "seed", "wall_time_s")
ORACLE_COLUMNS = ("cost", "sim_value", "sim_obs_set", "seq_value")
CURVE_COLUMNS = ("t", "cum_reward", "cum_cost", "gain", "regret")

_SCHEMA = {
    "model": {"synthetic", "benchmark", "path", "inline"},
    "run": {"algorithms", "T", "m", "beta", "delta", "costs", "seeds", "sweep", "radius_scale"},
    "output": {"curves", "curve_points"},
}

REPLICATION_PRESET = """\
# Cost sweep on the synthetic four-test treatment model.
[model]
synthetic = { seed = 7, alphabet_sizes = [3, 2, 3, 2], n_actions = 4, correlation = 1.0 }

[run]
algorithms = ["sim-oos", "seq-oos", "contextual-ucb"]
T = 200000
m = 3
beta = 100.0
delta = 0.1
seeds = [0, 1, 2, 3, 4]
sweep = [0, 5, 10, 15, 20, 25]

[output]
curves = false
curve_points = 1000
"""

PRESETS = {"replication": REPLICATION_PRESET}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message carries line context when known."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    model: GenerativeModel = field(repr=False)
    algorithms: Tuple[str, ...]
    T: int
    m: int
    beta: float = 1.0
    delta: float = 0.1
    seeds: Tuple[int, ...] = (0,)
    sweep: Tuple[float, ...] = ()
    radius_scale: float = 1.0
    curves: bool = False
    curve_points: int = 1000

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if not 0 <= self.m <= self.model.D:
            raise ConfigError(f"m must lie in [0, D={self.model.D}]")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}; choose from {ALGORITHMS}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(c < 0 for c in self.sweep):
            raise ConfigError("sweep costs must be non-negative")

    def cost_points(self) -> List[Optional[float]]:
        """Uniform costs to run, or ``[None]`` meaning the model's own costs."""
        return list(self.sweep) if self.sweep else [None]

    def model_at(self, cost: Optional[float]) -> GenerativeModel:
        return self.model if cost is None else self.model.with_costs(cost)


def _line_of(text: str, key: str) -> Optional[int]:
    pattern = re.compile(rf"^\s*(\[{re.escape(key)}\]|{re.escape(key)}\s*=)")
    for n, line in enumerate(text.splitlines(), 1):
        if pattern.match(line):
            return n
    return None


def _fail(text: str, key: str, message: str):
    line = _line_of(text, key)
    where = f"line {line}: " if line else ""
    raise ConfigError(f"{where}{message}")


def _build_model(section: dict, text: str, base_dir: Path) -> GenerativeModel:
    given = [k for k in ("synthetic", "benchmark", "path", "inline") if k in section]
    if len(given) != 1:
        _fail(text, "model", "[model] needs exactly one of synthetic, benchmark, path, inline")
    kind = given[0]
    value = section[kind]
    try:
        if kind == "synthetic":
            spec = dict(value)
            if "alphabet_sizes" in spec:
                spec["alphabet_sizes"] = tuple(spec["alphabet_sizes"])
            unknown = set(spec) - set(SyntheticSpec.__dataclass_fields__)
            if unknown:
                _fail(text, "synthetic", f"unknown synthetic keys {sorted(unknown)}")
            return make_synthetic_medical(SyntheticSpec(**spec))
        if kind == "benchmark":
            spec = dict(value)
            name = spec.pop("name", None)
            if name not in BENCHMARKS:
                _fail(text, "benchmark", f"benchmark name must be one of {sorted(BENCHMARKS)}")
            return BENCHMARKS[name](**spec)
        if kind == "path":
            path = Path(value)
            return load_model(path if path.is_absolute() else base_dir / path)
        return model_from_dict(dict(value))
    except ConfigError:
        raise
    except (TypeError, ValueError, OSError) as exc:
        _fail(text, kind, f"invalid model: {exc}")


def parse_config(text: str, base_dir=".") -> ExperimentConfig:
    """Parse and validate TOML config text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from None
    for section, body in raw.items():
        if section not in _SCHEMA:
            _fail(text, section, f"unknown section [{section}]")
        if not isinstance(body, dict):
            _fail(text, section, f"[{section}] must be a table")
        for key in body:
            if key not in _SCHEMA[section]:
                _fail(text, key, f"unknown key {key!r} in [{section}]")
    if "model" not in raw:
        raise ConfigError("missing [model] table")
    run = raw.get("run", {})
    out = raw.get("output", {})
    for key in ("algorithms", "T", "m"):
        if key not in run:
            raise ConfigError(f"[run] is missing required key {key!r}")

    model = _build_model(raw["model"], text, Path(base_dir))
    if "costs" in run:
        try:
            model = model.with_costs(run["costs"])
        except ValueError as exc:
            _fail(text, "costs", f"invalid costs: {exc}")

    def get(section, key, kind, default):
        value = section.get(key, default)
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            _fail(text, key, f"{key} must be of type {kind.__name__}")
        return value

    try:
        return ExperimentConfig(
            model=model,
            algorithms=tuple(run["algorithms"]),
            T=get(run, "T", int, 1),
            m=get(run, "m", int, 0),
            beta=get(run, "beta", float, 1.0),
            delta=get(run, "delta", float, 0.1),
            seeds=tuple(int(s) for s in run.get("seeds", [0])),
            sweep=tuple(float(c) for c in run.get("sweep", [])),
            radius_scale=get(run, "radius_scale", float, 1.0),
            curves=get(out, "curves", bool, False),
            curve_points=get(out, "curve_points", int, 1000),
        )
    except ConfigError as exc:
        key = str(exc).split()[0]
        line = _line_of(text, key)
        raise ConfigError(f"line {line}: {exc}" if line else str(exc)) from None


def load_config(path) -> ExperimentConfig:
    """Load a config file, or a built-in preset given as ``preset:<name>``."""
    path = str(path)
    if path.startswith("preset:"):
        name = path.split(":", 1)[1]
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return parse_config(PRESETS[name])
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, base_dir=p.parent)


# --------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class RunResult:
    algorithm: str
    cost: Optional[float]
    seed: int
    T: int
    gain: float
    regret: float
    oracle_value: float
    rounds: int
    wall_time: float
    curve: Optional[np.ndarray] = field(default=None, repr=False)


def run_algorithm(algorithm: str, model: GenerativeModel, T: int, m: int, beta: float, delta: float,
                  seed: int, radius_scale: float = 1.0) -> RunTrace:
    """One seeded run. Same seed means the same state and reward-noise streams."""
    rng = np.random.default_rng(seed)
    config = LearnerConfig(m, beta, delta, radius_scale)
    if algorithm == "sim-oos":
        return sim_oos.run(T, model, config, rng)
    if algorithm == "seq-oos":
        return seq_oos.run_seq(T, model, config, rng)
    if algorithm == "contextual-ucb":
        return baselines.contextual_ucb_run(T, model, beta, rng)
    if algorithm == "meta-ucb":
        return baselines.meta_ucb_run(T, model, beta, m, rng)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def oracle_value_for(algorithm: str, model: GenerativeModel, m: int, beta: float) -> float:
    if algorithm == "seq-oos":
        return oracle_seq(model, m, beta).value
    return oracle_sim(model, m, beta).value


def curve_rows(trace: RunTrace, oracle_value: float, points: int) -> np.ndarray:
    """Checkpointed cumulative reward, cost, Gain and regret."""
    idx = np.arange(1, trace.T + 1) if points <= 0 else log_checkpoints(trace.T, points)
    cum_r = np.cumsum(trace.reward)[idx - 1]
    cum_c = np.cumsum(trace.cost)[idx - 1]
    gain = (trace.beta * cum_r - cum_c) / idx
    regret = idx * oracle_value - (trace.beta * cum_r - cum_c)
    return np.column_stack([idx, cum_r, cum_c, gain, regret])


def _job(args) -> RunResult:
    algorithm, model, cost, seed, cfg = args
    T, m, beta, delta, radius_scale, curves, points = cfg
    start = time.perf_counter()
    trace = run_algorithm(algorithm, model, T, m, beta, delta, seed, radius_scale)
    oracle = oracle_value_for(algorithm, model, m, beta)
    curve = curve_rows(trace, oracle, points) if curves else None
    return RunResult(algorithm, cost, seed, T, compute_gain(trace), compute_regret(trace, oracle), oracle,
                     trace.rounds, time.perf_counter() - start, curve)


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        try:
            n = int(value)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {value!r}") from None
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1")
        return n
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _cost_label(cost: Optional[float]) -> str:
    return "model" if cost is None else fmt(cost)


def run_experiment(config: ExperimentConfig, out_dir, workers: Optional[int] = None) -> List[RunResult]:
    """Run every (algorithm, cost point, seed) and write the CSV outputs to ``out_dir``.

    Writes ``results.csv`` (deterministic given the config), ``oracles.csv``,
    ``timings.csv``, ``skipped.csv`` when some runs could not be attempted
    and, when enabled, one file per run under ``curves/``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = default_workers() if workers is None else workers
    cfg = (config.T, config.m, config.beta, config.delta, config.radius_scale, config.curves, config.curve_points)

    jobs, skipped, oracle_rows = [], [], []
    for cost in config.cost_points():
        model = config.model_at(cost)
        o_sim, o_seq = oracle_sim(model, config.m, config.beta), oracle_seq(model, config.m, config.beta)
        oracle_rows.append((_cost_label(cost), fmt(o_sim.value), " ".join(map(str, o_sim.policy.obs_set)),
                            fmt(o_seq.value)))
        for algorithm in config.algorithms:
            if algorithm == "meta-ucb":
                n = baselines.count_policies(model.alphabets, model.A, config.m)
                if n > baselines.MAX_META_ARMS:
                    log.warning("skipping meta-ucb at cost %s: %d meta-actions", _cost_label(cost), n)
                    skipped.extend((algorithm, _cost_label(cost), seed, f"policy-space overflow ({n} arms)")
                                   for seed in config.seeds)
                    continue
            for seed in config.seeds:
                jobs.append((algorithm, model, cost, seed, cfg))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]

    order = {a: k for k, a in enumerate(config.algorithms)}
    results.sort(key=lambda r: (order[r.algorithm], -1 if r.cost is None else r.cost, r.seed))
    write_results(out_dir / "results.csv", results)
    _write_csv(out_dir / "timings.csv", TIMING_COLUMNS,
               [(r.algorithm, _cost_label(r.cost), r.seed, fmt(r.wall_time)) for r in results])
    _write_csv(out_dir / "oracles.csv", ORACLE_COLUMNS, oracle_rows)
    if skipped:
        _write_csv(out_dir / "skipped.csv", ("algorithm", "cost", "seed", "reason"), skipped)
    if config.curves:
        curve_dir = out_dir / "curves"
        curve_dir.mkdir(exist_ok=True)
        for r in results:
            name = f"{r.algorithm}_c{_cost_label(r.cost)}_s{r.seed}.csv"
            _write_csv(curve_dir / name, CURVE_COLUMNS,
                       [(int(row[0]), fmt(row[1]), fmt(row[2]), fmt(row[3]), fmt(row[4])) for row in r.curve])
    return results


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def write_results(path: Path, results: Sequence[RunResult]) -> None:
    _write_csv(Path(path), RESULT_COLUMNS, [
        (r.algorithm, _cost_label(r.cost), r.seed, r.T, fmt(r.gain), fmt(r.regret), fmt(r.oracle_value), r.rounds)
        for r in results
    ])


def read_results(path) -> List[dict]:
    """Parse ``results.csv`` back into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "algorithm": row["algorithm"],
                "cost": None if row["cost"] == "model" else float(row["cost"]),
                "seed": int(row["seed"]),
                "T": int(row["T"]),
                "gain": float(row["gain"]),
                "regret": float(row["regret"]),
                "oracle_value": float(row["oracle_value"]),
                "rounds": int(row["rounds"]),
            })
    return rows
