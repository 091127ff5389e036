"""Experiment driver: data generation, training, sampling, evaluation,
bound verification, hyperparameter search, and the trend pipelines.

Subcommands: gen-data, train, sample, eval, verify, sweep, experiment.
Config files are INI-style (key = value grouped in sections); every run
writes its resolved config beside its outputs.  Exit codes: 0 success,
2 config error, 3 state-space guard violation, 4 IO error.

Trial seeds are derived as sha256(base_seed:model_index:trial_index), so a
trial reuses its seed across training-set sizes (nested datasets) while
trials stay independent.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import (
    GUARD_BITS_DEFAULT,
    SampleSet,
    StateSpaceTooLargeError,
    empirical_from_samples,
    index_bits,
    load_samples,
    save_samples,
)
from .forward import NoiseSchedule
from .metrics import evaluate
from .models import (
    EAParams,
    ea_ising,
    ea_potts,
    exact_distribution,
    load_model,
    sample_exact,
    sample_glauber,
    save_model,
)
from .neurise import (
    TrainConfig,
    data_fingerprint,
    load_checkpoint,
    random_search,
    save_checkpoint,
    train,
)
from .reverse import reverse_sample
from .theory import Perturbation, verify_error_bound, verify_init_error

EXPERIMENT_NAMES = ("ea-trend", "potts-trend", "harsh-vs-soft", "local-vs-global")
DEFAULT_GRID = (100, 316, 1000, 3162, 10_000, 31_623, 100_000)


class ConfigError(ValueError):
    """Bad or missing configuration; mapped to exit code 2."""


def derive_seed(base_seed: int, *parts) -> int:
    """Deterministic child seed from a base seed and labels."""
    text = ":".join([str(base_seed)] + [str(p) for p in parts])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little") >> 1


@dataclass
class RunRecord:
    """Everything needed to reproduce one run, plus its results."""

    command: str
    config: dict
    metrics: list = field(default_factory=list)
    wall_seconds: float = 0.0
    checkpoint: str | None = None

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config,
                "metrics": self.metrics, "wall_seconds": self.wall_seconds,
                "checkpoint": self.checkpoint}

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# config handling


def read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if path is not None:
        found = parser.read(str(path))
        if not found:
            raise ConfigError(f"config file not found: {path}")
    return parser

def _get(cfg, section, key, cast, default=None, required=False):
    try:
        if cfg.has_option(section, key):
            raw = cfg.get(section, key)
            if cast is bool:
                return cfg.getboolean(section, key)
            return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc
    if required:
        raise ConfigError(f"missing required config entry [{section}] {key}")
    return default


def _int_list(raw: str):
    return [int(float(tok)) for tok in raw.replace(",", " ").split()]


def _float_list(raw: str):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def build_model(cfg, base_seed: int):
    kind = _get(cfg, "model", "kind", str, default="ea-ising")
    seed = _get(cfg, "model", "seed", int, default=derive_seed(base_seed, "model"))
    if kind == "ea-ising":
        L = _get(cfg, "model", "l", int, default=4)
        J = _get(cfg, "model", "j", float, default=1.2)
        h = _get(cfg, "model", "h", float, default=0.05)
        return ea_ising(EAParams(L, J, h, seed))
    if kind == "ea-potts":
        L = _get(cfg, "model", "l", int, default=2)
        p = _get(cfg, "model", "p", int, default=3)
        J = _get(cfg, "model", "j", float, default=1.2)
        h = _get(cfg, "model", "h", float, default=0.05)
        return ea_potts(L, p, J, h, seed)
    if kind == "file":
        path = _get(cfg, "model", "path", str, required=True)
        return load_model(path)
    raise ConfigError(f"unknown model kind {kind!r}")


def build_schedule(cfg, model) -> NoiseSchedule:
    epsilon = _get(cfg, "schedule", "epsilon", float, default=0.5)
    sweeps = _get(cfg, "schedule", "sweeps", int, default=2)
    try:
        return NoiseSchedule.from_sweeps(model.p, model.q, epsilon=epsilon,
                                         sweeps=sweeps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_train_config(cfg, seed_default: int = 0) -> TrainConfig:
    try:
        return TrainConfig(
            depth=_get(cfg, "train", "depth", int, default=2),
            width=_get(cfg, "train", "width", int, default=64),
            learning_rate=_get(cfg, "train", "learning_rate", float, default=3e-3),
            weight_decay=_get(cfg, "train", "weight_decay", float, default=1e-6),
            batch_size=_get(cfg, "train", "batch_size", int, default=256),
            epochs=_get(cfg, "train", "epochs", int, default=4),
            seed=_get(cfg, "train", "seed", int, default=seed_default),
            topology=_get(cfg, "train", "topology", str, default="global"),
            train_all_coordinates=_get(cfg, "train", "train_all_coordinates",
                                       bool, default=False),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_resolved(cfg, out_dir: Path, extra: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = configparser.ConfigParser()
    for section in cfg.sections():
        resolved.add_section(section)
        for key, value in cfg.items(section):
            resolved.set(section, key, value)
    if extra:
        for section, values in extra.items():
            if not resolved.has_section(section):
                resolved.add_section(section)
            for key, value in values.items():
                resolved.set(section, key, str(value))
    with (out_dir / "resolved.ini").open("w") as fh:
        resolved.write(fh)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_data(cfg, out_dir: Path, seed: int, guard_bits: int) -> dict:
    t0 = time.monotonic()
    model = build_model(cfg, seed)
    n_train = _get(cfg, "data", "n_train", int, default=10_000)
    n_test = _get(cfg, "data", "n_test", int, default=100_000)
    sampler = _get(cfg, "data", "sampler", str, default="auto")
    data_seed = _get(cfg, "data", "seed", int, default=derive_seed(seed, "data"))

    if sampler not in ("auto", "exact", "glauber"):
        raise ConfigError(f"unknown sampler {sampler!r}")
    within_guard = index_bits(model.q, model.p) <= guard_bits
    if sampler == "exact" and not within_guard:
        raise StateSpaceTooLargeError(
            f"exact sampler requested but q={model.q}, p={model.p} exceeds the "
            f"{guard_bits}-bit guard")
    use_exact = within_guard if sampler == "auto" else sampler == "exact"

    if use_exact:
        dist = exact_distribution(model, guard_bits)
        train_set = sample_exact(dist, n_train, data_seed)
        test_set = sample_exact(dist, n_test, derive_seed(data_seed, "test"))
    else:
        burn_in = _get(cfg, "data", "burn_in", int, default=200)
        thinning = _get(cfg, "data", "thinning", int, default=2)
        chains = _get(cfg, "data", "chains", int, default=32)
        train_set = sample_glauber(model, n_train, burn_in, thinning,
                                   data_seed, chains=chains)
        test_set = sample_glauber(model, n_test, burn_in, thinning,
                                  derive_seed(data_seed, "test"), chains=chains)

    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(out_dir / "model.txt", model)
    save_samples(out_dir / "train.samples", train_set)
    save_samples(out_dir / "test.samples", test_set)
    write_resolved(cfg, out_dir, {"resolved": {
        "sampler": "exact" if use_exact else "glauber",
        "data_seed": data_seed, "n_train": n_train, "n_test": n_test}})
    record = RunRecord("gen-data", {"seed": seed, "guard_bits": guard_bits},
                       wall_seconds=time.monotonic() - t0)
    record.write(out_dir / "run.json")
    return {"model": str(out_dir / "model.txt"),
            "train": str(out_dir / "train.samples"),
            "test": str(out_dir / "test.samples")}


def cmd_train(cfg, out_dir: Path, seed: int, guard_bits: int) -> dict:
    t0 = time.monotonic()
    train_path = _get(cfg, "data", "train_path", str, required=True)
    samples = load_samples(train_path)
    schedule = NoiseSchedule.from_sweeps(
        samples.p, samples.q,
        epsilon=_get(cfg, "schedule", "epsilon", float, default=0.5),
        sweeps=_get(cfg, "schedule", "sweeps", int, default=2))
    train_cfg = build_train_config(cfg, seed_default=derive_seed(seed, "train"))
    history = []
    model = train(samples, schedule, train_cfg, history=history)

    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "checkpoint.npz"
    save_checkpoint(ckpt_path, model, train_cfg,
                    extra={"train_seed": train_cfg.seed,
                           "data_fingerprint": data_fingerprint(samples)})
    with (out_dir / "loss_curve.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(history):
            writer.writerow([epoch, f"{loss:.10g}"])
    write_resolved(cfg, out_dir)
    record = RunRecord("train", {"train_path": train_path,
                                 "train_config": dataclasses.asdict(train_cfg),
                                 "schedule": dataclasses.asdict(schedule)},
                       wall_seconds=time.monotonic() - t0,
                       checkpoint=str(ckpt_path))
    record.write(out_dir / "run.json")
    return {"checkpoint": str(ckpt_path)}


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_sample(checkpoint_path, n: int, seed: int, out_path) -> dict:
    model, _meta = load_checkpoint(checkpoint_path)
    generated = reverse_sample(model, model.schedule, n, init="uniform", rng=seed)
    generated = SampleSet(
        generated.q, generated.p, generated.rows,
        provenance=(f"{generated.provenance} seed={seed} "
                    f"checkpoint_sha256={_file_sha256(Path(checkpoint_path))}"))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_samples(out_path, generated)
    return {"samples": str(out_path)}


def _is_model_file(path: Path) -> bool:
    try:
        with path.open() as fh:
            return fh.readline().startswith("sitediff-model")
    except (OSError, UnicodeDecodeError):
        return False


KNOWN_METRICS = ("tv", "cross_correlation_error", "mmd")


def cmd_eval(generated_path, reference_path, metric_names, out_path,
             seed: int, guard_bits: int) -> RunRecord:
    t0 = time.monotonic()
    unknown = [m for m in metric_names if m not in KNOWN_METRICS]
    if unknown:
        raise ConfigError(f"unknown metrics {unknown}; choose from {KNOWN_METRICS}")
    generated = load_samples(generated_path)
    reference_path = Path(reference_path)
    reports = []
    if _is_model_file(reference_path):
        model = load_model(reference_path)
        dist = exact_distribution(model, guard_bits)
        ref_samples = None
        for name in metric_names:
            if name == "tv":
                reports.append(evaluate(
                    "tv", empirical_from_samples(generated), dist, mode="exact"))
            else:
                if ref_samples is None:
                    ref_samples = sample_exact(dist, generated.n,
                                               derive_seed(seed, "eval-ref"))
                reports.append(evaluate(name, generated, ref_samples,
                                        reference="model-exact-sampler",
                                        **({"max_points": 4096, "seed": seed}
                                           if name == "mmd" else {})))
    else:
        reference = load_samples(reference_path)
        for name in metric_names:
            if name == "tv":
                reports.append(evaluate("tv", empirical_from_samples(generated),
                                        empirical_from_samples(reference),
                                        mode="empirical"))
            else:
                reports.append(evaluate(name, generated, reference,
                                        **({"max_points": 4096, "seed": seed}
                                           if name == "mmd" else {})))
    record = RunRecord("eval",
                       {"generated": str(generated_path),
                        "reference": str(reference_path), "seed": seed},
                       metrics=[r.to_dict() for r in reports],
                       wall_seconds=time.monotonic() - t0)
    if out_path is not None:
        record.write(Path(out_path))
    return record


def cmd_verify(cfg, out_dir: Path, seed: int, guard_bits: int) -> list:
    t0 = time.monotonic()
    model = build_model(cfg, seed)
    schedule = build_schedule(cfg, model)
    magnitudes = _float_list(_get(cfg, "verify", "magnitudes", str,
                                  default="0.0 0.01 0.05 0.1"))
    draws = _get(cfg, "verify", "draws", int, default=10)
    mode = _get(cfg, "verify", "mode", str, default="mix-with-uniform")
    init_sizes = _int_list(_get(cfg, "verify", "init_sizes", str,
                                default="100 1000 10000"))
    reports = []
    for magnitude in magnitudes:
        for draw in range(draws):
            pert = Perturbation(magnitude, seed=derive_seed(seed, magnitude, draw),
                                mode=mode)
            reports.append(verify_error_bound(model, schedule, pert, guard_bits))
    for size in init_sizes:
        reports.append(verify_init_error(model, schedule, size,
                                         derive_seed(seed, "init", size),
                                         guard_bits))
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = [r.to_dict() for r in reports]
    (out_dir / "bound_reports.json").write_text(json.dumps(payload, indent=2) + "\n")
    write_resolved(cfg, out_dir, {"resolved": {
        "draws": draws, "wall_seconds": f"{time.monotonic() - t0:.3f}"}})
    return reports


def cmd_sweep(cfg, out_dir: Path, seed: int, guard_bits: int, budget: int) -> dict:
    t0 = time.monotonic()
    train_path = _get(cfg, "data", "train_path", str, default=None)
    if train_path is None:
        model = build_model(cfg, seed)
        dist = exact_distribution(model, guard_bits)
        n_train = _get(cfg, "data", "n_train", int, default=10_000)
        samples = sample_exact(dist, n_train, derive_seed(seed, "sweep-data"))
    else:
        samples = load_samples(train_path)
    schedule = NoiseSchedule.from_sweeps(
        samples.p, samples.q,
        epsilon=_get(cfg, "schedule", "epsilon", float, default=0.5),
        sweeps=_get(cfg, "schedule", "sweeps", int, default=2))
    include_schedule = _get(cfg, "sweep", "include_schedule", bool, default=False)
    epochs = _get(cfg, "sweep", "epochs", int, default=2)
    result = random_search(samples, schedule, budget, seed,
                           include_schedule=include_schedule, epochs=epochs)

    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "leaderboard.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "score", "depth", "width", "learning_rate",
                         "weight_decay", "batch_size", "epsilon", "T"])
        for row in sorted(result.trials, key=lambda r: r["score"]):
            c = row["config"]
            writer.writerow([row["trial"], f"{row['score']:.8g}", c["depth"],
                             c["width"], f"{c['learning_rate']:.6g}",
                             f"{c['weight_decay']:.6g}", c["batch_size"],
                             row["epsilon"], row["T"]])
    save_checkpoint(out_dir / "best.npz", result.model, result.config,
                    extra={"sweep_seed": seed, "budget": budget})
    best = configparser.ConfigParser()
    best.read_dict({"train": {k: str(v) for k, v in
                              dataclasses.asdict(result.config).items()},
                    "schedule": {"epsilon": str(result.schedule.epsilon),
                                 "sweeps": str(result.schedule.T // result.schedule.q)}})
    with (out_dir / "best_config.ini").open("w") as fh:
        best.write(fh)
    write_resolved(cfg, out_dir, {"resolved": {
        "budget": budget, "wall_seconds": f"{time.monotonic() - t0:.3f}"}})
    return {"best_config": dataclasses.asdict(result.config),
            "leaderboard": str(out_dir / "leaderboard.csv")}


# ---------------------------------------------------------------------------
# experiment pipelines


DEFAULT_TARGET_UPDATES = 12_000


def _auto_epochs(n_pairs: int, batch_size: int,
                 target_updates: int = DEFAULT_TARGET_UPDATES,
                 lo: int = 1, hi: int = 300) -> int:
    """Epoch count that lands near a fixed optimizer-update budget.

    Training cost is dominated by update count, so the trend pipelines aim
    for the same (converged) budget at every training-set size; the cap
    keeps tiny datasets from cycling indefinitely.
    """
    per_epoch = max(1, -(-n_pairs // batch_size))
    return int(np.clip(-(-target_updates // per_epoch), lo, hi))


def run_trend_trial(model, dist, schedule, n_train: int, trial_seed: int,
                    train_cfg: TrainConfig, test_n: int, guard_bits: int,
                    topology: str = "global", auto_epochs: bool = False,
                    target_updates: int = DEFAULT_TARGET_UPDATES) -> dict:
    """One (train-size, trial) cell: sample data, train, generate, score."""
    t0 = time.monotonic()
    train_set = sample_exact(dist, n_train, trial_seed)
    epochs = (_auto_epochs(schedule.T * n_train, train_cfg.batch_size, target_updates)
              if auto_epochs else train_cfg.epochs)
    cfg = replace(train_cfg, epochs=epochs, seed=derive_seed(trial_seed, "train"),
                  topology=topology)
    learned = train(train_set, schedule, cfg)
    generated = reverse_sample(learned, schedule, test_n, init="uniform",
                               rng=derive_seed(trial_seed, "generate"))
    reference = sample_exact(dist, test_n, derive_seed(trial_seed, "reference"))
    tv_value = evaluate("tv", empirical_from_samples(generated), dist).value
    cc_value = evaluate("cross_correlation_error", generated, reference).value
    return {"tv": tv_value, "cross_correlation_error": cc_value,
            "wall_seconds": time.monotonic() - t0, "epochs": epochs}


def _experiment_variants(name: str, cfg, model, base_epsilon: float,
                         base_sweeps: int):
    """(variant label, schedule, topology) list for the named pipeline."""
    q, p = model.q, model.p
    if name in ("ea-trend", "potts-trend"):
        return [("default",
                 NoiseSchedule.from_sweeps(p, q, base_epsilon, base_sweeps),
                 "global")]
    if name == "harsh-vs-soft":
        return [("harsh[eps=0,sweeps=1]",
                 NoiseSchedule.from_sweeps(p, q, 0.0, 1), "global"),
                ("soft[eps=0.5,sweeps=2]",
                 NoiseSchedule.from_sweeps(p, q, 0.5, 2), "global")]
    if name == "local-vs-global":
        sched = NoiseSchedule.from_sweeps(p, q, base_epsilon, base_sweeps)
        return [("global", sched, "global"), ("per-step", sched, "per-step")]
    raise ConfigError(f"unknown experiment {name!r}; choose from {EXPERIMENT_NAMES}")


def cmd_experiment(name: str, cfg, out_dir: Path, seed: int, guard_bits: int,
                   threads: int = 1) -> Path:
    t0 = time.monotonic()
    if not cfg.has_section("model"):
        cfg.add_section("model")
    if name == "potts-trend" and not cfg.has_option("model", "kind"):
        cfg.set("model", "kind", "ea-potts")
    if name == "harsh-vs-soft" and not cfg.has_option("model", "l"):
        cfg.set("model", "l", "3")
    model = build_model(cfg, seed)
    dist = exact_distribution(model, guard_bits)

    grid = _int_list(_get(cfg, "experiment", "grid", str,
                          default=" ".join(str(n) for n in DEFAULT_GRID)))
    trials = _get(cfg, "experiment", "trials", int, default=3)
    test_n = _get(cfg, "experiment", "test_n", int, default=100_000)
    epsilon = _get(cfg, "schedule", "epsilon", float, default=0.5)
    sweeps = _get(cfg, "schedule", "sweeps", int, default=2)
    train_cfg = build_train_config(cfg)
    auto_epochs = not cfg.has_option("train", "epochs")
    target_updates = _get(cfg, "experiment", "target_updates", int,
                          default=DEFAULT_TARGET_UPDATES)

    variants = _experiment_variants(name, cfg, model, epsilon, sweeps)
    tasks = []
    for variant, schedule, topology in variants:
        for n_train in grid:
            for trial in range(trials):
                tasks.append((variant, schedule, topology, n_train, trial,
                              derive_seed(seed, 0, trial)))

    def run_task(task):
        variant, schedule, topology, n_train, trial, trial_seed = task
        result = run_trend_trial(model, dist, schedule, n_train, trial_seed,
                                 train_cfg, test_n, guard_bits, topology,
                                 auto_epochs=auto_epochs,
                                 target_updates=target_updates)
        return [(variant, n_train, trial, trial_seed, metric, result[metric],
                 result["wall_seconds"])
                for metric in ("tv", "cross_correlation_error")]

    rows = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for chunk in pool.map(run_task, tasks):
                rows.extend(chunk)
    else:
        for task in tasks:
            rows.extend(run_task(task))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[4]))

    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.csv"
    with results_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "trial", "N_train", "metric", "value",
                         "seed", "wall_seconds"])
        for variant, n_train, trial, trial_seed, metric, value, wall in rows:
            writer.writerow([variant, trial, n_train, metric,
                             f"{value:.8g}", trial_seed, f"{wall:.3f}"])
    with (out_dir / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "N_train", "metric", "median", "std", "trials"])
        keys = sorted({(r[0], r[1], r[4]) for r in rows})
        for variant, n_train, metric in keys:
            values = [r[5] for r in rows
                      if (r[0], r[1], r[4]) == (variant, n_train, metric)]
            writer.writerow([variant, n_train, metric,
                             f"{np.median(values):.8g}", f"{np.std(values):.8g}",
                             len(values)])
    write_resolved(cfg, out_dir, {"resolved": {
        "experiment": name, "seed": seed,
        "wall_seconds": f"{time.monotonic() - t0:.3f}"}})
    return results_path


# ---------------------------------------------------------------------------
# entry point


def _add_common(sub):
    sub.add_argument("--config", type=Path, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", type=Path, default=Path("runs/latest"))
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--guard-bits", type=int, default=GUARD_BITS_DEFAULT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sitediff",
        description="Discrete diffusion with single-site conditionals")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("gen-data", "train", "verify"):
        _add_common(subs.add_parser(name))
    sample = subs.add_parser("sample")
    sample.add_argument("--checkpoint", type=Path, required=True)
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", type=Path, required=True)
    evalp = subs.add_parser("eval")
    evalp.add_argument("--generated", type=Path, required=True)
    evalp.add_argument("--reference", type=Path, required=True)
    evalp.add_argument("--metrics", type=str, default="tv,cross_correlation_error")
    evalp.add_argument("--seed", type=int, default=0)
    evalp.add_argument("--out", type=Path, default=None)
    evalp.add_argument("--guard-bits", type=int, default=GUARD_BITS_DEFAULT)
    sweep = subs.add_parser("sweep")
    _add_common(sweep)
    sweep.add_argument("--budget", type=int, default=10)
    experiment = subs.add_parser("experiment")
    _add_common(experiment)
    experiment.add_argument("--name", type=str, required=True,
                            choices=EXPERIMENT_NAMES)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-data":
            paths = cmd_gen_data(read_config(args.config), args.out, args.seed,
                                 args.guard_bits)
            print(json.dumps(paths))
        elif args.command == "train":
            paths = cmd_train(read_config(args.config), args.out, args.seed,
                              args.guard_bits)
            print(json.dumps(paths))
        elif args.command == "sample":
            paths = cmd_sample(args.checkpoint, args.n, args.seed, args.out)
            print(json.dumps(paths))
        elif args.command == "eval":
            record = cmd_eval(args.generated, args.reference,
                              [m.strip() for m in args.metrics.split(",") if m.strip()],
                              args.out, args.seed, args.guard_bits)
            print(json.dumps(record.to_dict()))
        elif args.command == "verify":
            reports = cmd_verify(read_config(args.config), args.out, args.seed,
                                 args.guard_bits)
            holds = sum(r.holds for r in reports)
            print(json.dumps({"reports": len(reports), "holds": holds}))
            if holds != len(reports):
                print("warning: some bounds violated", file=sys.stderr)
        elif args.command == "sweep":
            result = cmd_sweep(read_config(args.config), args.out, args.seed,
                               args.guard_bits, args.budget)
            print(json.dumps(result))
        elif args.command == "experiment":
            path = cmd_experiment(args.name, read_config(args.config), args.out,
                                  args.seed, args.guard_bits, args.threads)
            print(json.dumps({"results": str(path)}))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StateSpaceTooLargeError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
