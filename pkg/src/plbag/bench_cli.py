"""Experiment harness and command-line interface.

``bench run`` executes a (noise level x repetition) grid of train/test
splits for one dataset or synthetic scenario, classifies the held-out
points with each configured method, and writes ``results.csv`` plus
``summary.csv``.  ``bench synth`` emits a generated dataset as CSV, and
``bench theory`` prints identifiability, alignment and advantage reports
for a serialized finite-support distribution.

Config files are flat ``key = value`` text with sections ``[experiment]``,
``[plaknn]``, ``[synth]`` and ``[pipeline]``; unknown sections or keys are
errors.  The meaning of the noise grid depends on the data source: for CSV
datasets each level is the truth-removal rate, for synthetic scenarios it
is the anchor-corruption probability used during bag generation.

Every stochastic choice of repetition r flows from seed ``base_seed + r``,
so reruns of the same config produce byte-identical CSV files (wall-clock
timings are only written when ``timings = true``).
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import knn_index, preprocess, theory
from .baselines import aknn_batch, fixed_k_batch
from .core import (
    Atom,
    BagGenMatrix,
    DataFormatError,
    DiscreteDistribution,
    LabelDistribution,
    LabelSpace,
    PartialDataset,
    load_dataset,
    save_dataset,
)
from .plaknn import PlaknnConfig, classify_batch_detail
from .synth import (
    AnalyticScenario,
    SynthBagConfig,
    analytic_scenario,
    make_bags,
    remove_truth_noise,
)

METHODS = ("plaknn", "aknn", "fixed_k")


class ConfigError(ValueError):
    """A config file names an unknown key or an invalid value."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str | None = None
    dataset: str | None = None
    methods: tuple[str, ...] = ("plaknn",)
    fixed_k: int = 10
    noise_grid: tuple[float, ...] = (0.0,)
    train_fraction: float = 0.8
    repetitions: int = 20
    base_seed: int = 0
    n_samples: int = 2000
    timings: bool = False
    plaknn: PlaknnConfig = field(default_factory=PlaknnConfig)
    synth: SynthBagConfig = field(default_factory=SynthBagConfig)
    pipeline: preprocess.PipelineConfig | None = None

    def __post_init__(self) -> None:
        if (self.scenario is None) == (self.dataset is None):
            raise ConfigError("exactly one of 'scenario' and 'dataset' must be set")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        if self.fixed_k < 1:
            raise ConfigError(f"fixed_k must be >= 1, got {self.fixed_k}")
        for v in self.noise_grid:
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"noise level {v} outside [0, 1]")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.scenario is not None and self.n_samples < 10:
            raise ConfigError(f"n_samples must be >= 10, got {self.n_samples}")


@dataclass(frozen=True)
class ResultRow:
    method: str
    noise: float
    repetition: int
    seed: int
    n_train: int
    error_rate: float
    mean_iterations: float | None
    wall_time_ms: float


@dataclass(frozen=True)
class SummaryRow:
    method: str
    noise: float
    mean_error: float
    std_error: float
    n_reps: int


@dataclass(frozen=True)
class PredictionRow:
    method: str
    noise: float
    repetition: int
    index: int
    truth: int
    predicted: int


@dataclass
class RunResult:
    rows: list[ResultRow]
    summary: list[SummaryRow]
    predictions: list[PredictionRow] | None


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------


def _split(n: int, fraction: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n_train = min(n - 1, max(1, int(round(fraction * n))))
    perm = rng.permutation(n)
    return perm[:n_train], perm[n_train:]


def _prepare_rep(
    config: ExperimentConfig,
    source: PartialDataset | AnalyticScenario,
    noise: float,
    rep: int,
) -> tuple[PartialDataset, np.ndarray, np.ndarray]:
    """Build (train dataset, test features, test truths) for one repetition."""
    seed = config.base_seed + rep
    rng = np.random.default_rng(seed)
    if isinstance(source, PartialDataset):
        train_idx, test_idx = _split(source.n, config.train_fraction, rng)
        train = source.subset(train_idx)
        if noise > 0.0:
            train = remove_truth_noise(train, noise, seed=int(rng.integers(2**63)))
        test_x = source.features[test_idx]
        test_y = source.truths[test_idx]
    else:
        x, y = source.sample_points(config.n_samples, rng)
        train_idx, test_idx = _split(config.n_samples, config.train_fraction, rng)
        if source.has_bag_process:
            masks = source.bag_masks_for(x[train_idx], y[train_idx], rng, noise_nu=noise)
            train = PartialDataset(x[train_idx], masks, source.label_space, truths=y[train_idx])
        else:
            train = make_bags(
                x[train_idx],
                y[train_idx],
                source.label_space,
                replace(config.synth, noise_nu=noise, seed=int(rng.integers(2**63))),
            )
        test_x = x[test_idx]
        test_y = y[test_idx]

    if config.pipeline is not None:
        fitted = preprocess.fit(train.features, config.pipeline)
        train = train.with_features(fitted.transformed_train)
        test_x = preprocess.transform(fitted, test_x)
    return train, test_x, test_y


def _classify_with(
    method: str,
    config: ExperimentConfig,
    train: PartialDataset,
    index: knn_index.NeighborIndex,
    test_x: np.ndarray,
) -> tuple[np.ndarray, float | None]:
    if method == "plaknn":
        detail = classify_batch_detail(train, index, test_x, config.plaknn)
        return detail.labels, float(detail.iterations.mean())
    if method == "aknn":
        return aknn_batch(train, index, test_x, config.plaknn), None
    return fixed_k_batch(train, index, test_x, config.fixed_k), None


def _run_job(
    config: ExperimentConfig,
    source: PartialDataset | AnalyticScenario,
    noise: float,
    rep: int,
    dump_predictions: bool,
) -> tuple[list[ResultRow], list[PredictionRow]]:
    train, test_x, test_y = _prepare_rep(config, source, noise, rep)
    index = knn_index.build(train.features)
    rows: list[ResultRow] = []
    preds: list[PredictionRow] = []
    for method in config.methods:
        started = time.perf_counter()
        labels, mean_iters = _classify_with(method, config, train, index, test_x)
        wall_ms = (time.perf_counter() - started) * 1000.0
        rows.append(
            ResultRow(
                method=method,
                noise=noise,
                repetition=rep,
                seed=config.base_seed + rep,
                n_train=train.n,
                error_rate=float((labels != test_y).mean()),
                mean_iterations=mean_iters,
                wall_time_ms=wall_ms,
            )
        )
        if dump_predictions:
            preds.extend(
                PredictionRow(method, noise, rep, i, int(test_y[i]), int(labels[i]))
                for i in range(test_y.shape[0])
            )
    return rows, preds


def _load_source(config: ExperimentConfig) -> PartialDataset | AnalyticScenario:
    if config.dataset is not None:
        data = load_dataset(config.dataset)
        if data.truths is None:
            raise DataFormatError(
                f"{config.dataset}: experiments need the ground-truth column 'y'"
            )
        return data
    return analytic_scenario(config.scenario)


def run(
    config: ExperimentConfig,
    dump_predictions: bool = False,
    threads: int = 1,
) -> RunResult:
    """Execute the full (noise x repetition) grid and summarize it."""
    source = _load_source(config)
    jobs = [(noise, rep) for noise in config.noise_grid for rep in range(config.repetitions)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(
                pool.map(lambda j: _run_job(config, source, j[0], j[1], dump_predictions), jobs)
            )
    else:
        outputs = [_run_job(config, source, noise, rep, dump_predictions) for noise, rep in jobs]

    rows = [row for out, _ in outputs for row in out]
    rows.sort(key=lambda r: (r.method, r.noise, r.repetition))
    predictions = None
    if dump_predictions:
        predictions = [p for _, out in outputs for p in out]
        predictions.sort(key=lambda p: (p.method, p.noise, p.repetition, p.index))

    summary: list[SummaryRow] = []
    for method in config.methods:
        for noise in config.noise_grid:
            errs = [r.error_rate for r in rows if r.method == method and r.noise == noise]
            mean = float(np.mean(errs))
            std = float(np.std(errs, ddof=1)) if len(errs) > 1 else 0.0
            summary.append(SummaryRow(method, noise, mean, std, len(errs)))
    return RunResult(rows=rows, summary=summary, predictions=predictions)


def _fmt(value: float) -> str:
    return format(value, ".6g")


def emit(result: RunResult, out_dir: str | Path, timings: bool = False) -> None:
    """Write results.csv and summary.csv (and predictions.csv when dumped).

    Timing columns are left empty unless requested so that reruns of the
    same config produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "results.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "method",
                "noise",
                "repetition",
                "seed",
                "n_train",
                "error_rate",
                "mean_iterations",
                "wall_time_ms",
            ]
        )
        for r in result.rows:
            writer.writerow(
                [
                    r.method,
                    _fmt(r.noise),
                    r.repetition,
                    r.seed,
                    r.n_train,
                    _fmt(r.error_rate),
                    "" if r.mean_iterations is None else _fmt(r.mean_iterations),
                    _fmt(r.wall_time_ms) if timings else "",
                ]
            )
    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "noise", "mean_error", "std_error", "n_reps"])
        for s in result.summary:
            writer.writerow([s.method, _fmt(s.noise), _fmt(s.mean_error), _fmt(s.std_error), s.n_reps])
    if result.predictions is not None:
        with (out / "predictions.csv").open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["method", "noise", "repetition", "index", "truth", "predicted"])
            for p in result.predictions:
                writer.writerow(
                    [p.method, _fmt(p.noise), p.repetition, p.index, p.truth, p.predicted]
                )


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

_SECTION_KEYS = {
    "experiment": {
        "scenario",
        "dataset",
        "methods",
        "fixed_k",
        "noise_grid",
        "train_fraction",
        "repetitions",
        "base_seed",
        "n_samples",
        "timings",
    },
    "plaknn": {"c1", "delta", "T", "mode", "d0"},
    "synth": {"n_clusters", "alpha_max", "noise_nu", "seed"},
    "pipeline": {"variant", "smoothing_alpha", "smoothing_k", "density_k"},
}


def _parse_sections(path: Path) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTION_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"{path}:{lineno}: key outside any section")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SECTION_KEYS[current]:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in section [{current}]")
        if key in sections[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        sections[current][key] = value.strip()
    return sections


def _to_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {value!r}")


def _to_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from None


def _to_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {value!r}") from None


def parse_config(path: str | Path) -> ExperimentConfig:
    """Parse a config file into an :class:`ExperimentConfig`."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    sections = _parse_sections(path)

    exp = sections.get("experiment", {})
    kwargs: dict = {}
    if "scenario" in exp:
        kwargs["scenario"] = exp["scenario"]
    if "dataset" in exp:
        kwargs["dataset"] = exp["dataset"]
    if "methods" in exp:
        kwargs["methods"] = tuple(m.strip() for m in exp["methods"].split(",") if m.strip())
    if "fixed_k" in exp:
        kwargs["fixed_k"] = _to_int(exp["fixed_k"], "fixed_k")
    if "noise_grid" in exp:
        kwargs["noise_grid"] = tuple(
            _to_float(v.strip(), "noise_grid") for v in exp["noise_grid"].split(",") if v.strip()
        )
    if "train_fraction" in exp:
        kwargs["train_fraction"] = _to_float(exp["train_fraction"], "train_fraction")
    if "repetitions" in exp:
        kwargs["repetitions"] = _to_int(exp["repetitions"], "repetitions")
    if "base_seed" in exp:
        kwargs["base_seed"] = _to_int(exp["base_seed"], "base_seed")
    if "n_samples" in exp:
        kwargs["n_samples"] = _to_int(exp["n_samples"], "n_samples")
    if "timings" in exp:
        kwargs["timings"] = _to_bool(exp["timings"], "timings")

    pl = sections.get("plaknn", {})
    plaknn_kwargs: dict = {}
    if "c1" in pl:
        plaknn_kwargs["c1"] = _to_float(pl["c1"], "c1")
    if "delta" in pl:
        plaknn_kwargs["delta"] = _to_float(pl["delta"], "delta")
    if "T" in pl:
        plaknn_kwargs["T"] = _to_int(pl["T"], "T")
    if "mode" in pl:
        plaknn_kwargs["mode"] = pl["mode"]
    if "d0" in pl:
        plaknn_kwargs["d0"] = _to_int(pl["d0"], "d0")
    try:
        kwargs["plaknn"] = PlaknnConfig(**plaknn_kwargs)
    except ValueError as exc:
        raise ConfigError(f"section [plaknn]: {exc}") from exc

    sy = sections.get("synth", {})
    synth_kwargs: dict = {}
    if "n_clusters" in sy:
        synth_kwargs["n_clusters"] = _to_int(sy["n_clusters"], "n_clusters")
    if "alpha_max" in sy:
        synth_kwargs["alpha_max"] = _to_float(sy["alpha_max"], "alpha_max")
    if "noise_nu" in sy:
        synth_kwargs["noise_nu"] = _to_float(sy["noise_nu"], "noise_nu")
    if "seed" in sy:
        synth_kwargs["seed"] = _to_int(sy["seed"], "seed")
    try:
        kwargs["synth"] = SynthBagConfig(**synth_kwargs)
    except ValueError as exc:
        raise ConfigError(f"section [synth]: {exc}") from exc

    pipe = sections.get("pipeline", {})
    variant = pipe.get("variant", "none")
    if variant == "none":
        if set(pipe) - {"variant"}:
            raise ConfigError("pipeline keys given but variant is 'none'")
        kwargs["pipeline"] = None
    else:
        overrides: dict = {}
        if "smoothing_alpha" in pipe:
            overrides["smoothing_alpha"] = _to_float(pipe["smoothing_alpha"], "smoothing_alpha")
        if "smoothing_k" in pipe:
            overrides["smoothing_k"] = _to_int(pipe["smoothing_k"], "smoothing_k")
        if "density_k" in pipe:
            overrides["density_k"] = _to_int(pipe["density_k"], "density_k")
        try:
            if variant == "vision":
                kwargs["pipeline"] = preprocess.PipelineConfig.vision(**overrides)
            elif variant == "realworld":
                kwargs["pipeline"] = preprocess.PipelineConfig.realworld(**overrides)
            else:
                raise ConfigError(f"unknown pipeline variant {variant!r}")
        except ValueError as exc:
            raise ConfigError(f"section [pipeline]: {exc}") from exc

    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Serialized finite-support distributions (for `bench theory`)
# ---------------------------------------------------------------------------


def load_distribution(path: str | Path) -> DiscreteDistribution:
    """Parse the plain-text atom listing format.

    The file starts with ``labels <c>``; each ``atom`` block then gives
    ``location``, ``mass``, ``probs`` (the c label probabilities) and one
    ``bagrow <labels;...> v1 ... vc`` line per bag with nonzero probability.
    A ``bagdefault identity`` line inside a block fills any all-zero column
    with the singleton-of-the-true-label process, which keeps files short
    when only one label's bag behavior matters.
    """
    path = Path(path)
    lines = [
        (i + 1, ln.strip())
        for i, ln in enumerate(path.read_text().splitlines())
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines or lines[0][1].split()[0] != "labels":
        raise DataFormatError(f"{path}: first directive must be 'labels <c>'")
    try:
        c = int(lines[0][1].split()[1])
    except (IndexError, ValueError):
        raise DataFormatError(f"{path}: malformed labels directive") from None
    space = LabelSpace(c)

    atoms: list[Atom] = []
    block: dict | None = None

    def finish_block() -> None:
        if block is None:
            return
        for req in ("location", "mass", "probs"):
            if req not in block:
                raise DataFormatError(f"{path}: atom block missing '{req}'")
        entries = np.zeros(((1 << c) - 1, c))
        for mask, row in block["rows"].items():
            entries[mask - 1] = row
        if block["identity_default"]:
            for y in range(1, c + 1):
                if entries[:, y - 1].sum() == 0.0:
                    entries[(1 << (y - 1)) - 1, y - 1] = 1.0
        try:
            atoms.append(
                Atom(
                    location=np.array(block["location"]),
                    mass=block["mass"],
                    label_dist=LabelDistribution(np.array(block["probs"])),
                    baggen=BagGenMatrix(entries),
                )
            )
        except ValueError as exc:
            raise DataFormatError(f"{path}: invalid atom: {exc}") from exc

    for lineno, line in lines[1:]:
        parts = line.split()
        word = parts[0]
        if word == "atom":
            finish_block()
            block = {"rows": {}, "identity_default": False}
            continue
        if block is None:
            raise DataFormatError(f"{path}:{lineno}: directive outside an atom block")
        try:
            if word == "location":
                block["location"] = [float(v) for v in parts[1:]]
            elif word == "mass":
                block["mass"] = float(parts[1])
            elif word == "probs":
                block["probs"] = [float(v) for v in parts[1:]]
            elif word == "bagdefault":
                if parts[1] != "identity":
                    raise DataFormatError(f"{path}:{lineno}: unknown bagdefault {parts[1]!r}")
                block["identity_default"] = True
            elif word == "bagrow":
                labels = [int(v) for v in parts[1].split(";")]
                if any(not 1 <= y <= c for y in labels) or not labels:
                    raise DataFormatError(f"{path}:{lineno}: bad bag spec {parts[1]!r}")
                mask = 0
                for y in labels:
                    mask |= 1 << (y - 1)
                values = [float(v) for v in parts[2:]]
                if len(values) != c:
                    raise DataFormatError(f"{path}:{lineno}: expected {c} probabilities")
                block["rows"][mask] = values
            else:
                raise DataFormatError(f"{path}:{lineno}: unknown directive {word!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, DataFormatError):
                raise
            raise DataFormatError(f"{path}:{lineno}: malformed directive") from exc
    finish_block()
    if not atoms:
        raise DataFormatError(f"{path}: no atoms")
    try:
        return DiscreteDistribution(tuple(atoms), space)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def theory_report(d: DiscreteDistribution, n_probes: int = 200, seed: int = 0) -> str:
    """Key=value dump of reconstructibility, alignment and advantage."""
    lines = [f"atoms={d.n_atoms} labels={d.label_space.c}"]
    lines.append(f"dist_label_aligned={str(theory.is_label_aligned_dist(d)).lower()}")
    report = theory.advantage_report(d)
    for idx, atom in enumerate(d.atoms):
        recon = theory.is_reconstructible(atom.baggen)
        probe = theory.is_label_aligned_process(atom.baggen, n_probes=n_probes, seed=seed)
        e = report.entries[idx]
        lines.append(
            f"atom_index={idx} reconstructible={str(recon).lower()} "
            f"process_aligned_so_far={str(probe.aligned_so_far).lower()} "
            f"advantage={e.advantage:.12g} "
            f"p={'' if e.p is None else format(e.p, '.12g')} "
            f"gamma={'' if e.gamma is None else format(e.gamma, '.12g')} "
            f"top_labels={';'.join(str(y) for y in e.top_labels)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CLI entry points
# ---------------------------------------------------------------------------


def _cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    result = run(config, dump_predictions=args.dump_predictions, threads=args.threads)
    emit(result, args.out, timings=config.timings)
    for s in result.summary:
        print(
            f"method={s.method} noise={_fmt(s.noise)} mean_error={_fmt(s.mean_error)} "
            f"std_error={_fmt(s.std_error)} n_reps={s.n_reps}"
        )
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    if config.scenario is None:
        raise ConfigError("bench synth needs a scenario in [experiment]")
    scenario = analytic_scenario(config.scenario)
    rng = np.random.default_rng(config.base_seed)
    x, y = scenario.sample_points(config.n_samples, rng)
    if scenario.has_bag_process:
        masks = scenario.bag_masks_for(x, y, rng, noise_nu=config.synth.noise_nu)
        data = PartialDataset(x, masks, scenario.label_space, truths=y)
    else:
        data = make_bags(x, y, scenario.label_space, config.synth)
    save_dataset(data, args.out)
    print(f"wrote {data.n} examples to {args.out}")
    return 0


def _cmd_theory(args: argparse.Namespace) -> int:
    d = load_distribution(args.dist)
    sys.stdout.write(theory_report(d))
    if args.csv is not None:
        theory.advantage_report(d).write_csv(args.csv)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench", description="partial-label experiment harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment grid")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--dump-predictions", action="store_true")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="emit a generated dataset as CSV")
    p_synth.add_argument("--config", required=True)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_theory = sub.add_parser("theory", help="report on a serialized distribution")
    p_theory.add_argument("--dist", required=True)
    p_theory.add_argument("--csv", default=None)
    p_theory.set_defaults(func=_cmd_theory)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
