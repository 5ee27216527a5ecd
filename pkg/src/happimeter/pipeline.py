"""Batch pipeline: CSV bundle in, trained models and report tables out.

Every emitted file starts with a `# seed=... config=...` comment so a
report can always be traced back to the exact run that produced it.
Numbers are written with shortest round-trip repr, which keeps files
byte-identical across runs and parallelism levels for a fixed seed.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from datetime import timedelta
from pathlib import Path
from typing import Mapping, Sequence

from . import analytics, forest
from .config import AppConfig, config_hash
from .csvio import (
    format_ts,
    read_moods,
    read_profiles,
    read_sensors,
    write_report_csv,
)
from .domain import MoodInput, ParticipantProfile, SensorSample
from .errors import ValidationError
from .features import (
    FEATURE_NAMES,
    DroppedExample,
    LabeledExample,
    build_dataset,
    examples_to_matrix,
    labels_for,
    window_mean_vmc,
)
from .forest import Dataset, ForestHyperparams, ModelScope
from .weather import CachedWeather, FixtureProvider

BUNDLE_FILES = ("sensors.csv", "moods.csv", "weather.csv", "profiles.csv")


@dataclass(frozen=True)
class Bundle:
    input_dir: Path
    moods: list[MoodInput]
    samples: list[SensorSample]
    profiles: dict[str, ParticipantProfile]
    weather: CachedWeather


def load_bundle(input_dir: str | Path) -> Bundle:
    base = Path(input_dir)
    missing = [name for name in BUNDLE_FILES if not (base / name).exists()]
    if missing:
        raise FileNotFoundError(
            f"input bundle at {base} is missing: {', '.join(missing)}"
        )
    profiles = {p.user: p for p in read_profiles(base / "profiles.csv")}
    return Bundle(
        input_dir=base,
        moods=read_moods(base / "moods.csv"),
        samples=read_sensors(base / "sensors.csv"),
        profiles=profiles,
        weather=CachedWeather(FixtureProvider(base / "weather.csv")),
    )


def featurize_bundle(
    bundle: Bundle, cfg: AppConfig
) -> tuple[list[LabeledExample], list[DroppedExample]]:
    zones = {u: p.timezone for u, p in bundle.profiles.items()}
    return build_dataset(
        bundle.moods,
        bundle.samples,
        bundle.weather.lookup_or_none,
        cfg.featurize,
        zones,
    )


def dataset_for(examples: Sequence[LabeledExample], target: str) -> Dataset:
    return Dataset(
        X=examples_to_matrix(examples),
        y=labels_for(examples, target),
        feature_names=FEATURE_NAMES,
    )


def _hyper(cfg: AppConfig, seed: int | None) -> ForestHyperparams:
    return cfg.forest if seed is None else replace(cfg.forest, seed=seed)


def _targets(selection: str | None) -> tuple[str, ...]:
    if selection is None or selection == "all":
        return forest.TARGETS
    if selection not in forest.TARGETS:
        raise ValidationError(
            f"unknown target {selection!r}, expected one of {forest.TARGETS} or 'all'"
        )
    return (selection,)


def _stamp(cfg: AppConfig, hyper: ForestHyperparams) -> str:
    return f"seed={hyper.seed} config={config_hash(cfg)}"


# ---------------------------------------------------------------------------
# commands


def run_train(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: AppConfig,
    seed: int | None = None,
    n_jobs: int = 1,
    target: str | None = None,
) -> list[Path]:
    """Train general-scope models (all three targets unless told one)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(input_dir)
    examples, _ = featurize_bundle(bundle, cfg)
    hyper = _hyper(cfg, seed)
    written = []
    for target in _targets(target):
        model = forest.train_forest(
            dataset_for(examples, target), target, ModelScope.general(), hyper,
            n_jobs=n_jobs,
        )
        path = out / f"model_{target}.json"
        forest.save_model(model, path)
        written.append(path)
    return written


def run_evaluate(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: AppConfig,
    folds: int = 10,
    seed: int | None = None,
    n_jobs: int = 1,
    target: str | None = None,
) -> Path:
    """Cross-validate and write table4.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(input_dir)
    examples, _ = featurize_bundle(bundle, cfg)
    hyper = _hyper(cfg, seed)
    rows = []
    for target in _targets(target):
        report = forest.cross_validate(
            dataset_for(examples, target), target, hyper, k=folds, n_jobs=n_jobs
        )
        rows.append([
            target, "general", report.n, report.k, int(report.stratified),
            repr(report.accuracy),
            "" if report.kappa is None else repr(report.kappa),
        ])
    path = out / "table4.csv"
    write_report_csv(
        path,
        ["target", "scope", "n", "folds", "stratified", "accuracy", "kappa"],
        rows,
        comment=_stamp(cfg, hyper),
    )
    return path


def run_importance(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: AppConfig,
    seed: int | None = None,
    n_jobs: int = 1,
    target: str | None = None,
) -> tuple[Path, Path]:
    """Train per target and write fig7.csv (decrease) and fig8.csv (nodes)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(input_dir)
    examples, _ = featurize_bundle(bundle, cfg)
    hyper = _hyper(cfg, seed)
    fig7_rows = []
    fig8_rows = []
    for target in _targets(target):
        model = forest.train_forest(
            dataset_for(examples, target), target, ModelScope.general(), hyper,
            n_jobs=n_jobs,
        )
        importance = forest.feature_importance(model)
        for feature, value in importance.ranked_by_decrease():
            fig7_rows.append([target, feature, repr(float(value))])
        for feature, count in importance.ranked_by_nodes():
            fig8_rows.append([target, feature, count])
    stamp = _stamp(cfg, hyper)
    fig7 = out / "fig7.csv"
    fig8 = out / "fig8.csv"
    write_report_csv(
        fig7, ["target", "feature", "mean_impurity_decrease"], fig7_rows, comment=stamp
    )
    write_report_csv(fig8, ["target", "feature", "node_count"], fig8_rows, comment=stamp)
    return fig7, fig8


def run_descriptive(
    input_dir: str | Path, out_dir: str | Path, cfg: AppConfig
) -> tuple[Path, Path]:
    """Write table2.csv (descriptives) and fig6.csv (hourly profile)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(input_dir)
    examples, _ = featurize_bundle(bundle, cfg)
    if not examples:
        raise ValidationError("no joinable examples in the bundle")
    stamp = _stamp(cfg, cfg.forest)

    report = analytics.descriptive_stats([(ex.pleasance, ex.activation) for ex in examples])
    rows = []
    for name, desc in (("pleasance", report.pleasance), ("activation", report.activation)):
        rows.append([
            name, desc.n,
            desc.counts["high"], desc.counts["medium"], desc.counts["low"],
            repr(desc.percentages["high"]), repr(desc.percentages["medium"]),
            repr(desc.percentages["low"]),
            repr(desc.mean), repr(desc.sd),
        ])
    table2 = out / "table2.csv"
    write_report_csv(
        table2,
        ["target", "n", "count_high", "count_medium", "count_low",
         "pct_high", "pct_medium", "pct_low", "mean", "sd"],
        rows,
        comment=stamp,
    )

    profile = analytics.hourly_profile(examples)
    fig6 = out / "fig6.csv"
    write_report_csv(
        fig6,
        ["hour", "mean_pleasance", "mean_activation", "n"],
        [
            [hour, repr(point.mean_pleasance), repr(point.mean_activation), point.n]
            for hour, point in sorted(profile.items())
        ],
        comment=stamp,
    )
    return table2, fig6


def run_correlate(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: AppConfig,
    vmc_window_hours: float | None = None,
) -> Path:
    """Write table3.csv: pairwise r with significance stars.

    `vmc_window_hours` swaps the windowed-VMC column for a recomputed
    window (the table's 24-hour variant) without touching the model
    features.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(input_dir)
    examples, _ = featurize_bundle(bundle, cfg)
    if not examples:
        raise ValidationError("no joinable examples in the bundle")

    vmc_values = None
    if vmc_window_hours is not None:
        window = timedelta(hours=vmc_window_hours)
        by_user: dict[str, list[SensorSample]] = {}
        for s in bundle.samples:
            by_user.setdefault(s.user, []).append(s)
        for history in by_user.values():
            history.sort(key=lambda s: s.timestamp)
        vmc_values = [
            window_mean_vmc(by_user.get(ex.user, []), ex.timestamp, window).value
            for ex in examples
        ]

    rows_in = analytics.build_correlation_rows(examples, bundle.profiles, vmc_values)
    matrix = analytics.correlation_matrix(rows_in, analytics.TABLE_VARIABLES)
    rows = []
    absent: list[str] = []
    variables = matrix.variables
    for i, va in enumerate(variables):
        for j in range(i + 1, len(variables)):
            vb = variables[j]
            cell = matrix.cells[i][j]
            if cell is None:
                rows.append([va, vb, "", "", 0, "absent"])
                absent.append(f"{va}~{vb}")
            else:
                rows.append([va, vb, repr(cell.r), cell.stars, cell.n, "ok"])
    path = out / "table3.csv"
    write_report_csv(
        path,
        ["var_a", "var_b", "r", "stars", "n", "status"],
        rows,
        comment=_stamp(cfg, cfg.forest),
    )
    if absent:
        print(
            f"warning: {len(absent)} variable pairs had no usable data "
            f"(first: {absent[0]})",
            file=sys.stderr,
        )
    return path


def influence_scores(
    bundle: Bundle, cfg: AppConfig
) -> list[analytics.InfluenceScore]:
    """Point-biserial influence for every ordered user pair with data."""
    samples_by_user: dict[str, list[SensorSample]] = {}
    for s in bundle.samples:
        samples_by_user.setdefault(s.user, []).append(s)
    for history in samples_by_user.values():
        history.sort(key=lambda s: s.timestamp)
    moods_by_user: dict[str, list[MoodInput]] = {}
    for m in bundle.moods:
        moods_by_user.setdefault(m.user, []).append(m)
    for series in moods_by_user.values():
        series.sort(key=lambda m: m.timestamp)

    users = sorted(moods_by_user)
    scores: list[analytics.InfluenceScore] = []
    slack_s = cfg.influence.slack_minutes * 60.0
    for subject in users:
        subject_moods = moods_by_user[subject]
        pleasance = [m.pleasance for m in subject_moods]
        for friend in users:
            if friend == subject:
                continue
            indicators = analytics.copresence_events(
                subject_moods,
                samples_by_user.get(subject, []),
                samples_by_user.get(friend, []),
                radius_m=cfg.influence.radius_m,
                slack_s=slack_s,
            )
            score = analytics.friend_influence(
                subject, friend, pleasance, indicators,
                min_events=cfg.influence.min_events,
            )
            if score is not None:
                scores.append(score)
    return analytics.rank_influences(scores)


def run_influence(
    input_dir: str | Path, out_dir: str | Path, cfg: AppConfig
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(input_dir)
    scores = influence_scores(bundle, cfg)
    path = out / "influence.csv"
    write_report_csv(
        path,
        ["subject", "friend", "r", "n_events", "direction"],
        [[s.subject, s.friend, repr(s.r), s.n_events, s.direction] for s in scores],
        comment=_stamp(cfg, cfg.forest),
    )
    return path


def run_report(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: AppConfig,
    folds: int = 10,
    seed: int | None = None,
    n_jobs: int = 1,
    vmc_window_hours: float | None = None,
) -> list[Path]:
    """The full battery: table2, table4, fig6, fig7, fig8, table3, influence."""
    table2, fig6 = run_descriptive(input_dir, out_dir, cfg)
    table4 = run_evaluate(input_dir, out_dir, cfg, folds=folds, seed=seed, n_jobs=n_jobs)
    fig7, fig8 = run_importance(input_dir, out_dir, cfg, seed=seed, n_jobs=n_jobs)
    table3 = run_correlate(input_dir, out_dir, cfg, vmc_window_hours=vmc_window_hours)
    influence = run_influence(input_dir, out_dir, cfg)
    return [table2, fig6, table4, fig7, fig8, table3, influence]
