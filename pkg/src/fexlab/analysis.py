"""Aggregate analyses over persisted trial records and study labels.

Covers expected configuration scores, quartile stratification with pass-rate
tests, batch comparisons, marginal module effects, bootstrap effect sizes,
and the four human-judge agreement analyses.  All functions are pure over
their inputs; report emission writes CSV files only.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .context import ALL_BATCHES, BASELINE_NAME, CANONICAL_MODULES
from .errors import (
    EmptyInput,
    IncompleteScores,
    MisalignedLabels,
    MissingDifficulty,
    SingleRater,
)
from .stats import EffectSize, bootstrap_effect_ci, shapiro_wilk, two_proportion_z, welch_t_one_sided

log = logging.getLogger(__name__)

CRITERIA = ("c1", "c2", "c3", "c4", "c5", "c6")
JUDGE_CRITERIA = ("c2", "c3", "c4", "c6")

TABLE5_COLUMNS = [
    "model",
    "context_batch",
    "explanation",
    "pass_rate",
    "passed",
    "total",
    "q1_pass_rate",
    "q1_passed",
    "q1_total",
    "q4_pass_rate",
    "q4_passed",
    "q4_total",
    "p_q4_vs_q1",
]


def format_proportion(passed: int, total: int) -> str:
    """Proportions are reported at 3 decimals."""
    if total == 0:
        return ""
    return f"{passed / total:.3f}"


def format_pvalue(p: Optional[float]) -> str:
    """p-values are reported at 3 significant figures."""
    if p is None:
        return ""
    if p < 0.001:
        return "<0.001"
    return f"{p:.3g}"


@dataclass(frozen=True)
class ScoredTrial:
    """One explanation trial's score vector, as read back from storage."""

    defect_id: str
    configuration: str
    batch: str
    model: str
    run_id: int
    criteria: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.criteria)

    def sort_key(self) -> tuple:
        return (self.defect_id, self.configuration, self.model, self.run_id)


@dataclass
class ConfigScore:
    configuration: str
    batch: str
    model: str
    per_criterion_rates: tuple[float, ...]
    n_trials: int

    @property
    def expected_total(self) -> float:
        return sum(self.per_criterion_rates)

    @property
    def modules(self) -> frozenset[str]:
        if self.configuration == BASELINE_NAME:
            return frozenset(CANONICAL_MODULES)
        return frozenset(self.configuration.split("+"))


@dataclass
class QuartileGroup:
    passed: int
    total: int

    @property
    def rate(self) -> float:
        return self.passed / self.total if self.total else 0.0


@dataclass
class QuartileSplit:
    groups: list[QuartileGroup]
    boundaries: list[tuple[int, int]]  # (min score, max score) per group

    @property
    def q1(self) -> QuartileGroup:
        return self.groups[0]

    @property
    def q4(self) -> QuartileGroup:
        return self.groups[3]


@dataclass(frozen=True)
class LabelRecord:
    rater_id: str
    item_id: str
    criterion: str
    verdict: int
    difficulty: Optional[int] = None

    @property
    def rater_class(self) -> str:
        return self.rater_id.split(":", 1)[0]

    @property
    def defect_id(self) -> str:
        return self.item_id.split("#", 1)[0]


def expected_config_scores(trials: Iterable[ScoredTrial]) -> list[ConfigScore]:
    """Per-criterion pass rates pooled over defects and runs, per configuration."""
    grouped: dict[tuple[str, str, str], list[ScoredTrial]] = defaultdict(list)
    for trial in trials:
        if len(trial.criteria) != 6:
            raise IncompleteScores(
                f"trial {trial.sort_key()} has {len(trial.criteria)} criteria"
            )
        grouped[(trial.model, trial.batch, trial.configuration)].append(trial)
    scores = []
    for (model, batch, configuration), rows in sorted(grouped.items()):
        rates = tuple(
            sum(t.criteria[i] for t in rows) / len(rows) for i in range(6)
        )
        scores.append(
            ConfigScore(
                configuration=configuration,
                batch=batch,
                model=model,
                per_criterion_rates=rates,
                n_trials=len(rows),
            )
        )
    return scores


def per_defect_expected_scores(trials: Iterable[ScoredTrial]) -> dict[tuple, float]:
    """Expected total per (model, batch, configuration, defect), over runs."""
    grouped: dict[tuple, list[ScoredTrial]] = defaultdict(list)
    for trial in trials:
        grouped[(trial.model, trial.batch, trial.configuration, trial.defect_id)].append(trial)
    return {
        key: sum(sum(t.criteria[i] for t in rows) / len(rows) for i in range(6))
        for key, rows in grouped.items()
    }


@dataclass(frozen=True)
class ScoredAttempt:
    """A repair attempt joined with its explanation's total score."""

    defect_id: str
    configuration: str
    batch: str
    model: str
    run_id: int
    total_score: int
    passed: bool
    metrics: Optional[dict] = None

    def sort_key(self) -> tuple:
        return (self.defect_id, self.configuration, self.model, self.run_id)


def stratify_quartiles(attempts: Sequence[ScoredAttempt]) -> QuartileSplit:
    """Stable sort by (score, trial key), then four contiguous groups.

    Group sizes are floor(n/4) with the remainder handed out to Q4, then Q1,
    then Q3; the exact tie rule is pinned here and in the tests.
    """
    if not attempts:
        raise EmptyInput("no attempts to stratify")
    groups = []
    boundaries = []
    for chunk in quartile_members(attempts):
        groups.append(
            QuartileGroup(passed=sum(a.passed for a in chunk), total=len(chunk))
        )
        scores = [a.total_score for a in chunk]
        boundaries.append((min(scores), max(scores)) if scores else (0, 0))
    return QuartileSplit(groups=groups, boundaries=boundaries)


def quartile_members(attempts: Sequence[ScoredAttempt]) -> list[list[ScoredAttempt]]:
    """The same split as stratify_quartiles, returning the members."""
    ordered = sorted(attempts, key=lambda a: (a.total_score, a.sort_key()))
    n = len(ordered)
    sizes = [n // 4] * 4
    for slot in (3, 0, 2)[: n % 4]:
        sizes[slot] += 1
    members = []
    cursor = 0
    for size in sizes:
        members.append(ordered[cursor : cursor + size])
        cursor += size
    return members


def marginal_module_effect(
    config_scores: Iterable[ConfigScore], module_id: str, batch: str
) -> float:
    """Mean expected total with the module minus without, within one batch."""
    with_module: list[float] = []
    without_module: list[float] = []
    for score in config_scores:
        if score.batch != batch or score.configuration == BASELINE_NAME:
            continue
        if module_id in score.modules:
            with_module.append(score.expected_total)
        else:
            without_module.append(score.expected_total)
    if not with_module or not without_module:
        return 0.0
    return sum(with_module) / len(with_module) - sum(without_module) / len(without_module)


# ---------------------------------------------------------------------------
# Agreement analyses


def load_labels_csv(path: Path) -> list[LabelRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            difficulty = row.get("difficulty", "")
            records.append(
                LabelRecord(
                    rater_id=row["rater_id"],
                    item_id=row["item_id"],
                    criterion=row["criterion"],
                    verdict=int(row["verdict"]),
                    difficulty=int(difficulty) if difficulty not in ("", None) else None,
                )
            )
    return records


def _by_item(labels: Iterable[LabelRecord], criterion: str) -> dict[str, list[LabelRecord]]:
    out: dict[str, list[LabelRecord]] = defaultdict(list)
    for rec in labels:
        if rec.criterion == criterion:
            out[rec.item_id].append(rec)
    for rows in out.values():
        rows.sort(key=lambda r: r.rater_id)
    return out


def agreement_aq1(
    human_labels: Sequence[LabelRecord], judge_labels: Sequence[LabelRecord]
) -> dict[tuple[str, str], float]:
    """Share of matching verdicts per (criterion, judge class).

    Pairs are aligned per item: the i-th human rater against the i-th judge
    repetition; a single judge label per item is broadcast to every human.
    """
    results: dict[tuple[str, str], float] = {}
    judge_classes = sorted({rec.rater_class for rec in judge_labels})
    for criterion in JUDGE_CRITERIA:
        humans = _by_item(human_labels, criterion)
        for judge_class in judge_classes:
            judged = _by_item(
                [r for r in judge_labels if r.rater_class == judge_class], criterion
            )
            matches = 0
            total = 0
            for item_id, human_rows in humans.items():
                judge_rows = judged.get(item_id)
                if not judge_rows:
                    raise MisalignedLabels(
                        f"judge {judge_class!r} has no labels for item {item_id!r} "
                        f"criterion {criterion}"
                    )
                if len(judge_rows) == len(human_rows):
                    pairs = zip(human_rows, judge_rows)
                elif len(judge_rows) == 1:
                    pairs = ((h, judge_rows[0]) for h in human_rows)
                else:
                    raise MisalignedLabels(
                        f"item {item_id!r} criterion {criterion}: {len(human_rows)} human "
                        f"vs {len(judge_rows)} judge labels"
                    )
                for human, judge in pairs:
                    matches += int(human.verdict == judge.verdict)
                    total += 1
            if total:
                results[(criterion, judge_class)] = matches / total
    return results


def agreement_aq2(labels: Sequence[LabelRecord]) -> dict[tuple[str, str], float]:
    """Pass prevalence per (criterion, rater class)."""
    totals: dict[tuple[str, str], list[int]] = defaultdict(lambda: [0, 0])
    for rec in labels:
        if rec.criterion not in JUDGE_CRITERIA:
            continue
        entry = totals[(rec.criterion, rec.rater_class)]
        entry[0] += rec.verdict
        entry[1] += 1
    return {key: passed / n for key, (passed, n) in totals.items() if n}


def agreement_aq3(labels: Sequence[LabelRecord]) -> dict[tuple[str, str], tuple[float, float]]:
    """(unanimity, extremity) per (criterion, rater class).

    Extremity is the mean over items of max(p, 1-p), where p is the item's
    pass-vote share; it needs at least two raters per item.
    """
    results: dict[tuple[str, str], tuple[float, float]] = {}
    classes = sorted({rec.rater_class for rec in labels})
    for criterion in JUDGE_CRITERIA:
        for rater_class in classes:
            items = _by_item(
                [r for r in labels if r.rater_class == rater_class], criterion
            )
            if not items:
                continue
            unanimous = 0
            extremity_sum = 0.0
            for item_id, rows in items.items():
                if len(rows) < 2:
                    raise SingleRater(
                        f"item {item_id!r} criterion {criterion} has a single "
                        f"{rater_class!r} rating"
                    )
                p = sum(r.verdict for r in rows) / len(rows)
                unanimous += int(p in (0.0, 1.0))
                extremity_sum += max(p, 1.0 - p)
            results[(criterion, rater_class)] = (
                unanimous / len(items),
                extremity_sum / len(items),
            )
    return results


def agreement_aq4(human_labels: Sequence[LabelRecord]) -> dict[str, float]:
    """Mean difficulty per criterion over participant x defect cases."""
    cases: dict[str, dict[tuple[str, str], int]] = defaultdict(dict)
    for rec in human_labels:
        if rec.difficulty is not None:
            cases[rec.criterion][(rec.rater_id, rec.defect_id)] = rec.difficulty
    if not any(cases.values()):
        raise MissingDifficulty("no difficulty ratings present")
    return {
        criterion: sum(values.values()) / len(values)
        for criterion, values in sorted(cases.items())
        if values
    }


# ---------------------------------------------------------------------------
# Report emission


@dataclass
class AnalysisInputs:
    scored_trials: list[ScoredTrial]
    attempts: list[ScoredAttempt]
    baseline_attempts: list[ScoredAttempt]
    labels: list[LabelRecord] = field(default_factory=list)
    bootstrap_replicates: int = 10000
    bootstrap_seed: int = 20260809


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def quartile_table(inputs: AnalysisInputs) -> list[dict]:
    """Pass rates by explanation-quality quartile, one row per model x batch."""
    rows: list[dict] = []
    models = sorted({a.model for a in inputs.attempts}
                    | {a.model for a in inputs.baseline_attempts})
    for model in models:
        base = [a for a in inputs.baseline_attempts if a.model == model]
        if base:
            passed = sum(a.passed for a in base)
            rows.append(
                {
                    "model": model,
                    "context_batch": "NO_EXPLANATION",
                    "explanation": "no",
                    "passed": passed,
                    "total": len(base),
                    "q1": None,
                    "q4": None,
                    "p": None,
                }
            )
        for batch in ALL_BATCHES:
            batch_attempts = [
                a for a in inputs.attempts if a.model == model and a.batch == batch
            ]
            if not batch_attempts:
                continue
            split = stratify_quartiles(batch_attempts)
            _, p = two_proportion_z(
                split.q1.passed, split.q1.total, split.q4.passed, split.q4.total
            )
            rows.append(
                {
                    "model": model,
                    "context_batch": batch,
                    "explanation": "yes",
                    "passed": sum(a.passed for a in batch_attempts),
                    "total": len(batch_attempts),
                    "q1": split.q1,
                    "q4": split.q4,
                    "p": p,
                }
            )
    return rows


def _minimal_fix_rate(attempts: Sequence[ScoredAttempt]) -> Optional[float]:
    passing = [a for a in attempts if a.passed and a.metrics]
    if not passing:
        return None
    minimal = sum(1 for a in passing if a.metrics["levenshtein_norm"] == 0.0)
    return minimal / len(passing)


def _metric_mean(attempts: Sequence[ScoredAttempt], metric: str) -> Optional[float]:
    values = [a.metrics[metric] for a in attempts if a.passed and a.metrics]
    if not values:
        return None
    return sum(values) / len(values)


def quartile_effect_data(
    inputs: AnalysisInputs, value_fn, min_defects: int = 2
) -> dict[tuple[str, str], EffectSize]:
    """Bonferroni-adjusted defect-bootstrap CIs for Q4 - Q1 deltas.

    value_fn maps a list of attempts (one defect's members of a quartile) to
    a number or None; defects lacking values in either quartile drop out.
    """
    out: dict[tuple[str, str], EffectSize] = {}
    models = sorted({a.model for a in inputs.attempts})
    for model in models:
        for batch in ("two_way", "three_way"):
            batch_attempts = [
                a for a in inputs.attempts if a.model == model and a.batch == batch
            ]
            if not batch_attempts:
                continue
            members = quartile_members(batch_attempts)
            q1_by_defect: dict[str, list[ScoredAttempt]] = defaultdict(list)
            q4_by_defect: dict[str, list[ScoredAttempt]] = defaultdict(list)
            for attempt in members[0]:
                q1_by_defect[attempt.defect_id].append(attempt)
            for attempt in members[3]:
                q4_by_defect[attempt.defect_id].append(attempt)
            q1_values = []
            q4_values = []
            for defect_id in sorted(set(q1_by_defect) & set(q4_by_defect)):
                v1 = value_fn(q1_by_defect[defect_id])
                v4 = value_fn(q4_by_defect[defect_id])
                if v1 is None or v4 is None:
                    continue
                q1_values.append(v1)
                q4_values.append(v4)
            if len(q1_values) < min_defects:
                continue
            out[(model, batch)] = bootstrap_effect_ci(
                q1_values,
                q4_values,
                replicates=inputs.bootstrap_replicates,
                m=2,
                seed=inputs.bootstrap_seed,
            )
    return out


def batch_comparison(inputs: AnalysisInputs) -> list[dict]:
    """Normality check plus one-sided Welch t: two-way vs three-way scores."""
    config_scores = expected_config_scores(inputs.scored_trials)
    rows = []
    models = sorted({s.model for s in config_scores})
    for model in models:
        samples = {}
        for batch in ("two_way", "three_way"):
            samples[batch] = [
                s.expected_total
                for s in config_scores
                if s.model == model and s.batch == batch and s.configuration != BASELINE_NAME
            ]
        if len(samples["two_way"]) < 3 or len(samples["three_way"]) < 3:
            continue
        row = {"model": model}
        for batch, sample in samples.items():
            try:
                _, p_norm = shapiro_wilk(sample)
            except Exception:
                p_norm = None
            row[f"shapiro_p_{batch}"] = p_norm
        t, df, p = welch_t_one_sided(samples["two_way"], samples["three_way"])
        row.update({"welch_t": t, "welch_df": df, "welch_p_one_sided": p})
        rows.append(row)
    return rows


def emit_report(inputs: AnalysisInputs, out_dir: Path) -> list[Path]:
    """Write the report CSVs; returns the written paths."""
    out = Path(out_dir)
    tables = out / "tables"
    figures = out / "figures"
    written: list[Path] = []

    # Table 5: quartile pass rates.
    rows = []
    for row in quartile_table(inputs):
        q1, q4 = row["q1"], row["q4"]
        rows.append(
            [
                row["model"],
                row["context_batch"],
                row["explanation"],
                format_proportion(row["passed"], row["total"]),
                row["passed"],
                row["total"],
                format_proportion(q1.passed, q1.total) if q1 else "",
                q1.passed if q1 else "",
                q1.total if q1 else "",
                format_proportion(q4.passed, q4.total) if q4 else "",
                q4.passed if q4 else "",
                q4.total if q4 else "",
                format_pvalue(row["p"]),
            ]
        )
    path = tables / "table5_quartile_pass_rates.csv"
    _write_csv(path, TABLE5_COLUMNS, rows)
    written.append(path)

    # Tables 1-4 need labels.
    humans = [r for r in inputs.labels if r.rater_class == "human"]
    judges = [r for r in inputs.labels if r.rater_class != "human"]
    if humans and judges:
        aq1 = agreement_aq1(humans, judges)
        judge_classes = sorted({k[1] for k in aq1})
        rows = [
            [criterion] + [f"{aq1[(criterion, jc)]:.3f}" for jc in judge_classes]
            + [f"{sum(aq1[(criterion, jc)] for jc in judge_classes) / len(judge_classes):.3f}"]
            for criterion in JUDGE_CRITERIA
        ]
        path = tables / "table1_aq1_accuracy.csv"
        _write_csv(path, ["criterion"] + judge_classes + ["macro_avg"], rows)
        written.append(path)

        aq2 = agreement_aq2(inputs.labels)
        classes = ["human"] + judge_classes
        rows = [
            [criterion]
            + [f"{aq2.get((criterion, cls), 0.0):.3f}" for cls in classes]
            for criterion in JUDGE_CRITERIA
        ]
        path = tables / "table2_aq2_prevalence.csv"
        _write_csv(path, ["criterion"] + classes, rows)
        written.append(path)

        aq3 = agreement_aq3(inputs.labels)
        rows = []
        for criterion in JUDGE_CRITERIA:
            row = [criterion]
            for cls in classes:
                unanimity, extremity = aq3.get((criterion, cls), (0.0, 0.0))
                row += [f"{unanimity:.3f}", f"{extremity:.3f}"]
            rows.append(row)
        header = ["criterion"]
        for cls in classes:
            header += [f"{cls}_unanimity", f"{cls}_extremity"]
        path = tables / "table3_aq3_consistency.csv"
        _write_csv(path, header, rows)
        written.append(path)

        aq4 = agreement_aq4(humans)
        rows = [[criterion, f"{aq4[criterion]:.2f}"] for criterion in JUDGE_CRITERIA
                if criterion in aq4]
        path = tables / "table4_aq4_difficulty.csv"
        _write_csv(path, ["criterion", "mean_difficulty"], rows)
        written.append(path)
    else:
        tables.mkdir(parents=True, exist_ok=True)
        reason = tables / "agreement_tables_omitted.txt"
        reason.write_text("Tables 1-4 omitted: no study labels were provided.\n")
        written.append(reason)
        log.warning("agreement tables omitted: empty label set")

    # Figure data: isolated scores, batch score distributions, effect sizes.
    config_scores = expected_config_scores(inputs.scored_trials)
    per_defect = per_defect_expected_scores(inputs.scored_trials)
    rows = [
        [model, batch, configuration, defect, f"{value:.4f}"]
        for (model, batch, configuration, defect), value in sorted(per_defect.items())
    ]
    path = figures / "fig2_isolated_scores.csv"
    _write_csv(
        path,
        ["model", "batch", "configuration", "defect_id", "expected_total"],
        [r for r in rows if r[1] in ("isolated", "baseline")],
    )
    written.append(path)

    rows = [
        [s.model, s.batch, s.configuration, f"{s.expected_total:.4f}", s.n_trials]
        for s in config_scores
    ]
    path = figures / "fig3_batch_scores.csv"
    _write_csv(path, ["model", "batch", "configuration", "expected_total", "n_trials"], rows)
    written.append(path)

    rows = []
    models = sorted({s.model for s in config_scores})
    for model in models:
        per_model = [s for s in config_scores if s.model == model]
        for batch in ("two_way", "three_way"):
            for module_id in CANONICAL_MODULES:
                delta = marginal_module_effect(per_model, module_id, batch)
                rows.append([model, batch, module_id, f"{delta:.4f}"])
    path = figures / "marginal_module_effects.csv"
    _write_csv(path, ["model", "batch", "module", "delta"], rows)
    written.append(path)

    effects = quartile_effect_data(inputs, _minimal_fix_rate)
    rows = [
        [model, batch, f"{e.delta:.4f}", f"{e.ci_low:.4f}", f"{e.ci_high:.4f}", e.m]
        for (model, batch), e in sorted(effects.items())
    ]
    path = figures / "fig4_minimality_effects.csv"
    _write_csv(path, ["model", "batch", "delta", "ci_low", "ci_high", "m"], rows)
    written.append(path)

    rows = []
    for metric in ("line_deviation", "levenshtein_norm", "spurious_changes",
                   "halstead_delta_volume"):
        effects = quartile_effect_data(
            inputs, lambda attempts, m=metric: _metric_mean(attempts, m)
        )
        for (model, batch), e in sorted(effects.items()):
            rows.append(
                [metric, model, batch, f"{e.delta:.4f}", f"{e.ci_low:.4f}",
                 f"{e.ci_high:.4f}", e.m]
            )
    path = figures / "fig5_similarity_effects.csv"
    _write_csv(path, ["metric", "model", "batch", "delta", "ci_low", "ci_high", "m"], rows)
    written.append(path)

    # Batch comparison statistics accompany the figure data.
    rows = [
        [
            r["model"],
            format_pvalue(r.get("shapiro_p_two_way")),
            format_pvalue(r.get("shapiro_p_three_way")),
            f"{r['welch_t']:.4f}",
            f"{r['welch_df']:.2f}",
            format_pvalue(r["welch_p_one_sided"]),
        ]
        for r in batch_comparison(inputs)
    ]
    path = figures / "fig3_batch_tests.csv"
    _write_csv(
        path,
        ["model", "shapiro_p_two_way", "shapiro_p_three_way", "welch_t", "welch_df",
         "welch_p_one_sided"],
        rows,
    )
    written.append(path)

    return written
