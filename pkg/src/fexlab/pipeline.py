"""End-to-end sweep execution: resumable, idempotent, record/replay aware.

Persisted layout under the output root::

    validation.jsonl
    explanations/<model>/<batch>.jsonl
    scores/<model>/<batch>.jsonl
    repairs/<model>/<batch>.jsonl        (batch "no_explanation" for the
                                          fix-without-explanation condition)
    report/tables/*.csv  report/figures/*.csv

Completed trial keys are skipped on re-run, so a killed sweep can simply be
restarted.  Appends are first-write-wins per trial key.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from . import context as ctx
from . import repair as repair_mod
from .analysis import AnalysisInputs, ScoredAttempt, ScoredTrial, emit_report, load_labels_csv
from .corpus import Defect, load_corpus, trace_test, validate_defect
from .errors import CacheMiss, FexlabError
from .gateway import CompletionRequest, Gateway
from .scoring import score_explanation
from .slicing import ModuleIndex, compute_slices

log = logging.getLogger(__name__)

REPLAY_TIMESTAMP = "1970-01-01T00:00:00+00:00"
NO_EXPLANATION_BATCH = "no_explanation"


@dataclass
class RunManifest:
    corpus: Path
    out: Path
    models: list[str]
    batches: list[str] = field(default_factory=lambda: list(ctx.ALL_BATCHES))
    run_ids: list[int] = field(default_factory=lambda: [1, 2, 3])
    mode: str = "replay"
    parallelism: int = 1
    seed: int = 0
    cache_dir: Optional[Path] = None
    labels: Optional[Path] = None
    judge_model: Optional[str] = None
    test_timeout: float = 30.0


@dataclass
class SweepSummary:
    trials: int = 0
    skipped: int = 0
    passes: int = 0
    errors: list[str] = field(default_factory=list)

    def merge(self, other: "SweepSummary") -> None:
        self.trials += other.trials
        self.skipped += other.skipped
        self.passes += other.passes
        self.errors.extend(other.errors)


class JsonlStore:
    """Append-only JSONL records with first-write-wins keyed inserts."""

    def __init__(self, path: Path, key_fn: Callable[[dict], str]):
        self.path = Path(path)
        self.key_fn = key_fn
        self._lock = threading.Lock()
        self._records: dict[str, dict] = {}
        if self.path.is_file():
            for line in self.path.read_text().splitlines():
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    log.warning("%s: skipping malformed line (torn write?)", self.path)
                    continue
                self._records.setdefault(key_fn(rec), rec)

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return key in self._records

    def get(self, key: str) -> Optional[dict]:
        with self._lock:
            return self._records.get(key)

    def append(self, record: dict) -> bool:
        """Insert unless the key exists; returns True if written."""
        key = self.key_fn(record)
        with self._lock:
            if key in self._records:
                return False
            self._records[key] = record
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                fh.flush()
            return True

    def records(self) -> list[dict]:
        with self._lock:
            return list(self._records.values())


def _trial_key(rec: dict) -> str:
    return f"{rec['defect_id']}|{rec['batch']}|{rec['configuration']}|{rec['model']}|run{rec['run_id']}"


def _score_key(rec: dict) -> str:
    return _trial_key(rec) + "|" + rec.get("judge_model", "")


def _repair_key(rec: dict) -> str:
    return f"{rec['defect_id']}|{rec['condition']}|{rec['configuration']}|{rec['model']}|run{rec['run_id']}"


class Pipeline:
    """Stage runner bound to one manifest and one gateway."""

    def __init__(self, manifest: RunManifest, gateway: Gateway):
        self.manifest = manifest
        self.gateway = gateway
        self.out = Path(manifest.out)
        self._artifacts: dict[str, ctx.DefectArtifacts] = {}
        self._defects: Optional[list[Defect]] = None
        if manifest.mode == "replay":
            self.clock = lambda: REPLAY_TIMESTAMP
        else:
            self.clock = lambda: datetime.now(timezone.utc).isoformat()

    # -- corpus -----------------------------------------------------------

    def defects(self) -> list[Defect]:
        if self._defects is None:
            self._defects = load_corpus(self.manifest.corpus)
        return self._defects

    def validate(self) -> list[dict]:
        store = JsonlStore(self.out / "validation.jsonl", lambda r: r["defect_id"])
        reports = []
        for defect in self.defects():
            report = validate_defect(defect, timeout=self.manifest.test_timeout)
            rec = json.loads(report.to_json())
            store.append(rec)
            reports.append(rec)
        return reports

    def artifacts_for(self, defect: Defect) -> ctx.DefectArtifacts:
        if defect.id not in self._artifacts:
            trace = trace_test(defect, timeout=self.manifest.test_timeout)
            index = ModuleIndex(defect.buggy_source)
            self._artifacts[defect.id] = ctx.DefectArtifacts(
                defect=defect, trace=trace, slices=compute_slices(index, trace)
            )
        return self._artifacts[defect.id]

    # -- stage plumbing ----------------------------------------------------

    def _explanation_store(self, model: str, batch: str) -> JsonlStore:
        return JsonlStore(self.out / "explanations" / model / f"{batch}.jsonl", _trial_key)

    def _score_store(self, model: str, batch: str) -> JsonlStore:
        return JsonlStore(self.out / "scores" / model / f"{batch}.jsonl", _score_key)

    def _repair_store(self, model: str, batch: str) -> JsonlStore:
        return JsonlStore(self.out / "repairs" / model / f"{batch}.jsonl", _repair_key)

    def _run_parallel(self, tasks: list[Callable[[], Optional[str]]]) -> SweepSummary:
        summary = SweepSummary()
        if not tasks:
            return summary
        workers = max(1, self.manifest.parallelism)
        if workers == 1:
            results = [task() for task in tasks]
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda t: t(), tasks))
        for result in results:
            summary.trials += 1
            if result == "skipped":
                summary.skipped += 1
            elif result is not None:
                summary.errors.append(result)
        return summary

    # -- stages ------------------------------------------------------------

    def check_replay_cache(self, limit: int = 10) -> None:
        """Fail fast when replay would miss first-stage keys.

        Later-stage keys depend on generated content and surface as
        per-trial errors instead; a cold cache is caught here.
        """
        missing: list[str] = []
        for model in self.manifest.models:
            for batch_name in self.manifest.batches:
                store = self._explanation_store(model, batch_name)
                for config in ctx.batch_instances(batch_name):
                    for defect in self.defects():
                        prompt = ctx.assemble_prompt(self.artifacts_for(defect), config)
                        request = CompletionRequest(model=model, prompt=prompt,
                                                    schema_id="explanation")
                        for run_id in self.manifest.run_ids:
                            key = _trial_key(
                                {"defect_id": defect.id, "batch": batch_name,
                                 "configuration": config.name, "model": model,
                                 "run_id": run_id}
                            )
                            if key in store:
                                continue
                            if request.cache_key() not in self.gateway.cache:
                                missing.append(request.cache_key())
                        if len(missing) >= limit:
                            raise CacheMiss(
                                f"{len(missing)}+ first-stage keys, e.g. {missing[:3]}"
                            )
        if missing:
            raise CacheMiss(f"{len(missing)} first-stage keys, e.g. {missing[:3]}")

    def explain(self) -> SweepSummary:
        summary = SweepSummary()
        for model in self.manifest.models:
            for batch in self.manifest.batches:
                store = self._explanation_store(model, batch)
                tasks = []
                for config in ctx.batch_instances(batch):
                    for defect in self.defects():
                        artifacts = self.artifacts_for(defect)
                        for run_id in self.manifest.run_ids:
                            tasks.append(
                                self._explain_task(store, artifacts, config, model, run_id, batch)
                            )
                summary.merge(self._run_parallel(tasks))
        return summary

    def _explain_task(self, store, artifacts, config, model, run_id, batch):
        def task() -> Optional[str]:
            key = _trial_key(
                {
                    "defect_id": artifacts.defect.id,
                    "batch": batch,
                    "configuration": config.name,
                    "model": model,
                    "run_id": run_id,
                }
            )
            if key in store:
                return "skipped"
            try:
                record = ctx.run_explanation_trial(
                    artifacts, config, model, run_id, self.gateway,
                    clock=self.clock, batch=batch,
                )
            except FexlabError as exc:
                log.error("explanation trial %s failed: %s", key, exc)
                return f"explain {key}: {exc}"
            store.append(record.to_record())
            return None

        return task

    def score(self) -> SweepSummary:
        summary = SweepSummary()
        defects = {d.id: d for d in self.defects()}
        for model in self.manifest.models:
            judge_model = self.manifest.judge_model or model
            for batch in self.manifest.batches:
                explanations = self._explanation_store(model, batch)
                scores = self._score_store(model, batch)
                tasks = []
                for rec in explanations.records():
                    tasks.append(self._score_task(scores, rec, defects[rec["defect_id"]],
                                                  judge_model))
                summary.merge(self._run_parallel(tasks))
        return summary

    def _score_task(self, store, explanation_rec, defect, judge_model):
        def task() -> Optional[str]:
            key = _score_key({**explanation_rec, "judge_model": judge_model})
            if key in store:
                return "skipped"
            record = ctx.ExplanationRecord.from_record(explanation_rec)
            try:
                vector = score_explanation(
                    record.explanation_text, defect, judge_model, self.gateway
                )
            except FexlabError as exc:
                log.error("scoring %s failed: %s", key, exc)
                return f"score {key}: {exc}"
            store.append(
                {
                    "defect_id": explanation_rec["defect_id"],
                    "batch": explanation_rec["batch"],
                    "configuration": explanation_rec["configuration"],
                    "model": explanation_rec["model"],
                    "run_id": explanation_rec["run_id"],
                    "judge_model": judge_model,
                    "c1": vector.c1,
                    "c2": vector.c2,
                    "c3": vector.c3,
                    "c4": vector.c4,
                    "c5": vector.c5,
                    "c6": vector.c6,
                    "c1_grade": vector.c1_grade,
                    "c5_reference_count": vector.c5_reference_count,
                    "total": vector.total,
                }
            )
            return None

        return task

    def repair(self) -> SweepSummary:
        summary = SweepSummary()
        for model in self.manifest.models:
            # Condition 1: no explanation, full-context fix, once per defect/run.
            store = self._repair_store(model, NO_EXPLANATION_BATCH)
            tasks = []
            for defect in self.defects():
                artifacts = self.artifacts_for(defect)
                for run_id in self.manifest.run_ids:
                    tasks.append(self._repair_task(
                        store, artifacts, model, run_id,
                        batch=NO_EXPLANATION_BATCH,
                        configuration=repair_mod.CONDITION_NO_EXPLANATION,
                        condition=repair_mod.CONDITION_NO_EXPLANATION,
                        config=ctx.baseline_configuration(),
                        explanation_text=None,
                    ))
            summary.merge(self._run_parallel(tasks))

            # Condition 2: one attempt per explanation trial.
            defects = {d.id: d for d in self.defects()}
            for batch in self.manifest.batches:
                explanations = self._explanation_store(model, batch)
                store = self._repair_store(model, batch)
                tasks = []
                for rec in explanations.records():
                    record = ctx.ExplanationRecord.from_record(rec)
                    defect = defects[rec["defect_id"]]
                    artifacts = self.artifacts_for(defect)
                    config = ctx.ContextConfiguration(
                        frozenset(ctx.CANONICAL_MODULES)
                        if rec["configuration"] == ctx.BASELINE_NAME
                        else frozenset(rec["configuration"].split("+")),
                        rec["batch"] if rec["configuration"] != ctx.BASELINE_NAME
                        else ctx.BATCH_BASELINE,
                    )
                    tasks.append(self._repair_task(
                        store, artifacts, model, rec["run_id"],
                        batch=rec["batch"],
                        configuration=rec["configuration"],
                        condition=repair_mod.CONDITION_WITH_EXPLANATION,
                        config=config,
                        explanation_text=record.explanation_text,
                    ))
                summary.merge(self._run_parallel(tasks))
        return summary

    def _repair_task(self, store, artifacts, model, run_id, batch, configuration,
                     condition, config, explanation_text):
        def task() -> Optional[str]:
            key = _repair_key(
                {
                    "defect_id": artifacts.defect.id,
                    "condition": condition,
                    "configuration": configuration,
                    "model": model,
                    "run_id": run_id,
                }
            )
            if key in store:
                return "skipped"
            defect = artifacts.defect
            attempt = repair_mod.RepairAttempt(
                defect_id=defect.id,
                configuration=configuration,
                model=model,
                run_id=run_id,
                condition=condition,
                fix_snippet="",
                passed=False,
            )
            try:
                sections = "\n".join(
                    ctx.materialize_module(artifacts, m) for m in config.ordered_modules()
                )
                snippet = repair_mod.generate_fix(
                    sections, model, self.gateway, explanation_text=explanation_text
                )
                attempt.fix_snippet = snippet
                spliced = repair_mod.splice_fix(
                    defect.buggy_source, defect.target_function, snippet
                )
                outcome = repair_mod.validate_fix(
                    defect, spliced, timeout=self.manifest.test_timeout
                )
                attempt.passed = outcome.passed
                if not outcome.passed:
                    attempt.failure_reason = "timeout" if outcome.timed_out else "test_failed"
                if attempt.passed:
                    attempt.metrics = repair_mod.compute_precision(
                        spliced, defect.reference_fix, defect.buggy_source
                    )
            except FexlabError as exc:
                # Non-parsing or unusable output counts as a failed attempt.
                attempt.failure_reason = type(exc).__name__
                log.info("repair %s counted as failure: %s", key, exc)
            rec = attempt.to_record()
            rec["batch"] = batch
            store.append(rec)
            return None

        return task

    # -- analysis ----------------------------------------------------------

    def analysis_inputs(self) -> AnalysisInputs:
        scored_trials = []
        attempts = []
        baseline_attempts = []
        totals: dict[str, int] = {}
        for model in self.manifest.models:
            for batch in self.manifest.batches:
                for rec in self._score_store(model, batch).records():
                    scored_trials.append(
                        ScoredTrial(
                            defect_id=rec["defect_id"],
                            configuration=rec["configuration"],
                            batch=rec["batch"],
                            model=rec["model"],
                            run_id=rec["run_id"],
                            criteria=tuple(rec[c] for c in
                                           ("c1", "c2", "c3", "c4", "c5", "c6")),
                        )
                    )
                    totals[_trial_key(rec)] = rec["total"]
            for batch in self.manifest.batches:
                for rec in self._repair_store(model, batch).records():
                    total = totals.get(_trial_key(rec))
                    if total is None:
                        continue
                    attempts.append(
                        ScoredAttempt(
                            defect_id=rec["defect_id"],
                            configuration=rec["configuration"],
                            batch=rec["batch"],
                            model=rec["model"],
                            run_id=rec["run_id"],
                            total_score=total,
                            passed=rec["passed"],
                            metrics=rec.get("metrics"),
                        )
                    )
            for rec in self._repair_store(model, NO_EXPLANATION_BATCH).records():
                baseline_attempts.append(
                    ScoredAttempt(
                        defect_id=rec["defect_id"],
                        configuration=rec["configuration"],
                        batch=rec["batch"],
                        model=rec["model"],
                        run_id=rec["run_id"],
                        total_score=0,
                        passed=rec["passed"],
                        metrics=rec.get("metrics"),
                    )
                )
        labels = load_labels_csv(self.manifest.labels) if self.manifest.labels else []
        return AnalysisInputs(
            scored_trials=scored_trials,
            attempts=attempts,
            baseline_attempts=baseline_attempts,
            labels=labels,
            bootstrap_seed=self.manifest.seed or 20260809,
        )

    def count_repair_passes(self) -> int:
        passes = 0
        for model in self.manifest.models:
            for batch in list(self.manifest.batches) + [NO_EXPLANATION_BATCH]:
                passes += sum(
                    1 for rec in self._repair_store(model, batch).records()
                    if rec["passed"]
                )
        return passes

    def report(self) -> list[Path]:
        return emit_report(self.analysis_inputs(), self.out / "report")


def run_sweep(manifest: RunManifest, gateway: Gateway) -> SweepSummary:
    """validate -> explain -> score -> repair -> report, resumably."""
    pipeline = Pipeline(manifest, gateway)
    summary = SweepSummary()
    reports = pipeline.validate()
    unusable = [r["defect_id"] for r in reports if not r["usable"]]
    if unusable:
        raise FexlabError(f"corpus validation failed for defects: {unusable}")
    if manifest.mode == "replay":
        pipeline.check_replay_cache()
    summary.merge(pipeline.explain())
    summary.merge(pipeline.score())
    summary.merge(pipeline.repair())
    summary.passes = pipeline.count_repair_passes()
    pipeline.report()
    return summary
