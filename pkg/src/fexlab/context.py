"""Context modules, configuration enumeration, prompt assembly, and trials.

Eight context modules exist: four direct artifacts (CODE, ERROR, TEST,
DOCSTRING) and four slice renderings.  A configuration is a subset of them;
BASELINE is the full set.  The execution protocol groups configurations
into three batches (isolated, two_way, three_way), each run alongside
BASELINE, giving 93 unique configurations and 95 instances per defect/run.
"""

from __future__ import annotations

import importlib.resources
import itertools
from dataclasses import dataclass
from typing import Optional

from .corpus import Defect, ExecutionTrace
from .errors import MissingSlice
from .gateway import CompletionRequest, Gateway
from .slicing import LineSet, render_slice

CANONICAL_MODULES = (
    "CODE",
    "ERROR",
    "TEST",
    "DOCSTRING",
    "SLICE_BLOCK",
    "SLICE_BACKWARD",
    "SLICE_FORWARD",
    "SLICE_UNION",
)

BATCH_ISOLATED = "isolated"
BATCH_TWO_WAY = "two_way"
BATCH_THREE_WAY = "three_way"
BATCH_BASELINE = "baseline"
ALL_BATCHES = (BATCH_ISOLATED, BATCH_TWO_WAY, BATCH_THREE_WAY)

BASELINE_NAME = "BASELINE"
EMPTY_DOCSTRING_MARKER = "(empty)"

_SLICE_KIND = {
    "SLICE_BLOCK": "block",
    "SLICE_BACKWARD": "backward",
    "SLICE_FORWARD": "forward",
    "SLICE_UNION": "union",
}

_BATCH_SIZE = {BATCH_ISOLATED: 1, BATCH_TWO_WAY: 2, BATCH_THREE_WAY: 3}


def _prompt_text(name: str) -> str:
    return importlib.resources.files("fexlab.prompts").joinpath(name).read_text()


EXPLAIN_PREAMBLE = _prompt_text("explain_preamble_v1.txt")


@dataclass(frozen=True)
class ContextConfiguration:
    modules: frozenset[str]
    batch: str

    def __post_init__(self):
        unknown = self.modules - set(CANONICAL_MODULES)
        if unknown:
            raise ValueError(f"unknown context modules: {sorted(unknown)}")
        if self.batch == BATCH_BASELINE:
            if self.modules != frozenset(CANONICAL_MODULES):
                raise ValueError("baseline configuration must contain all modules")
        elif len(self.modules) != _BATCH_SIZE[self.batch]:
            raise ValueError(f"{self.batch} configuration must have "
                             f"{_BATCH_SIZE[self.batch]} modules")

    @property
    def name(self) -> str:
        if self.modules == frozenset(CANONICAL_MODULES):
            return BASELINE_NAME
        return "+".join(sorted(self.modules))

    def ordered_modules(self) -> list[str]:
        return [m for m in CANONICAL_MODULES if m in self.modules]


def baseline_configuration() -> ContextConfiguration:
    return ContextConfiguration(frozenset(CANONICAL_MODULES), BATCH_BASELINE)


def enumerate_configurations(batch: str) -> list[ContextConfiguration]:
    """Configurations of one batch, in deterministic canonical order."""
    if batch == BATCH_BASELINE:
        return [baseline_configuration()]
    size = _BATCH_SIZE.get(batch)
    if size is None:
        raise ValueError(f"unknown batch {batch!r}")
    return [
        ContextConfiguration(frozenset(combo), batch)
        for combo in itertools.combinations(CANONICAL_MODULES, size)
    ]


def batch_instances(batch: str) -> list[ContextConfiguration]:
    """One batch's execution plan: its configurations plus BASELINE.

    BASELINE repeats once per batch; the executing batch is recorded on the
    trial record, not on the configuration object.
    """
    return enumerate_configurations(batch) + [baseline_configuration()]


def unique_configuration_names() -> set[str]:
    names = {BASELINE_NAME}
    for batch in ALL_BATCHES:
        names.update(c.name for c in enumerate_configurations(batch))
    return names


@dataclass
class DefectArtifacts:
    """Per-defect evidence bundle: trace plus rendered slices."""

    defect: Defect
    trace: ExecutionTrace
    slices: dict[str, LineSet]


def materialize_module(artifacts: DefectArtifacts, module_id: str) -> str:
    """One labeled evidence section; the body is an exact artifact substring."""
    defect = artifacts.defect
    if module_id == "CODE":
        body = defect.buggy_source
    elif module_id == "ERROR":
        body = artifacts.trace.error_text
    elif module_id == "TEST":
        body = defect.triggering_test
    elif module_id == "DOCSTRING":
        body = defect.docstring if defect.docstring.strip() else EMPTY_DOCSTRING_MARKER
    elif module_id in _SLICE_KIND:
        kind = _SLICE_KIND[module_id]
        if artifacts.slices is None or kind not in artifacts.slices:
            raise MissingSlice(f"slice {kind!r} not computed for defect {defect.id}")
        body = render_slice(defect.buggy_source, artifacts.slices[kind])
    else:
        raise ValueError(f"unknown context module {module_id!r}")
    return f"=== {module_id} ===\n{body.rstrip()}\n"


def assemble_prompt(artifacts: DefectArtifacts, config: ContextConfiguration) -> str:
    """Preamble plus one section per included module, in canonical order."""
    sections = [materialize_module(artifacts, m) for m in config.ordered_modules()]
    return EXPLAIN_PREAMBLE.rstrip() + "\n\n" + "\n".join(sections)


@dataclass(frozen=True)
class TrialKey:
    defect_id: str
    configuration: str
    model: str
    run_id: int

    def as_string(self) -> str:
        return f"{self.defect_id}|{self.configuration}|{self.model}|run{self.run_id}"


@dataclass
class ExplanationRecord:
    key: TrialKey
    batch: str
    prompt: str
    problem: str
    causal_chain: str
    suggested_actions: str
    usage: dict
    served_from: str
    timestamp: str

    @property
    def explanation_text(self) -> str:
        return "\n".join([self.problem, self.causal_chain, self.suggested_actions])

    def to_record(self) -> dict:
        return {
            "defect_id": self.key.defect_id,
            "configuration": self.key.configuration,
            "model": self.key.model,
            "run_id": self.key.run_id,
            "batch": self.batch,
            "prompt": self.prompt,
            "problem": self.problem,
            "causal_chain": self.causal_chain,
            "suggested_actions": self.suggested_actions,
            "usage": self.usage,
            "served_from": self.served_from,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ExplanationRecord":
        return cls(
            key=TrialKey(rec["defect_id"], rec["configuration"], rec["model"], rec["run_id"]),
            batch=rec["batch"],
            prompt=rec["prompt"],
            problem=rec["problem"],
            causal_chain=rec["causal_chain"],
            suggested_actions=rec["suggested_actions"],
            usage=rec.get("usage", {}),
            served_from=rec.get("served_from", "live"),
            timestamp=rec.get("timestamp", ""),
        )


def run_explanation_trial(
    artifacts: DefectArtifacts,
    config: ContextConfiguration,
    model: str,
    run_id: int,
    gateway: Gateway,
    clock=None,
    batch: Optional[str] = None,
) -> ExplanationRecord:
    """Execute one explanation trial; callers handle idempotent persistence."""
    prompt = assemble_prompt(artifacts, config)
    response = gateway.complete(CompletionRequest(model=model, prompt=prompt,
                                                  schema_id="explanation"))
    timestamp = clock() if clock is not None else ""
    return ExplanationRecord(
        key=TrialKey(artifacts.defect.id, config.name, model, run_id),
        batch=batch or config.batch,
        prompt=prompt,
        problem=response.parsed["problem"],
        causal_chain=response.parsed["causal_chain"],
        suggested_actions=response.parsed["suggested_actions"],
        usage=response.usage,
        served_from=response.served_from,
        timestamp=timestamp,
    )
