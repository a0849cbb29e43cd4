#!/usr/bin/env python3
"""Enumerate context configurations and assemble one explanation prompt.

Eight evidence modules combine into 93 unique configurations: 8 isolated,
28 pairwise, 56 three-way, plus the full-context BASELINE. Each execution
batch re-runs BASELINE as its reference point, so one defect/run evaluates
95 configuration instances.
"""

from pathlib import Path

from fexlab.context import (
    ALL_BATCHES,
    ContextConfiguration,
    DefectArtifacts,
    assemble_prompt,
    batch_instances,
    enumerate_configurations,
    unique_configuration_names,
)
from fexlab.corpus import load_corpus, trace_test
from fexlab.slicing import ModuleIndex, compute_slices

ROOT = Path(__file__).resolve().parents[1]

for batch in ("isolated", "two_way", "three_way", "baseline"):
    configs = enumerate_configurations(batch)
    print(f"{batch:9s} -> {len(configs):2d} configurations "
          f"(e.g. {configs[0].name})")
print(f"unique overall: {len(unique_configuration_names())}")
print(f"instances per defect/run: "
      f"{sum(len(batch_instances(b)) for b in ALL_BATCHES)}\n")

defect = load_corpus(ROOT / "corpus")[0]
trace = trace_test(defect)
artifacts = DefectArtifacts(defect, trace,
                            compute_slices(ModuleIndex(defect.buggy_source), trace))
config = ContextConfiguration(frozenset({"ERROR", "SLICE_BACKWARD"}), "two_way")
print(f"---- prompt for configuration {config.name}\n")
print(assemble_prompt(artifacts, config))
