#!/usr/bin/env python3
"""Derive the four failure-local slices from one traced defect.

The seed line is the first exception raised inside the buggy module, or
the last executed line when the failure surfaces in the test file. From
that seed we take the innermost enclosing block, an approximate backward
slice over executed lines, a forward slice scoped to the enclosing
function, and their union.
"""

from pathlib import Path

from fexlab.corpus import load_corpus, trace_test
from fexlab.slicing import ModuleIndex, compute_slices, render_slice, select_seed

ROOT = Path(__file__).resolve().parents[1]

defect = next(d for d in load_corpus(ROOT / "corpus") if d.id == "d03_duration_parse")
trace = trace_test(defect)
seed = select_seed(trace)
print(f"defect {defect.id}; seed line {seed.line} (origin: {seed.origin})\n")

index = ModuleIndex(defect.buggy_source)
slices = compute_slices(index, trace)
for kind in ("block", "backward", "forward", "union"):
    lineset = slices[kind]
    print(f"---- {kind} slice, lines {lineset.sorted()}")
    print(render_slice(defect.buggy_source, lineset))
    print()
