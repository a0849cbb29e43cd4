#!/usr/bin/env python3
"""Walk through the defect corpus: load, validate, run, and trace.

Every defect folder packages a buggy module, the triggering test that
exposes it, and the reference minimal fix. A defect is usable when the
test fails on the buggy module and passes on the fix.
"""

from pathlib import Path

from fexlab.corpus import load_corpus, run_triggering_test, trace_test, validate_defect

ROOT = Path(__file__).resolve().parents[1]

defects = load_corpus(ROOT / "corpus")
print(f"corpus holds {len(defects)} defects\n")

defect = next(d for d in defects if d.id == "d02_running_stats")
print(f"== {defect.id}: {defect.root_cause_note.strip()}\n")

print("-- triggering test against the buggy module")
outcome = run_triggering_test(defect, defect.buggy_source)
print(f"exit code {outcome.exit_code} in {outcome.duration:.2f}s")
print(outcome.error_text.strip().splitlines()[-1], "\n")

print("-- same test against the reference fix")
outcome = run_triggering_test(defect, defect.reference_fix)
print(f"exit code {outcome.exit_code} (pass)\n")

print("-- validation report for every defect")
for d in defects:
    report = validate_defect(d)
    print(report.to_json())

print("\n-- execution trace of the failing run")
trace = trace_test(defect)
print(f"executed lines: {trace.executed_lines}")
print(f"first in-module exception line: {trace.exception_line}")
