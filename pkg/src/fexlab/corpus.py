"""Defect corpus loading, validation, and the Python subject toolchain.

A corpus is a directory of defect folders, each shaped as::

    <defect-id>/
        meta.yaml          id, target_function, function_span, root_cause_note
        buggy/<mod>.py     the module containing the defect
        test/<test>.py     the triggering test script (exit 0 == pass)
        fixed/<mod>.py     the reference minimal fix
        docstring.txt      optional prose documentation

Test execution always happens in a fresh temporary working copy so that
concurrent runs cannot interfere with each other or with the corpus.
"""

from __future__ import annotations

import ast
import json
import logging
import re
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import yaml

from .errors import MissingArtifact, ParseFailure, TraceFailure

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0

_TRACER = Path(__file__).parent / "_tracer.py"
_HEX_ADDR = re.compile(r"0x[0-9a-fA-F]+")


@dataclass(frozen=True)
class FunctionSpan:
    """Name and inclusive 1-based line span of the target function."""

    name: str
    start: int
    end: int


@dataclass(frozen=True)
class Defect:
    """One corpus entry."""

    id: str
    buggy_source: str
    triggering_test: str
    reference_fix: str
    docstring: str
    root_cause_note: str
    target_function: FunctionSpan
    module_filename: str
    test_filename: str

    def source_line_count(self) -> int:
        return len(self.buggy_source.splitlines())


@dataclass
class TestOutcome:
    """Result of one triggering-test run; pass means exit_code == 0 and nothing else."""

    exit_code: int
    error_text: str
    duration: float
    timed_out: bool = False

    @property
    def passed(self) -> bool:
        return self.exit_code == 0


@dataclass
class ExecutionTrace:
    """Executed lines of the buggy module during the triggering test."""

    executed_lines: list[int]
    exception_line: Optional[int]
    error_text: str


@dataclass
class ValidationReport:
    defect_id: str
    buggy_fails: bool
    reference_passes: bool
    parseable: bool

    @property
    def usable(self) -> bool:
        return self.buggy_fails and self.reference_passes and self.parseable

    def to_json(self) -> str:
        return json.dumps(
            {
                "defect_id": self.defect_id,
                "buggy_fails": self.buggy_fails,
                "reference_passes": self.reference_passes,
                "parseable": self.parseable,
                "usable": self.usable,
            },
            sort_keys=True,
        )


def _read_single_file(directory: Path, defect_id: str, label: str) -> tuple[str, str]:
    if not directory.is_dir():
        raise MissingArtifact(defect_id, f"{label}/")
    files = sorted(p for p in directory.iterdir() if p.is_file())
    if not files:
        raise MissingArtifact(defect_id, f"{label}/<file>")
    return files[0].name, files[0].read_text()


def load_defect(defect_dir: Path) -> Defect:
    """Load one defect directory; raises MissingArtifact / ParseFailure."""
    defect_dir = Path(defect_dir)
    meta_path = defect_dir / "meta.yaml"
    if not meta_path.is_file():
        raise MissingArtifact(defect_dir.name, "meta.yaml")
    meta = yaml.safe_load(meta_path.read_text())

    module_filename, buggy_source = _read_single_file(defect_dir / "buggy", meta["id"], "buggy")
    test_filename, triggering_test = _read_single_file(defect_dir / "test", meta["id"], "test")
    _, reference_fix = _read_single_file(defect_dir / "fixed", meta["id"], "fixed")

    doc_path = defect_dir / "docstring.txt"
    docstring = doc_path.read_text() if doc_path.is_file() else ""

    try:
        ast.parse(buggy_source)
    except SyntaxError as exc:
        raise ParseFailure(f"defect {meta['id']!r}: buggy module does not parse: {exc}") from exc

    span = meta["function_span"]
    return Defect(
        id=meta["id"],
        buggy_source=buggy_source,
        triggering_test=triggering_test,
        reference_fix=reference_fix,
        docstring=docstring,
        root_cause_note=meta.get("root_cause_note", ""),
        target_function=FunctionSpan(meta["target_function"], int(span[0]), int(span[1])),
        module_filename=module_filename,
        test_filename=test_filename,
    )


def load_corpus(root_path: Path) -> list[Defect]:
    """Load every defect folder under root_path, sorted by defect id."""
    root = Path(root_path)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root {root} does not exist")
    defects = []
    for entry in sorted(root.iterdir()):
        if entry.is_dir():
            defects.append(load_defect(entry))
    if not defects:
        log.warning("corpus at %s is empty", root)
    return sorted(defects, key=lambda d: d.id)


def _materialize(defect: Defect, module_source: str, workdir: Path) -> tuple[Path, Path]:
    module_path = workdir / defect.module_filename
    test_path = workdir / defect.test_filename
    module_path.write_text(module_source)
    test_path.write_text(defect.triggering_test)
    return module_path, test_path


def _sanitize(text: str, workdir: Path) -> str:
    # Temp-dir paths and object addresses would make otherwise identical
    # failures compare unequal across runs.
    text = text.replace(str(workdir), "<work>")
    return _HEX_ADDR.sub("0x…", text)


def run_triggering_test(
    defect: Defect, module_source: str, timeout: float = DEFAULT_TIMEOUT
) -> TestOutcome:
    """Run the triggering test against module_source in an isolated working copy."""
    with tempfile.TemporaryDirectory(prefix="fexlab-run-") as tmp:
        workdir = Path(tmp)
        _, test_path = _materialize(defect, module_source, workdir)
        start = time.monotonic()
        try:
            proc = subprocess.run(
                [sys.executable, test_path.name],
                cwd=workdir,
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired:
            duration = time.monotonic() - start
            return TestOutcome(
                exit_code=-1,
                error_text=f"timeout after {timeout:g}s",
                duration=duration,
                timed_out=True,
            )
        duration = time.monotonic() - start
        return TestOutcome(
            exit_code=proc.returncode,
            error_text=_sanitize(proc.stderr, workdir),
            duration=duration,
        )


def trace_test(defect: Defect, module_source: str | None = None,
               timeout: float = DEFAULT_TIMEOUT) -> ExecutionTrace:
    """Run the triggering test while tracing executed lines of the buggy module."""
    source = defect.buggy_source if module_source is None else module_source
    with tempfile.TemporaryDirectory(prefix="fexlab-trace-") as tmp:
        workdir = Path(tmp)
        module_path, test_path = _materialize(defect, source, workdir)
        out_json = workdir / "trace.json"
        try:
            subprocess.run(
                [sys.executable, str(_TRACER), module_path.name, test_path.name, out_json.name],
                cwd=workdir,
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise TraceFailure(f"defect {defect.id!r}: trace timed out") from exc
        if not out_json.is_file():
            raise TraceFailure(f"defect {defect.id!r}: tracer produced no output")
        data = json.loads(out_json.read_text())
    n_lines = defect.source_line_count() if module_source is None else len(source.splitlines())
    executed = [ln for ln in data["executed_lines"] if 1 <= ln <= n_lines]
    if not executed:
        raise TraceFailure(f"defect {defect.id!r}: no module lines executed")
    exception_line = data["exception_line"]
    if exception_line is not None and exception_line not in executed:
        exception_line = None
    return ExecutionTrace(
        executed_lines=executed,
        exception_line=exception_line,
        error_text=_sanitize(data["error_text"], workdir),
    )


def validate_defect(defect: Defect, timeout: float = DEFAULT_TIMEOUT) -> ValidationReport:
    """Check the corpus invariants: buggy fails, reference passes, both parse."""
    parseable = True
    for source in (defect.buggy_source, defect.reference_fix):
        try:
            ast.parse(source)
        except SyntaxError:
            parseable = False
    buggy_fails = False
    reference_passes = False
    if parseable:
        buggy_fails = not run_triggering_test(defect, defect.buggy_source, timeout).passed
        reference_passes = run_triggering_test(defect, defect.reference_fix, timeout).passed
    report = ValidationReport(
        defect_id=defect.id,
        buggy_fails=buggy_fails,
        reference_passes=reference_passes,
        parseable=parseable,
    )
    if not report.usable:
        log.warning("defect %s flagged unusable: %s", defect.id, report.to_json())
    return report


def parse_module(source: str) -> ast.Module:
    """Parse source to an AST with line spans on every node."""
    try:
        return ast.parse(source)
    except SyntaxError as exc:
        raise ParseFailure(str(exc)) from exc


def defined_function_names(source: str) -> list[str]:
    """Names of every function/method defined in the module, in order."""
    tree = parse_module(source)
    names = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            names.append(node.name)
    return names
