from __future__ import annotations

import textwrap
from pathlib import Path

import pytest

from fexlab.corpus import Defect, FunctionSpan, load_corpus, trace_test
from fexlab.slicing import ModuleIndex, compute_slices
from fexlab.context import DefectArtifacts

REPO_ROOT = Path(__file__).resolve().parents[1]
CORPUS_DIR = REPO_ROOT / "corpus"
REPLAY_DIR = REPO_ROOT / "replay"


def write_defect_dir(
    root: Path,
    defect_id: str,
    buggy: str,
    test: str,
    fixed: str,
    target: str,
    span: tuple[int, int],
    docstring: str | None = None,
    module_name: str = "mod.py",
) -> Path:
    """Materialize one defect folder in the corpus layout."""
    d = root / defect_id
    (d / "buggy").mkdir(parents=True)
    (d / "test").mkdir()
    (d / "fixed").mkdir()
    (d / "buggy" / module_name).write_text(textwrap.dedent(buggy))
    (d / "test" / ("test_" + module_name)).write_text(textwrap.dedent(test))
    (d / "fixed" / module_name).write_text(textwrap.dedent(fixed))
    if docstring is not None:
        (d / "docstring.txt").write_text(docstring)
    (d / "meta.yaml").write_text(
        f"id: {defect_id}\n"
        f"target_function: {target}\n"
        f"function_span: [{span[0]}, {span[1]}]\n"
        f"root_cause_note: synthetic fixture defect\n"
    )
    return d


def make_defect(
    buggy: str,
    test: str = "",
    fixed: str = "",
    target: str = "f",
    span: tuple[int, int] = (1, 2),
    docstring: str = "",
    defect_id: str = "fix01",
) -> Defect:
    """In-memory Defect for unit tests that never touch the file system."""
    buggy = textwrap.dedent(buggy)
    return Defect(
        id=defect_id,
        buggy_source=buggy,
        triggering_test=textwrap.dedent(test),
        reference_fix=textwrap.dedent(fixed) or buggy,
        docstring=docstring,
        root_cause_note="synthetic",
        target_function=FunctionSpan(target, span[0], span[1]),
        module_filename="mod.py",
        test_filename="test_mod.py",
    )


@pytest.fixture(scope="session")
def demo_corpus():
    return load_corpus(CORPUS_DIR)


@pytest.fixture(scope="session")
def demo_defect(demo_corpus):
    return {d.id: d for d in demo_corpus}["d02_running_stats"]


@pytest.fixture(scope="session")
def demo_artifacts(demo_defect):
    trace = trace_test(demo_defect)
    index = ModuleIndex(demo_defect.buggy_source)
    return DefectArtifacts(demo_defect, trace, compute_slices(index, trace))


@pytest.fixture(scope="session")
def corpus_traces(demo_corpus):
    return [(defect, trace_test(defect)) for defect in demo_corpus]


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    try:
        from .test_acceptance import CRITERIA, RESULTS
    except ImportError:
        return
    if not RESULTS and not terminalreporter.stats.get("passed"):
        return
    ran_acceptance = any(
        "test_acceptance" in getattr(rep, "nodeid", "")
        for reps in terminalreporter.stats.values()
        for rep in reps
        if hasattr(rep, "nodeid")
    )
    if not ran_acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in CRITERIA:
        status = RESULTS.get(criterion, "FAIL")
        terminalreporter.write_line(f"{status}  {criterion}")
