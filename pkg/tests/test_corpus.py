import pytest

from fexlab.corpus import (
    load_corpus,
    run_triggering_test,
    trace_test,
    validate_defect,
)
from fexlab.errors import MissingArtifact, ParseFailure

from .conftest import write_defect_dir

BUGGY = """\
def double(x):
    return x + x


def triple(x):
    return x + x
"""

FIXED = """\
def double(x):
    return x + x


def triple(x):
    return 3 * x
"""

TEST = """\
from mod import triple

assert triple(2) == 6
"""


def test_load_corpus_demo_has_twelve_defects(demo_corpus):
    assert len(demo_corpus) == 12
    assert [d.id for d in demo_corpus] == sorted(d.id for d in demo_corpus)


def test_load_corpus_empty_dir_warns(tmp_path, caplog):
    with caplog.at_level("WARNING"):
        assert load_corpus(tmp_path) == []
    assert any("empty" in rec.message for rec in caplog.records)


def test_missing_docstring_loads_as_empty(demo_corpus):
    by_id = {d.id: d for d in demo_corpus}
    assert by_id["d03_duration_parse"].docstring == ""
    assert by_id["d02_running_stats"].docstring != ""


def test_missing_test_file_raises(tmp_path):
    d = write_defect_dir(tmp_path, "broken", BUGGY, TEST, FIXED, "triple", (5, 6))
    (d / "test" / "test_mod.py").unlink()
    with pytest.raises(MissingArtifact):
        load_corpus(tmp_path)


def test_unparsable_buggy_module_raises(tmp_path):
    write_defect_dir(tmp_path, "broken", "def f(:\n", TEST, FIXED, "f", (1, 1))
    with pytest.raises(ParseFailure):
        load_corpus(tmp_path)


def test_run_triggering_test_buggy_fails_fixed_passes(tmp_path):
    write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    defect = load_corpus(tmp_path)[0]
    assert run_triggering_test(defect, defect.buggy_source).exit_code != 0
    assert run_triggering_test(defect, defect.reference_fix).exit_code == 0


def test_run_triggering_test_is_deterministic(tmp_path):
    write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    defect = load_corpus(tmp_path)[0]
    first = run_triggering_test(defect, defect.buggy_source)
    second = run_triggering_test(defect, defect.buggy_source)
    assert first.exit_code == second.exit_code


def test_timeout_recorded_as_distinct_non_pass(tmp_path):
    looping = "def triple(x):\n    while True:\n        pass\n"
    write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    defect = load_corpus(tmp_path)[0]
    outcome = run_triggering_test(defect, looping, timeout=1.0)
    assert outcome.timed_out
    assert not outcome.passed


def test_validate_defect_well_formed(tmp_path):
    write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    report = validate_defect(load_corpus(tmp_path)[0])
    assert report.buggy_fails and report.reference_passes and report.parseable
    assert report.usable


def test_validate_defect_flags_accidentally_passing_buggy(tmp_path):
    write_defect_dir(tmp_path, "d", FIXED, TEST, FIXED, "triple", (5, 6))
    report = validate_defect(load_corpus(tmp_path)[0])
    assert not report.buggy_fails
    assert not report.usable


def test_validate_defect_flags_unparsable_reference(tmp_path):
    d = write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    (d / "fixed" / "mod.py").write_text("def triple(x)\n    return 3 * x\n")
    report = validate_defect(load_corpus(tmp_path)[0])
    assert not report.parseable
    assert not report.usable


def test_trace_exception_inside_module(tmp_path):
    buggy = "def f(x):\n    return 1 // x\n"
    test = "from mod import f\n\nassert f(0) == 0\n"
    fixed = "def f(x):\n    return 0\n"
    write_defect_dir(tmp_path, "d", buggy, test, fixed, "f", (1, 2))
    trace = trace_test(load_corpus(tmp_path)[0])
    assert trace.exception_line == 2
    assert 2 in trace.executed_lines
    assert "ZeroDivisionError" in trace.error_text


def test_trace_assertion_in_test_has_no_exception_line(tmp_path):
    write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    trace = trace_test(load_corpus(tmp_path)[0])
    assert trace.exception_line is None
    assert trace.executed_lines


def test_trace_lines_within_module(demo_corpus):
    defect = demo_corpus[0]
    trace = trace_test(defect)
    n = len(defect.buggy_source.splitlines())
    assert all(1 <= line <= n for line in trace.executed_lines)


def test_trace_single_line_function_covered(tmp_path):
    buggy = "def f(x):\n    return x - 1\n"
    test = "from mod import f\n\nassert f(1) == 1\n"
    fixed = "def f(x):\n    return x\n"
    write_defect_dir(tmp_path, "d", buggy, test, fixed, "f", (1, 2))
    trace = trace_test(load_corpus(tmp_path)[0])
    assert 2 in trace.executed_lines


def test_target_span_inside_buggy_source(demo_corpus):
    for defect in demo_corpus:
        n = len(defect.buggy_source.splitlines())
        span = defect.target_function
        assert 1 <= span.start <= span.end <= n


def test_error_text_contains_no_temp_paths(tmp_path):
    write_defect_dir(tmp_path, "d", BUGGY, TEST, FIXED, "triple", (5, 6))
    trace = trace_test(load_corpus(tmp_path)[0])
    assert "/tmp/fexlab-" not in trace.error_text
