import json

import pytest
from hypothesis import given, settings, strategies as st

from fexlab.corpus import FunctionSpan
from fexlab.errors import ParseFailure, SnippetNotAFunction, SpliceParseFailure
from fexlab.gateway import Gateway
from fexlab.repair import (
    compute_precision,
    fix_prompt,
    generate_fix,
    halstead_volume,
    levenshtein_distance,
    levenshtein_norm,
    line_deviation,
    normalize_ast,
    spurious_changes,
    splice_fix,
    validate_fix,
)


MODULE = """\
HEADER = "untouchable"


def helper(x):
    return x + 1


def target(a, b):
    left = helper(a)
    right = helper(b)
    return left - right


FOOTER = "untouchable too"
"""
TARGET_SPAN = FunctionSpan("target", 8, 11)


def oracle_levenshtein(a: str, b: str) -> int:
    """Full-matrix dynamic program, kept separate from the implementation."""
    rows, cols = len(a) + 1, len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(table[i - 1][j] + 1, table[i][j - 1] + 1,
                              table[i - 1][j - 1] + cost)
    return table[-1][-1]


# -- splicing -----------------------------------------------------------------


def test_splice_identity_body_preserves_module():
    snippet = (
        "def target(a, b):\n"
        "    left = helper(a)\n"
        "    right = helper(b)\n"
        "    return left - right"
    )
    spliced = splice_fix(MODULE, TARGET_SPAN, snippet)
    assert spliced == MODULE


def test_splice_locality_only_function_span_changes():
    snippet = "def target(a, b):\n    return helper(a) * helper(b)"
    spliced = splice_fix(MODULE, TARGET_SPAN, snippet)
    original_lines = MODULE.splitlines()
    spliced_lines = spliced.splitlines()
    assert spliced_lines[: TARGET_SPAN.start] == original_lines[: TARGET_SPAN.start]
    assert spliced_lines[-2:] == original_lines[-2:]
    assert "helper(a) * helper(b)" in spliced


def test_splice_rejects_syntax_error_snippet():
    with pytest.raises(SnippetNotAFunction):
        splice_fix(MODULE, TARGET_SPAN, "def target(a, b):\n    return ((")


def test_splice_rejects_non_function_snippet():
    with pytest.raises(SnippetNotAFunction):
        splice_fix(MODULE, TARGET_SPAN, "x = 1")
    with pytest.raises(SnippetNotAFunction):
        splice_fix(MODULE, TARGET_SPAN,
                   "def target():\n    return 1\n\nprint(target())")


def test_splice_missing_target_function():
    with pytest.raises(SpliceParseFailure):
        splice_fix(MODULE, FunctionSpan("absent", 8, 11),
                   "def absent():\n    return 1")


def test_splice_indented_method_target():
    module = (
        "class Box:\n"
        "    def size(self):\n"
        "        a = 1\n"
        "        return a\n"
    )
    snippet = "def size(self):\n    return 2"
    spliced = splice_fix(module, FunctionSpan("size", 2, 4), snippet)
    assert spliced == "class Box:\n    def size(self):\n        return 2\n"


# -- generation ---------------------------------------------------------------


def test_generate_fix_parses_single_function():
    provider = lambda req: (json.dumps({"function": "def f():\n    return 3"}), {})
    gw = Gateway(provider=provider, mode="live", sleep=lambda s: None)
    snippet = generate_fix("context", "m", gw)
    assert snippet.startswith("def f()")


def test_generate_fix_rejects_prose_wrapped_function():
    provider = lambda req: (json.dumps({"function": "sure thing:\ndef f(): pass"}), {})
    gw = Gateway(provider=provider, mode="live", sleep=lambda s: None)
    with pytest.raises(SnippetNotAFunction):
        generate_fix("context", "m", gw)


def test_fix_prompt_explanation_appended_only_with_condition():
    without = fix_prompt("CTX", None)
    with_expl = fix_prompt("CTX", "the cause is X")
    assert "FAILURE EXPLANATION" not in without
    assert "the cause is X" in with_expl
    assert with_expl.index("CTX") < with_expl.index("the cause is X")


# -- validation ---------------------------------------------------------------


def test_validate_fix_reference_passes_buggy_fails(demo_defect):
    assert validate_fix(demo_defect, demo_defect.reference_fix).passed
    assert not validate_fix(demo_defect, demo_defect.buggy_source).passed


def test_validate_fix_unconditional_raise_fails(demo_defect):
    broken = demo_defect.buggy_source.replace(
        "recent = window(values, size)", "raise RuntimeError('no')"
    )
    assert not validate_fix(demo_defect, broken).passed


# -- normalization ------------------------------------------------------------


def test_normalize_renames_locals_consistently():
    a = "def f(x):\n    tmp = x + 1\n    out = tmp * 2\n    return out\n"
    b = "def f(x):\n    alpha = x + 1\n    beta = alpha * 2\n    return beta\n"
    assert normalize_ast(a) == normalize_ast(b)
    assert "v1" in normalize_ast(a)


def test_normalize_preserves_params_and_globals():
    src = "COUNT = 3\n\ndef f(keep_me):\n    local = keep_me + COUNT\n    return local\n"
    out = normalize_ast(src)
    assert "keep_me" in out and "COUNT" in out
    assert "local" not in out


def test_normalize_drops_comments_and_blank_lines():
    a = "def f():\n    # explains nothing\n    x = 1\n\n    return x\n"
    b = "def f():\n    x = 1\n    return x\n"
    assert normalize_ast(a) == normalize_ast(b)


def test_normalize_distinguishes_semantics():
    a = "def f(x):\n    return x + 1\n"
    b = "def f(x):\n    return x - 1\n"
    assert normalize_ast(a) != normalize_ast(b)


def test_normalize_idempotent():
    src = "def f(x):\n    first = x * 2\n    second = first + x\n    return second\n"
    once = normalize_ast(src)
    assert normalize_ast(once) == once


def test_normalize_unparsable_raises():
    with pytest.raises(ParseFailure):
        normalize_ast("def broken(:\n")


# -- metrics ------------------------------------------------------------------


def test_levenshtein_kitten_sitting_vs_oracle():
    assert levenshtein_distance("kitten", "sitting") == 3
    assert oracle_levenshtein("kitten", "sitting") == 3
    assert levenshtein_norm("kitten", "sitting") == pytest.approx(3 / 7, abs=1e-9)


@settings(max_examples=60)
@given(st.text(max_size=24), st.text(max_size=24))
def test_levenshtein_matches_oracle_and_is_symmetric(a, b):
    dist = levenshtein_distance(a, b)
    assert dist == oracle_levenshtein(a, b)
    assert levenshtein_norm(a, b) == levenshtein_norm(b, a)
    assert 0.0 <= levenshtein_norm(a, b) <= 1.0


def test_levenshtein_norm_zero_iff_equal():
    assert levenshtein_norm("abc", "abc") == 0.0
    assert levenshtein_norm("", "") == 0.0
    assert levenshtein_norm("abc", "abd") > 0.0


def test_halstead_volume_empty_and_identity():
    assert halstead_volume("") == 0.0
    src = "def f(x):\n    return x + 1\n"
    assert halstead_volume(src) == halstead_volume(src)
    assert halstead_volume(src) > 0.0


def test_compute_precision_identity():
    src = "def f(x):\n    y = x + 1\n    return y\n"
    renamed = "def f(x):\n    q = x + 1\n    return q\n"
    metrics = compute_precision(renamed, src, src)
    assert metrics.line_deviation == 0
    assert metrics.levenshtein_norm == 0.0
    assert metrics.spurious_changes == 0
    assert metrics.halstead_delta_volume == 0.0


def test_compute_precision_on_demo_defect(demo_defect):
    metrics = compute_precision(
        demo_defect.reference_fix, demo_defect.reference_fix, demo_defect.buggy_source
    )
    assert metrics.levenshtein_norm == 0.0
    assert metrics.spurious_changes == 0
    assert metrics.halstead_delta_volume != 0.0


def test_spurious_changes_outside_reference_region():
    buggy = "a = 1\nb = 2\nc = 3\nd = 4\n"
    reference = "a = 1\nb = 99\nc = 3\nd = 4\n"       # touches line 2 only
    fix = "a = 1\nb = 99\nc = 3\nd = 77\n"             # also touches line 4
    assert spurious_changes(fix, reference, buggy) == 1
    assert spurious_changes(reference, reference, buggy) == 0


def test_line_deviation_counts_both_sides():
    assert line_deviation("a\nb\n", "a\nb\n") == 0
    assert line_deviation("a\nb\n", "a\nc\n") == 2
    assert line_deviation("a\n", "a\nb\n") == 1


def test_normalization_and_metrics_over_real_modules(demo_corpus):
    for defect in demo_corpus:
        for source in (defect.buggy_source, defect.reference_fix):
            normalized = normalize_ast(source)
            assert normalize_ast(normalized) == normalized, defect.id
            assert halstead_volume(normalized) > 0.0, defect.id
        metrics = compute_precision(
            defect.buggy_source, defect.reference_fix, defect.buggy_source
        )
        # Buggy and reference genuinely differ after normalization.
        assert 0.0 < metrics.levenshtein_norm <= 1.0, defect.id
        assert metrics.line_deviation > 0, defect.id
        assert metrics.halstead_delta_volume == 0.0, defect.id  # fix == buggy input


def test_full_loop_reference_body_splices_and_passes(demo_corpus):
    import ast

    for defect in demo_corpus[:3]:
        tree = ast.parse(defect.reference_fix)
        fn = next(
            node for node in ast.walk(tree)
            if isinstance(node, ast.FunctionDef) and node.name == defect.target_function.name
        )
        snippet = ast.get_source_segment(defect.reference_fix, fn)
        spliced = splice_fix(defect.buggy_source, defect.target_function, snippet)
        assert validate_fix(defect, spliced).passed, defect.id
