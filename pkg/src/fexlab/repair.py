"""Fix generation, splicing, validation, and precision metrics.

A candidate fix is a single function definition returned by the model.  Its
body is spliced over the target function's body; everything outside the
target function stays byte-identical.  Passing fixes are compared against
the reference minimal fix after AST normalization (local variables renamed
``v1, v2, ...`` in first-occurrence order, comments and blank lines
dropped).
"""

from __future__ import annotations

import ast
import difflib
import importlib.resources
import io
import keyword
import math
import textwrap
import tokenize
from dataclasses import dataclass
from typing import Optional

from .corpus import Defect, FunctionSpan, TestOutcome, run_triggering_test
from .errors import ParseFailure, SnippetNotAFunction, SpliceParseFailure
from .gateway import CompletionRequest, Gateway

CONDITION_NO_EXPLANATION = "NO_EXPLANATION"
CONDITION_WITH_EXPLANATION = "WITH_EXPLANATION"

FIX_INSTRUCTION = (
    importlib.resources.files("fexlab.prompts").joinpath("fix_instruction_v1.txt").read_text()
)


@dataclass
class PrecisionMetrics:
    line_deviation: int
    levenshtein_norm: float
    spurious_changes: int
    halstead_delta_volume: float

    def to_record(self) -> dict:
        return {
            "line_deviation": self.line_deviation,
            "levenshtein_norm": self.levenshtein_norm,
            "spurious_changes": self.spurious_changes,
            "halstead_delta_volume": self.halstead_delta_volume,
        }


@dataclass
class RepairAttempt:
    defect_id: str
    configuration: str
    model: str
    run_id: int
    condition: str
    fix_snippet: str
    passed: bool
    metrics: Optional[PrecisionMetrics] = None
    failure_reason: str = ""

    def to_record(self) -> dict:
        rec = {
            "defect_id": self.defect_id,
            "configuration": self.configuration,
            "model": self.model,
            "run_id": self.run_id,
            "condition": self.condition,
            "fix_snippet": self.fix_snippet,
            "passed": self.passed,
            "failure_reason": self.failure_reason,
            "metrics": self.metrics.to_record() if self.metrics else None,
        }
        return rec


def fix_prompt(context_text: str, explanation_text: Optional[str]) -> str:
    parts = [FIX_INSTRUCTION.rstrip(), "", context_text.rstrip()]
    if explanation_text is not None:
        parts += ["", "=== FAILURE EXPLANATION ===", explanation_text.rstrip()]
    return "\n".join(parts) + "\n"


def generate_fix(
    context_text: str,
    model: str,
    gateway: Gateway,
    explanation_text: Optional[str] = None,
) -> str:
    """Request a function-only fix snippet; raises SnippetNotAFunction."""
    response = gateway.complete(
        CompletionRequest(
            model=model,
            prompt=fix_prompt(context_text, explanation_text),
            schema_id="fix",
        )
    )
    snippet = response.parsed["function"]
    parse_fix_snippet(snippet)
    return snippet


def parse_fix_snippet(snippet: str) -> ast.FunctionDef:
    """The snippet must parse as exactly one function definition."""
    try:
        tree = ast.parse(textwrap.dedent(snippet))
    except SyntaxError as exc:
        raise SnippetNotAFunction(f"snippet does not parse: {exc}") from exc
    if len(tree.body) != 1 or not isinstance(tree.body[0], (ast.FunctionDef,
                                                            ast.AsyncFunctionDef)):
        raise SnippetNotAFunction("snippet is not a single function definition")
    return tree.body[0]


def splice_fix(module_source: str, span: FunctionSpan, fix_snippet: str) -> str:
    """Replace the target function's body with the snippet's body.

    Lines outside the function span are untouched; the header line(s) of the
    original function are kept, so only the body changes.
    """
    fn = parse_fix_snippet(fix_snippet)
    snippet_lines = textwrap.dedent(fix_snippet).splitlines()
    body_start = fn.body[0].lineno
    body_lines = snippet_lines[body_start - 1 : fn.end_lineno]
    new_body = textwrap.dedent("\n".join(body_lines))

    module_lines = module_source.splitlines()
    target = _find_target_function(module_source, span)
    orig_body_start = target.body[0].lineno
    indent = _line_indent(module_lines[orig_body_start - 1])

    reindented = [
        (indent + line) if line.strip() else line for line in new_body.splitlines()
    ]
    spliced_lines = (
        module_lines[: orig_body_start - 1] + reindented + module_lines[span.end :]
    )
    spliced = "\n".join(spliced_lines)
    if module_source.endswith("\n"):
        spliced += "\n"
    try:
        ast.parse(spliced)
    except SyntaxError as exc:
        raise SpliceParseFailure(f"spliced module does not parse: {exc}") from exc
    return spliced


def _find_target_function(module_source: str, span: FunctionSpan) -> ast.FunctionDef:
    try:
        tree = ast.parse(module_source)
    except SyntaxError as exc:
        raise SpliceParseFailure(str(exc)) from exc
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) and node.name == span.name:
            if node.lineno <= span.end and node.end_lineno >= span.start:
                return node
    raise SpliceParseFailure(f"target function {span.name!r} not found at lines "
                             f"{span.start}..{span.end}")


def _line_indent(line: str) -> str:
    return line[: len(line) - len(line.lstrip())]


def validate_fix(defect: Defect, spliced_source: str, timeout: float = 30.0) -> TestOutcome:
    """Pass iff the triggering test process exits with code 0."""
    return run_triggering_test(defect, spliced_source, timeout=timeout)


class _LocalRenamer(ast.NodeTransformer):
    """Rename one function scope's locals to v1, v2, ... in first-use order."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = mapping

    def visit_Name(self, node: ast.Name) -> ast.Name:
        if node.id in self.mapping:
            node.id = self.mapping[node.id]
        return node

    def visit_FunctionDef(self, node):  # nested scopes handled separately
        return node

    visit_AsyncFunctionDef = visit_FunctionDef
    visit_Lambda = visit_FunctionDef


def _function_locals(fn: ast.FunctionDef) -> list[str]:
    params = {a.arg for a in fn.args.args + fn.args.posonlyargs + fn.args.kwonlyargs}
    if fn.args.vararg:
        params.add(fn.args.vararg.arg)
    if fn.args.kwarg:
        params.add(fn.args.kwarg.arg)
    declared: set[str] = set()
    inner_defs: set[str] = set()
    for sub in fn.body:
        for node in ast.walk(sub):
            if isinstance(node, (ast.Global, ast.Nonlocal)):
                declared.update(node.names)
            elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                inner_defs.add(node.name)

    stored: set[str] = set()
    for sub in fn.body:
        for node in _walk_own_scope(sub):
            if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
                stored.add(node.id)
    stored -= params | declared | inner_defs

    ordered: list[str] = []
    for sub in fn.body:
        for node in _walk_own_scope(sub):
            if isinstance(node, ast.Name) and node.id in stored and node.id not in ordered:
                ordered.append(node.id)
    return ordered


def _walk_own_scope(node: ast.AST):
    """ast.walk that does not descend into nested function/lambda scopes."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        for child in ast.iter_child_nodes(current):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)):
                continue
            stack.append(child)


def normalize_ast(source: str) -> str:
    """Canonical pretty-print with per-function local renaming."""
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise ParseFailure(f"cannot normalize: {exc}") from exc
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            ordered = _function_locals(node)
            mapping = {name: f"v{i + 1}" for i, name in enumerate(ordered)}
            renamer = _LocalRenamer(mapping)
            for stmt in node.body:
                renamer.visit(stmt)
    return ast.unparse(tree) + "\n"


def levenshtein_distance(a: str, b: str) -> int:
    """Classic two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            )
        previous = current
    return previous[len(b)]


def levenshtein_norm(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein_distance(a, b) / longest


def line_deviation(a: str, b: str) -> int:
    """Lines in the symmetric difference of an LCS line diff."""
    a_lines = a.splitlines()
    b_lines = b.splitlines()
    matcher = difflib.SequenceMatcher(a=a_lines, b=b_lines, autojunk=False)
    deviation = 0
    for op, i1, i2, j1, j2 in matcher.get_opcodes():
        if op != "equal":
            deviation += (i2 - i1) + (j2 - j1)
    return deviation


def changed_line_positions(base: str, other: str) -> list[int]:
    """Positions of changed lines in base coordinates (insertions anchor at i1)."""
    matcher = difflib.SequenceMatcher(
        a=base.splitlines(), b=other.splitlines(), autojunk=False
    )
    positions: list[int] = []
    for op, i1, i2, j1, j2 in matcher.get_opcodes():
        if op == "equal":
            continue
        if i2 > i1:
            positions.extend(range(i1, i2))
        else:
            positions.extend([i1] * (j2 - j1))
    return positions


def spurious_changes(fix: str, reference: str, buggy: str) -> int:
    """Changed lines of diff(buggy, fix) outside diff(buggy, reference)'s region."""
    reference_region = set(changed_line_positions(buggy, reference))
    return sum(1 for pos in changed_line_positions(buggy, fix)
               if pos not in reference_region)


def halstead_volume(source: str) -> float:
    """N * log2(eta) with operators = keywords + operator/delimiter tokens,
    operands = other identifiers plus number/string literals."""
    operators: list[str] = []
    operands: list[str] = []
    try:
        tokens = list(tokenize.generate_tokens(io.StringIO(source).readline))
    except (tokenize.TokenError, SyntaxError) as exc:
        raise ParseFailure(f"cannot tokenize: {exc}") from exc
    for tok in tokens:
        if tok.type == tokenize.NAME:
            if keyword.iskeyword(tok.string):
                operators.append(tok.string)
            else:
                operands.append(tok.string)
        elif tok.type == tokenize.OP:
            operators.append(tok.string)
        elif tok.type in (tokenize.NUMBER, tokenize.STRING):
            operands.append(tok.string)
    total = len(operators) + len(operands)
    vocabulary = len(set(operators)) + len(set(operands))
    if total == 0 or vocabulary == 0:
        return 0.0
    return total * math.log2(vocabulary)


def compute_precision(fix_source: str, reference_source: str, buggy_source: str
                      ) -> PrecisionMetrics:
    """Similarity of a passing fix to the reference, after normalization."""
    fix_n = normalize_ast(fix_source)
    reference_n = normalize_ast(reference_source)
    buggy_n = normalize_ast(buggy_source)
    return PrecisionMetrics(
        line_deviation=line_deviation(fix_n, reference_n),
        levenshtein_norm=levenshtein_norm(fix_n, reference_n),
        spurious_changes=spurious_changes(fix_n, reference_n, buggy_n),
        halstead_delta_volume=halstead_volume(fix_n) - halstead_volume(buggy_n),
    )
