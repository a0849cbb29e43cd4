"""Trace-seeded approximate slicing over a single Python module.

Slicing works on *units*: simple statements and compound-statement headers,
each carrying a physical line span plus per-line syntactic def/use sets.
Multi-line units contribute every physical line of their span.  Control
dependence is approximated by the headers of syntactically enclosing
blocks; aliasing, calls, and global mutation are ignored.
"""

from __future__ import annotations

import ast
import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional

from .corpus import ExecutionTrace
from .errors import EmptyTrace, LineOutOfRange, ModuleMismatch, SeedOutsideModule

GAP_MARKER = "..."

SEED_EXCEPTION = "exception"
SEED_LAST_EXECUTED = "last_executed"


@dataclass(frozen=True)
class SeedLine:
    line: int
    origin: str


@dataclass(frozen=True)
class LineSet:
    """A slice result: sorted absolute line numbers plus the slice kind."""

    lines: frozenset[int]
    kind: str
    source_fingerprint: str

    def sorted(self) -> list[int]:
        return sorted(self.lines)


@dataclass
class Unit:
    """A simple statement or a compound-statement header."""

    start: int
    end: int
    defs: frozenset[str]
    uses: frozenset[str]
    enclosing_headers: tuple["Unit", ...]
    is_header: bool = False

    def span_lines(self) -> range:
        return range(self.start, self.end + 1)


@dataclass
class Block:
    """A statement list (module body, branch body, loop body, ...)."""

    start: int
    end: int
    depth: int


def _base_name(node: ast.AST) -> Optional[str]:
    while isinstance(node, (ast.Attribute, ast.Subscript, ast.Starred)):
        node = node.value
    if isinstance(node, ast.Name):
        return node.id
    return None


def _target_names(node: ast.AST) -> set[str]:
    if isinstance(node, (ast.Tuple, ast.List)):
        names: set[str] = set()
        for elt in node.elts:
            names |= _target_names(elt)
        return names
    name = _base_name(node)
    return {name} if name else set()


def _load_names(nodes: Iterable[ast.AST]) -> set[str]:
    names: set[str] = set()
    for node in nodes:
        for sub in ast.walk(node):
            if isinstance(sub, ast.Name) and isinstance(sub.ctx, ast.Load):
                names.add(sub.id)
    return names


def _walrus_defs(nodes: Iterable[ast.AST]) -> set[str]:
    names: set[str] = set()
    for node in nodes:
        for sub in ast.walk(node):
            if isinstance(sub, ast.NamedExpr) and isinstance(sub.target, ast.Name):
                names.add(sub.target.id)
    return names


def _simple_stmt_defs_uses(stmt: ast.stmt) -> tuple[set[str], set[str]]:
    defs: set[str] = set()
    uses = _load_names([stmt])
    defs |= _walrus_defs([stmt])
    if isinstance(stmt, ast.Assign):
        for target in stmt.targets:
            defs |= _target_names(target)
    elif isinstance(stmt, ast.AnnAssign):
        if stmt.value is not None or stmt.simple:
            defs |= _target_names(stmt.target)
    elif isinstance(stmt, ast.AugAssign):
        defs |= _target_names(stmt.target)
        # augmented assignment reads its own target
        uses |= _target_names(stmt.target)
    elif isinstance(stmt, (ast.Import, ast.ImportFrom)):
        for alias in stmt.names:
            defs.add(alias.asname or alias.name.split(".")[0])
    return defs, uses


class ModuleIndex:
    """Parsed view of a module: slice units, blocks, and line lookup tables."""

    def __init__(self, source: str):
        self.source = source
        self.source_fingerprint = hashlib.sha256(source.encode()).hexdigest()[:16]
        self.tree = ast.parse(source)
        self.line_count = len(source.splitlines())
        self.units: list[Unit] = []
        self.blocks: list[Block] = []
        self.function_spans: list[tuple[int, int]] = []
        self._line_to_unit: dict[int, Unit] = {}
        self._walk_block(self.tree.body, depth=0, headers=())

    @classmethod
    def from_source(cls, source: str) -> "ModuleIndex":
        return cls(source)

    def _add_unit(self, unit: Unit) -> Unit:
        self.units.append(unit)
        for line in unit.span_lines():
            self._line_to_unit.setdefault(line, unit)
        return unit

    def _walk_block(self, body: list[ast.stmt], depth: int, headers: tuple[Unit, ...]) -> None:
        if not body:
            return
        self.blocks.append(
            Block(start=body[0].lineno, end=max(s.end_lineno for s in body), depth=depth)
        )
        for stmt in body:
            self._walk_stmt(stmt, depth, headers)

    def _header_unit(
        self,
        stmt: ast.stmt,
        end: int,
        defs: set[str],
        uses: set[str],
        headers: tuple[Unit, ...],
    ) -> Unit:
        return self._add_unit(
            Unit(
                start=stmt.lineno,
                end=max(stmt.lineno, end),
                defs=frozenset(defs),
                uses=frozenset(uses),
                enclosing_headers=headers,
                is_header=True,
            )
        )

    def _walk_stmt(self, stmt: ast.stmt, depth: int, headers: tuple[Unit, ...]) -> None:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            uses = _load_names(stmt.args.defaults + stmt.args.kw_defaults + stmt.decorator_list)
            header = self._header_unit(stmt, stmt.body[0].lineno - 1, {stmt.name}, uses, headers)
            self.function_spans.append((stmt.lineno, stmt.end_lineno))
            self._walk_block(stmt.body, depth + 1, headers + (header,))
        elif isinstance(stmt, ast.ClassDef):
            header = self._header_unit(
                stmt, stmt.body[0].lineno - 1, {stmt.name}, _load_names(stmt.bases), headers
            )
            self._walk_block(stmt.body, depth + 1, headers + (header,))
        elif isinstance(stmt, (ast.If, ast.While)):
            header = self._header_unit(
                stmt, stmt.test.end_lineno, set(), _load_names([stmt.test]), headers
            )
            self._walk_block(stmt.body, depth + 1, headers + (header,))
            self._walk_block(stmt.orelse, depth + 1, headers + (header,))
        elif isinstance(stmt, (ast.For, ast.AsyncFor)):
            header = self._header_unit(
                stmt, stmt.iter.end_lineno, _target_names(stmt.target),
                _load_names([stmt.iter]), headers,
            )
            self._walk_block(stmt.body, depth + 1, headers + (header,))
            self._walk_block(stmt.orelse, depth + 1, headers + (header,))
        elif isinstance(stmt, (ast.With, ast.AsyncWith)):
            defs: set[str] = set()
            end = stmt.lineno
            for item in stmt.items:
                end = max(end, item.context_expr.end_lineno)
                if item.optional_vars is not None:
                    defs |= _target_names(item.optional_vars)
                    end = max(end, item.optional_vars.end_lineno)
            header = self._header_unit(
                stmt, end, defs, _load_names([i.context_expr for i in stmt.items]), headers
            )
            self._walk_block(stmt.body, depth + 1, headers + (header,))
        elif isinstance(stmt, ast.Try):
            header = self._header_unit(stmt, stmt.lineno, set(), set(), headers)
            self._walk_block(stmt.body, depth + 1, headers + (header,))
            for handler in stmt.handlers:
                h_defs = {handler.name} if handler.name else set()
                h_uses = _load_names([handler.type]) if handler.type else set()
                h_end = handler.type.end_lineno if handler.type else handler.lineno
                h_unit = self._add_unit(
                    Unit(
                        start=handler.lineno,
                        end=max(handler.lineno, h_end),
                        defs=frozenset(h_defs),
                        uses=frozenset(h_uses),
                        enclosing_headers=headers + (header,),
                        is_header=True,
                    )
                )
                self._walk_block(handler.body, depth + 1, headers + (header, h_unit))
            self._walk_block(stmt.orelse, depth + 1, headers + (header,))
            self._walk_block(stmt.finalbody, depth + 1, headers + (header,))
        else:
            defs, uses = _simple_stmt_defs_uses(stmt)
            self._add_unit(
                Unit(
                    start=stmt.lineno,
                    end=stmt.end_lineno,
                    defs=frozenset(defs),
                    uses=frozenset(uses),
                    enclosing_headers=headers,
                )
            )

    def unit_at(self, line: int) -> Optional[Unit]:
        return self._line_to_unit.get(line)

    def enclosing_function_span(self, line: int) -> Optional[tuple[int, int]]:
        best = None
        for start, end in self.function_spans:
            if start <= line <= end:
                if best is None or (end - start) < (best[1] - best[0]):
                    best = (start, end)
        return best

    def _lineset(self, units: Iterable[Unit], kind: str) -> LineSet:
        lines: set[int] = set()
        for unit in units:
            lines.update(unit.span_lines())
        return LineSet(frozenset(lines), kind, self.source_fingerprint)


def select_seed(trace: ExecutionTrace) -> SeedLine:
    """First in-module exception line, else the last executed line."""
    if not trace.executed_lines:
        raise EmptyTrace("trace recorded no executed lines")
    if trace.exception_line is not None:
        return SeedLine(trace.exception_line, SEED_EXCEPTION)
    return SeedLine(trace.executed_lines[-1], SEED_LAST_EXECUTED)


def _require_seed_unit(index: ModuleIndex, seed: SeedLine) -> Unit:
    unit = index.unit_at(seed.line)
    if unit is None:
        raise SeedOutsideModule(f"seed line {seed.line} maps to no statement")
    return unit


def slice_block(index: ModuleIndex, seed: SeedLine) -> LineSet:
    """All lines of the innermost statement block whose span contains the seed."""
    _require_seed_unit(index, seed)
    candidates = [b for b in index.blocks if b.start <= seed.line <= b.end]
    if not candidates:
        raise SeedOutsideModule(f"seed line {seed.line} is outside every block")
    innermost = max(candidates, key=lambda b: (b.depth, b.start))
    lines = frozenset(range(innermost.start, innermost.end + 1))
    return LineSet(lines, "block", index.source_fingerprint)


def _executed_units_until_seed(
    index: ModuleIndex, trace: ExecutionTrace, seed: SeedLine
) -> list[Unit]:
    # Truncate at the last occurrence of the seed line, then collapse
    # duplicates to their last occurrence while walking in reverse.
    executed = trace.executed_lines
    cut = len(executed)
    for i in range(len(executed) - 1, -1, -1):
        if executed[i] == seed.line:
            cut = i + 1
            break
    seen: set[int] = set()
    ordered: list[Unit] = []
    for line in reversed(executed[:cut]):
        unit = index.unit_at(line)
        if unit is None or id(unit) in seen:
            continue
        seen.add(id(unit))
        ordered.append(unit)
    return ordered


def slice_backward(index: ModuleIndex, trace: ExecutionTrace, seed: SeedLine) -> LineSet:
    """Fixed point over executed lines: def/use chaining plus enclosing headers."""
    seed_unit = _require_seed_unit(index, seed)
    candidates = _executed_units_until_seed(index, trace, seed)
    included: set[int] = {id(seed_unit)}
    result: list[Unit] = [seed_unit]
    wanted: set[str] = set(seed_unit.uses)

    changed = True
    while changed:
        changed = False
        for unit in candidates:
            if id(unit) not in included and unit.defs & wanted:
                included.add(id(unit))
                result.append(unit)
                wanted |= unit.uses
                changed = True
        # Enclosing headers join the slice but do not extend the worklist.
        for unit in list(result):
            for header in unit.enclosing_headers:
                if id(header) not in included:
                    included.add(id(header))
                    result.append(header)
                    changed = True
    lines: set[int] = set()
    for unit in result:
        lines.update(unit.span_lines())
    return LineSet(frozenset(lines), "backward", index.source_fingerprint)


def slice_forward(index: ModuleIndex, seed: SeedLine) -> LineSet:
    """Scoped forward slice: later lines in the enclosing function that read
    values defined at the seed or at already-included lines."""
    seed_unit = _require_seed_unit(index, seed)
    scope = index.enclosing_function_span(seed.line)
    if scope is None:
        scope = (1, index.line_count)
    in_scope = [
        u for u in index.units
        if scope[0] <= u.start and u.end <= scope[1] and u.start > seed_unit.start
    ]
    in_scope.sort(key=lambda u: u.start)
    included: set[int] = {id(seed_unit)}
    result: list[Unit] = [seed_unit]
    defined: set[str] = set(seed_unit.defs)

    changed = True
    while changed:
        changed = False
        for unit in in_scope:
            if id(unit) not in included and unit.uses & defined:
                included.add(id(unit))
                result.append(unit)
                defined |= unit.defs
                changed = True
    lines: set[int] = set()
    for unit in result:
        lines.update(unit.span_lines())
    return LineSet(frozenset(lines), "forward", index.source_fingerprint)


def slice_union(backward: LineSet, forward: LineSet) -> LineSet:
    if backward.source_fingerprint != forward.source_fingerprint:
        raise ModuleMismatch("backward and forward slices come from different modules")
    return LineSet(backward.lines | forward.lines, "union", backward.source_fingerprint)


def render_slice(source: str, lines: LineSet) -> str:
    """Selected source lines, each prefixed ``L<n>: ``, gaps marked ``...``."""
    source_lines = source.splitlines()
    rendered: list[str] = []
    previous = None
    for n in lines.sorted():
        if n < 1 or n > len(source_lines):
            raise LineOutOfRange(f"line {n} outside 1..{len(source_lines)}")
        if previous is not None and n > previous + 1:
            rendered.append(GAP_MARKER)
        rendered.append(f"L{n}: {source_lines[n - 1]}")
        previous = n
    return "\n".join(rendered)


def compute_slices(index: ModuleIndex, trace: ExecutionTrace) -> dict[str, LineSet]:
    """All four slice kinds for one defect trace."""
    seed = select_seed(trace)
    backward = slice_backward(index, trace, seed)
    forward = slice_forward(index, seed)
    return {
        "block": slice_block(index, seed),
        "backward": backward,
        "forward": forward,
        "union": slice_union(backward, forward),
    }
