#!/usr/bin/env python3
"""Regenerate the demo defect corpus under corpus/.

Each entry defines a buggy module, its reference fix, and a triggering test;
function spans in meta.yaml are derived from the buggy source so they can
never drift.  Run from the repository root:

    python3 tools/build_corpus.py
"""

import ast
import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"


def span_of(source: str, name: str) -> tuple[int, int]:
    tree = ast.parse(source)
    for node in ast.walk(tree):
        if isinstance(node, ast.FunctionDef) and node.name == name:
            return node.lineno, node.end_lineno
    raise SystemExit(f"function {name} not found")


DEFECTS = []


def defect(defect_id, module, target, note, buggy, fixed, test, docstring=None):
    DEFECTS.append(
        dict(
            id=defect_id,
            module=module,
            target=target,
            note=note,
            buggy=buggy.strip("\n") + "\n",
            fixed=fixed.strip("\n") + "\n",
            test=test.strip("\n") + "\n",
            docstring=docstring,
        )
    )


defect(
    "d01_text_wrap",
    "text_wrap.py",
    "wrap_line",
    "The wrap threshold is off by one: a candidate line exactly one character "
    "over the width is accepted instead of being broken.",
    buggy="""
def split_words(text):
    words = []
    for chunk in text.split(" "):
        if chunk:
            words.append(chunk)
    return words


def wrap_line(text, width):
    words = split_words(text)
    lines = []
    current = ""
    for word in words:
        if current:
            candidate = current + " " + word
        else:
            candidate = word
        if len(candidate) > width + 1:
            lines.append(current)
            current = word
        else:
            current = candidate
    if current:
        lines.append(current)
    return lines
""",
    fixed="""
def split_words(text):
    words = []
    for chunk in text.split(" "):
        if chunk:
            words.append(chunk)
    return words


def wrap_line(text, width):
    words = split_words(text)
    lines = []
    current = ""
    for word in words:
        if current:
            candidate = current + " " + word
        else:
            candidate = word
        if len(candidate) > width:
            lines.append(current)
            current = word
        else:
            current = candidate
    if current:
        lines.append(current)
    return lines
""",
    test="""
from text_wrap import wrap_line

assert wrap_line("alpha", 10) == ["alpha"]
assert wrap_line("alpha beta gamma", 9) == ["alpha", "beta", "gamma"]
""",
    docstring="wrap_line(text, width) greedily packs words into lines of at "
    "most `width` characters, never splitting inside a word.",
)

defect(
    "d02_running_stats",
    "running_stats.py",
    "window_mean",
    "The mean of an empty trailing window divides by zero; an empty window "
    "must yield 0.0.",
    buggy="""
def window(values, size):
    start = len(values) - size
    if start < 0:
        start = 0
    return values[start:]


def window_mean(values, size):
    recent = window(values, size)
    total = 0.0
    for value in recent:
        total += value
    return total / len(recent)
""",
    fixed="""
def window(values, size):
    start = len(values) - size
    if start < 0:
        start = 0
    return values[start:]


def window_mean(values, size):
    recent = window(values, size)
    if not recent:
        return 0.0
    total = 0.0
    for value in recent:
        total += value
    return total / len(recent)
""",
    test="""
from running_stats import window_mean

assert window_mean([2.0, 4.0], 2) == 3.0
assert window_mean([], 3) == 0.0
""",
    docstring="window_mean(values, size) averages the last `size` entries of "
    "`values`; an empty window means nothing was observed and averages to 0.0.",
)

defect(
    "d03_duration_parse",
    "duration_parse.py",
    "parse_duration",
    "A bare number has no unit suffix, so the unit lookup is given an empty "
    "string; seconds must be the default unit.",
    buggy="""
UNIT_SECONDS = {"s": 1, "m": 60, "h": 3600}


def split_amount(token):
    digits = ""
    for ch in token:
        if ch.isdigit():
            digits += ch
        else:
            break
    return digits, token[len(digits):]


def parse_duration(token):
    digits, unit = split_amount(token)
    amount = int(digits)
    return amount * UNIT_SECONDS[unit]
""",
    fixed="""
UNIT_SECONDS = {"s": 1, "m": 60, "h": 3600}


def split_amount(token):
    digits = ""
    for ch in token:
        if ch.isdigit():
            digits += ch
        else:
            break
    return digits, token[len(digits):]


def parse_duration(token):
    digits, unit = split_amount(token)
    amount = int(digits)
    if not unit:
        unit = "s"
    return amount * UNIT_SECONDS[unit]
""",
    test="""
from duration_parse import parse_duration

assert parse_duration("2m") == 120
assert parse_duration("90") == 90
""",
)

defect(
    "d04_interest",
    "interest.py",
    "compound_total",
    "Simple interest is computed instead of compounding: the growth factor "
    "must be raised to the number of years.",
    buggy="""
def yearly_rate(percent):
    return percent / 100.0


def compound_total(principal, percent, years):
    rate = yearly_rate(percent)
    total = principal * (1 + rate * years)
    return round(total, 2)
""",
    fixed="""
def yearly_rate(percent):
    return percent / 100.0


def compound_total(principal, percent, years):
    rate = yearly_rate(percent)
    total = principal * (1 + rate) ** years
    return round(total, 2)
""",
    test="""
from interest import compound_total

assert compound_total(100.0, 10.0, 1) == 110.0
assert compound_total(100.0, 10.0, 2) == 121.0
""",
    docstring="compound_total(principal, percent, years) returns the balance "
    "after annual compounding at `percent`, rounded to cents.",
)

defect(
    "d05_bounds",
    "bounds.py",
    "clamp",
    "Values below the lower bound are clamped to the upper bound instead of "
    "the lower one.",
    buggy="""
def clamp(value, low, high):
    if value < low:
        return high
    if value > high:
        return high
    return value


def clamp_all(values, low, high):
    clamped = []
    for value in values:
        clamped.append(clamp(value, low, high))
    return clamped
""",
    fixed="""
def clamp(value, low, high):
    if value < low:
        return low
    if value > high:
        return high
    return value


def clamp_all(values, low, high):
    clamped = []
    for value in values:
        clamped.append(clamp(value, low, high))
    return clamped
""",
    test="""
from bounds import clamp_all

assert clamp_all([5], 0, 10) == [5]
assert clamp_all([-5, 3, 99], 0, 10) == [0, 3, 10]
""",
)

defect(
    "d06_numbers_util",
    "numbers_util.py",
    "gcd_pair",
    "After the Euclidean loop the divisor variable is always zero; the "
    "remaining dividend holds the answer.",
    buggy="""
def gcd_pair(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return b


def lcm_pair(a, b):
    if a == 0 or b == 0:
        return 0
    return abs(a * b) // gcd_pair(a, b)
""",
    fixed="""
def gcd_pair(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


def lcm_pair(a, b):
    if a == 0 or b == 0:
        return 0
    return abs(a * b) // gcd_pair(a, b)
""",
    test="""
from numbers_util import gcd_pair

assert gcd_pair(12, 18) == 6
assert gcd_pair(7, 3) == 1
""",
    docstring="gcd_pair(a, b) returns the greatest common divisor of two "
    "integers via the Euclidean algorithm; gcd_pair(0, 0) is 0.",
)

defect(
    "d07_robust_stats",
    "robust_stats.py",
    "running_median",
    "The sliding window is never sorted, so the middle element of the raw "
    "window is reported instead of the median.",
    buggy="""
def running_median(values, size):
    medians = []
    for i in range(len(values)):
        start = i - size + 1
        if start < 0:
            start = 0
        window = list(values[start:i + 1])
        mid = len(window) // 2
        if len(window) % 2 == 1:
            medians.append(window[mid])
        else:
            medians.append((window[mid - 1] + window[mid]) / 2.0)
    return medians
""",
    fixed="""
def running_median(values, size):
    medians = []
    for i in range(len(values)):
        start = i - size + 1
        if start < 0:
            start = 0
        window = list(values[start:i + 1])
        window.sort()
        mid = len(window) // 2
        if len(window) % 2 == 1:
            medians.append(window[mid])
        else:
            medians.append((window[mid - 1] + window[mid]) / 2.0)
    return medians
""",
    test="""
from robust_stats import running_median

assert running_median([3, 1, 2], 3) == [3, 2.0, 2]
""",
    docstring="running_median(values, size) emits, for each position, the "
    "median of the trailing window of up to `size` values.",
)

defect(
    "d08_table_format",
    "table_format.py",
    "pad_cell",
    "Cells are right-aligned: the padding is prepended, but column layout "
    "expects left alignment with trailing spaces.",
    buggy="""
def pad_cell(text, width):
    missing = width - len(text)
    if missing <= 0:
        return text
    return " " * missing + text


def format_row(cells, width):
    padded = []
    for cell in cells:
        padded.append(pad_cell(cell, width))
    return "|".join(padded)
""",
    fixed="""
def pad_cell(text, width):
    missing = width - len(text)
    if missing <= 0:
        return text
    return text + " " * missing


def format_row(cells, width):
    padded = []
    for cell in cells:
        padded.append(pad_cell(cell, width))
    return "|".join(padded)
""",
    test="""
from table_format import format_row

assert format_row(["wide"], 4) == "wide"
assert format_row(["ab", "c"], 4) == "ab  |c   "
""",
)

defect(
    "d09_calendar_util",
    "calendar_util.py",
    "day_of_year",
    "The leap-day correction is applied to every month; only dates after "
    "February may gain the extra day.",
    buggy="""
MONTH_DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def is_leap_year(year):
    if year % 400 == 0:
        return True
    if year % 100 == 0:
        return False
    return year % 4 == 0


def day_of_year(year, month, day):
    total = day
    for index in range(month - 1):
        total += MONTH_DAYS[index]
    if is_leap_year(year):
        total += 1
    return total
""",
    fixed="""
MONTH_DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def is_leap_year(year):
    if year % 400 == 0:
        return True
    if year % 100 == 0:
        return False
    return year % 4 == 0


def day_of_year(year, month, day):
    total = day
    for index in range(month - 1):
        total += MONTH_DAYS[index]
    if month > 2 and is_leap_year(year):
        total += 1
    return total
""",
    test="""
from calendar_util import day_of_year

assert day_of_year(2023, 1, 10) == 10
assert day_of_year(2024, 3, 1) == 61
assert day_of_year(2024, 1, 10) == 10
""",
    docstring="day_of_year(year, month, day) maps a calendar date to its "
    "ordinal day within the year, honoring Gregorian leap years.",
)

defect(
    "d10_ring_buffer",
    "ring_buffer.py",
    "drain",
    "Draining pops one element more than the buffer holds, popping from an "
    "already empty list.",
    buggy="""
class RingBuffer:
    def __init__(self, capacity):
        self.capacity = capacity
        self.items = []

    def push(self, item):
        self.items.append(item)
        if len(self.items) > self.capacity:
            self.items.pop(0)

    def newest(self):
        return self.items[-1]


def drain(buffer):
    drained = []
    count = len(buffer.items)
    for _ in range(count + 1):
        drained.append(buffer.items.pop(0))
    return drained
""",
    fixed="""
class RingBuffer:
    def __init__(self, capacity):
        self.capacity = capacity
        self.items = []

    def push(self, item):
        self.items.append(item)
        if len(self.items) > self.capacity:
            self.items.pop(0)

    def newest(self):
        return self.items[-1]


def drain(buffer):
    drained = []
    count = len(buffer.items)
    for _ in range(count):
        drained.append(buffer.items.pop(0))
    return drained
""",
    test="""
from ring_buffer import RingBuffer, drain

buf = RingBuffer(3)
for value in (1, 2, 3):
    buf.push(value)
assert drain(buf) == [1, 2, 3]
""",
)

defect(
    "d11_intervals",
    "intervals.py",
    "overlaps",
    "Closed intervals that merely touch at an endpoint are treated as "
    "disjoint because the comparisons are strict.",
    buggy="""
def overlaps(a_start, a_end, b_start, b_end):
    return a_start < b_end and b_start < a_end


def merge(intervals):
    merged = []
    for start, end in sorted(intervals):
        if merged and overlaps(merged[-1][0], merged[-1][1], start, end):
            last = merged[-1]
            merged[-1] = (last[0], max(last[1], end))
        else:
            merged.append((start, end))
    return merged
""",
    fixed="""
def overlaps(a_start, a_end, b_start, b_end):
    return a_start <= b_end and b_start <= a_end


def merge(intervals):
    merged = []
    for start, end in sorted(intervals):
        if merged and overlaps(merged[-1][0], merged[-1][1], start, end):
            last = merged[-1]
            merged[-1] = (last[0], max(last[1], end))
        else:
            merged.append((start, end))
    return merged
""",
    test="""
from intervals import overlaps

assert overlaps(0, 1, 2, 3) is False
assert overlaps(0, 5, 5, 9) is True
""",
    docstring="overlaps(a_start, a_end, b_start, b_end) reports whether two "
    "closed intervals share at least one point, endpoints included.",
)

defect(
    "d12_size_format",
    "size_format.py",
    "format_size",
    "A count exactly at a unit boundary is not promoted to the larger unit "
    "because the loop comparison is strict.",
    buggy="""
UNITS = ["B", "KB", "MB", "GB"]


def format_size(count):
    value = float(count)
    index = 0
    while value > 1024 and index < len(UNITS) - 1:
        value /= 1024.0
        index += 1
    if value == int(value):
        text = str(int(value))
    else:
        text = "%.1f" % value
    return text + " " + UNITS[index]
""",
    fixed="""
UNITS = ["B", "KB", "MB", "GB"]


def format_size(count):
    value = float(count)
    index = 0
    while value >= 1024 and index < len(UNITS) - 1:
        value /= 1024.0
        index += 1
    if value == int(value):
        text = str(int(value))
    else:
        text = "%.1f" % value
    return text + " " + UNITS[index]
""",
    test="""
from size_format import format_size

assert format_size(500) == "500 B"
assert format_size(1024) == "1 KB"
""",
    docstring="format_size(count) renders a byte count with the largest unit "
    "whose threshold the count reaches, e.g. 1024 -> '1 KB'.",
)


def main():
    if CORPUS.exists():
        shutil.rmtree(CORPUS)
    for entry in DEFECTS:
        root = CORPUS / entry["id"]
        (root / "buggy").mkdir(parents=True)
        (root / "test").mkdir()
        (root / "fixed").mkdir()
        (root / "buggy" / entry["module"]).write_text(entry["buggy"])
        (root / "fixed" / entry["module"]).write_text(entry["fixed"])
        test_name = "test_" + entry["module"]
        (root / "test" / test_name).write_text(entry["test"])
        if entry["docstring"]:
            (root / "docstring.txt").write_text(entry["docstring"] + "\n")
        start, end = span_of(entry["buggy"], entry["target"])
        (root / "meta.yaml").write_text(
            "id: {id}\n"
            "target_function: {target}\n"
            "function_span: [{start}, {end}]\n"
            "root_cause_note: >-\n  {note}\n".format(
                id=entry["id"], target=entry["target"], start=start, end=end,
                note=entry["note"],
            )
        )
    print(f"wrote {len(DEFECTS)} defects under {CORPUS}")


if __name__ == "__main__":
    main()
