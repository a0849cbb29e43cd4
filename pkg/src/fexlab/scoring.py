"""Six binary explanation-quality criteria and the total score.

C1 (readability) and C5 (artifact grounding) are computed deterministically;
C2/C3/C4/C6 come from one structured judge call per explanation.  The
readability grade uses words-per-sentence and syllables-per-word with a
vowel-group syllable heuristic; the pinned behavior lives in the tests.
"""

from __future__ import annotations

import importlib.resources
import re
from dataclasses import dataclass
from .corpus import Defect, defined_function_names
from .errors import EmptyText, IncompleteVector
from .gateway import CompletionRequest, Gateway

C1_GRADE_THRESHOLD = 12.0
C5_REFERENCE_THRESHOLD = 2

JUDGE_RUBRIC = (
    importlib.resources.files("fexlab.prompts").joinpath("judge_rubric_v1.txt").read_text()
)

_LINE_REF = re.compile(r"\bL(\d+)\b|\bline\s+(\d+)\b", re.IGNORECASE)
_WORD = re.compile(r"[A-Za-z']+")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")


@dataclass
class ScoreVector:
    c1: int
    c2: int
    c3: int
    c4: int
    c5: int
    c6: int
    c1_grade: float
    c5_reference_count: int
    judge_model: str

    @property
    def total(self) -> int:
        return total_score(self)

    def criteria(self) -> list[int]:
        return [self.c1, self.c2, self.c3, self.c4, self.c5, self.c6]


def count_syllables(word: str) -> int:
    """Vowel-group count with a silent-e adjustment; at least one."""
    w = word.lower().strip("'")
    if not w:
        return 0
    groups = _VOWEL_GROUP.findall(w)
    count = len(groups)
    if w.endswith("e") and not w.endswith(("le", "ee", "ye")) and count > 1:
        count -= 1
    return max(count, 1)


def split_sentences(text: str) -> list[str]:
    """Split on ., !, ? followed by whitespace; the remainder is one sentence."""
    parts = re.split(r"(?<=[.!?])\s+", text.strip())
    return [p for p in parts if _WORD.search(p)]


def flesch_kincaid_grade(text: str) -> float:
    """0.39 * words/sentence + 11.8 * syllables/word - 15.59."""
    if not text.strip():
        raise EmptyText("cannot grade empty text")
    # Shield code references first so dots inside them do not split sentences.
    shielded = _LINE_REF.sub("CODEREF", text)
    shielded = re.sub(r"\b[\w.]+\(\)", "CODEREF", shielded)
    sentences = split_sentences(shielded)
    words = _WORD.findall(shielded)
    if not sentences or not words:
        raise EmptyText("no words to grade")
    syllables = sum(count_syllables(w) for w in words)
    return 0.39 * (len(words) / len(sentences)) + 11.8 * (syllables / len(words)) - 15.59


def score_c1(text: str) -> tuple[int, float]:
    grade = flesch_kincaid_grade(text)
    return int(grade <= C1_GRADE_THRESHOLD), grade


def count_code_references(text: str, defect: Defect) -> int:
    """Distinct line references plus distinct in-module function names."""
    refs: set[str] = set()
    for match in _LINE_REF.finditer(text):
        number = match.group(1) or match.group(2)
        refs.add(f"L{number}")
    for name in defined_function_names(defect.buggy_source):
        if re.search(rf"\b{re.escape(name)}\b", text):
            refs.add(f"name:{name}")
    return len(refs)


def score_c5(text: str, defect: Defect) -> tuple[int, int]:
    count = count_code_references(text, defect)
    return int(count >= C5_REFERENCE_THRESHOLD), count


def judge_prompt(explanation_text: str, defect: Defect) -> str:
    reference = defect.root_cause_note.strip() or "(no curated note)"
    return (
        JUDGE_RUBRIC.rstrip()
        + "\n\n=== REFERENCE ROOT CAUSE ===\n"
        + reference
        + "\n\n=== FAILING MODULE ===\n"
        + defect.buggy_source.rstrip()
        + "\n\n=== EXPLANATION UNDER EVALUATION ===\n"
        + explanation_text.rstrip()
        + "\n"
    )


def judge(
    explanation_text: str, defect: Defect, judge_model: str, gateway: Gateway
) -> tuple[dict[str, int], dict[str, str]]:
    """One structured judge call for c2/c3/c4/c6 plus justifications."""
    response = gateway.complete(
        CompletionRequest(
            model=judge_model,
            prompt=judge_prompt(explanation_text, defect),
            schema_id="judge",
        )
    )
    verdicts = {c: int(bool(response.parsed[c])) for c in ("c2", "c3", "c4", "c6")}
    justifications = {
        c: str(response.parsed["justifications"].get(c, ""))
        for c in ("c2", "c3", "c4", "c6")
    }
    return verdicts, justifications


def score_explanation(
    explanation_text: str, defect: Defect, judge_model: str, gateway: Gateway
) -> ScoreVector:
    c1, grade = score_c1(explanation_text)
    c5, ref_count = score_c5(explanation_text, defect)
    verdicts, _ = judge(explanation_text, defect, judge_model, gateway)
    return ScoreVector(
        c1=c1,
        c2=verdicts["c2"],
        c3=verdicts["c3"],
        c4=verdicts["c4"],
        c5=c5,
        c6=verdicts["c6"],
        c1_grade=grade,
        c5_reference_count=ref_count,
        judge_model=judge_model,
    )


def total_score(vector: ScoreVector) -> int:
    values = vector.criteria()
    if any(v is None for v in values):
        raise IncompleteVector("score vector has unset criteria")
    return sum(values)
