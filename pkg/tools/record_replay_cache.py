#!/usr/bin/env python3
"""Record the shipped replay cache for the offline demo sweep.

Copies three defects into replay/corpus, then runs the real pipeline in
record mode against a scripted corpus-aware model stand-in.  The stand-in
is deterministic: everything it emits derives from a hash of the request,
so the recorded cache replays bit-identically.  Response quality varies
with the evidence present in the prompt, which gives the downstream
analyses a realistic spread, and fixes are drawn from the reference fix
(sometimes exactly, sometimes with a harmless extra statement, sometimes
broken) so that pass rates and precision metrics are non-trivial.

Run from the repository root:

    python3 tools/record_replay_cache.py
"""

import ast
import hashlib
import json
import re
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from fexlab.corpus import load_corpus, trace_test  # noqa: E402
from fexlab.gateway import Gateway  # noqa: E402
from fexlab.pipeline import RunManifest, run_sweep  # noqa: E402
from fexlab.slicing import ModuleIndex, compute_slices, render_slice  # noqa: E402

REPLAY = ROOT / "replay"
REPLAY_CORPUS = REPLAY / "corpus"
CACHE = REPLAY / "cache"
DEFECT_IDS = ["d02_running_stats", "d06_numbers_util", "d12_size_format"]
MODEL = "local-sim"

FILLER = (
    "Unquestionably, the multidimensional organizational considerations "
    "surrounding contemporary implementation circumstances necessitate "
    "extraordinarily comprehensive investigation initiatives spanning "
    "innumerable interdependent architectural responsibilities and "
    "accountability expectations throughout the engineering organization "
)


class ScriptedCorpusProvider:
    """Deterministic responses informed by the shipped corpus artifacts."""

    def __init__(self, defects):
        self.markers = []
        for defect in defects:
            trace = trace_test(defect)
            index = ModuleIndex(defect.buggy_source)
            slices = compute_slices(index, trace)
            candidates = [defect.buggy_source.rstrip(), defect.triggering_test.rstrip(),
                          trace.error_text.rstrip()]
            candidates += [render_slice(defect.buggy_source, s) for s in slices.values()]
            if defect.docstring.strip():
                candidates.append(defect.docstring.rstrip())
            self.markers.append(
                (defect, [c for c in candidates if len(c) >= 16])
            )

    def identify(self, prompt):
        for defect, candidates in self.markers:
            if any(marker in prompt for marker in candidates):
                return defect
        return None

    @staticmethod
    def _digest(request):
        return hashlib.sha256(
            f"{request.model}|{request.schema_id}|{request.prompt}".encode()
        ).digest()

    @staticmethod
    def _context_level(prompt):
        """0 (poor) .. 3 (rich), derived from the evidence sections only."""
        start = prompt.find("=== ")
        end = prompt.find("=== FAILURE EXPLANATION ===")
        sections = prompt[start : end if end != -1 else len(prompt)]
        byte = hashlib.sha256(sections.encode()).digest()[0]
        return byte % 4

    def __call__(self, request):
        digest = self._digest(request)
        if request.schema_id == "explanation":
            raw = self._explanation(request.prompt, digest)
        elif request.schema_id == "judge":
            raw = self._judge(request.prompt, digest)
        elif request.schema_id == "fix":
            raw = self._fix(request.prompt, digest)
        else:
            raise ValueError(request.schema_id)
        usage = {"prompt_tokens": len(request.prompt.split()),
                 "completion_tokens": len(raw.split())}
        return raw, usage

    def _explanation(self, prompt, digest):
        level = self._context_level(prompt)
        defect = self.identify(prompt)
        lines = sorted({int(m) for m in re.findall(r"\bL(\d+):", prompt)})[:3]
        refs = [f"L{n}" for n in lines][: max(0, level)]
        names = re.findall(r"def (\w+)\(", prompt)
        if defect is not None and level >= 1:
            names = [defect.target_function.name] + names
        names = list(dict.fromkeys(names))[: max(0, level - 1)]
        anchor = ", ".join(refs + names) or "the code under test"
        problem = f"The failing check points at {anchor}, where the result is wrong."
        chain = (
            f"The test drives the faulty path. The value built near {anchor} is "
            "already incorrect there. It then flows to the check and trips it."
        )
        actions = f"Fix the computation at {anchor}. Re-run the failing test."
        if level == 0:
            chain = FILLER + "until the observable misbehavior manifests itself."
        elif digest[1] % 3 == 0:
            chain += " The fix must change that computation only."
        return json.dumps(
            {"problem": problem, "causal_chain": chain, "suggested_actions": actions}
        )

    def _judge(self, prompt, digest):
        # Judged quality loosely tracks how grounded the explanation text is.
        grounded = len(re.findall(r"\bL\d+\b", prompt)) >= 2
        verbose = "organizational" in prompt
        verdicts = {
            "c2": grounded or digest[0] % 4 > 0,
            "c3": not verbose and digest[1] % 4 > 0,
            "c4": digest[2] % 5 > 0,
            "c6": not verbose and digest[3] % 2 == 0,
        }
        justifications = {
            key: ("supported by the explanation" if value else "not supported")
            for key, value in verdicts.items()
        }
        payload = {**verdicts, "justifications": justifications}
        return json.dumps(payload)

    def _fix(self, prompt, digest):
        defect = self.identify(prompt)
        level = self._context_level(prompt)
        if defect is None:
            return json.dumps(
                {"function": "def attempt():\n    raise RuntimeError('insufficient context')"}
            )
        reference_fn = self._reference_function(defect)
        threshold = (64, 115, 179, 230)[level]
        if "=== FAILURE EXPLANATION ===" not in prompt:
            threshold = 128
        if digest[4] < threshold:
            if digest[5] % 3 == 0:
                return json.dumps({"function": self._variant(reference_fn)})
            return json.dumps({"function": reference_fn})
        broken = (
            f"def {defect.target_function.name}(*args, **kwargs):\n"
            "    raise RuntimeError('attempted fix did not work')"
        )
        return json.dumps({"function": broken})

    @staticmethod
    def _reference_function(defect):
        tree = ast.parse(defect.reference_fix)
        for node in ast.walk(tree):
            if isinstance(node, ast.FunctionDef) and node.name == defect.target_function.name:
                return ast.get_source_segment(defect.reference_fix, node)
        raise LookupError(defect.id)

    @staticmethod
    def _variant(reference_fn):
        lines = reference_fn.splitlines()
        header_end = next(i for i, line in enumerate(lines) if line.rstrip().endswith(":"))
        body_indent = lines[header_end + 1][: len(lines[header_end + 1])
                                            - len(lines[header_end + 1].lstrip())]
        extra = body_indent + "retry_budget = 0"
        return "\n".join(lines[: header_end + 1] + [extra] + lines[header_end + 1 :])


def main():
    corpus = {d.id: d for d in load_corpus(ROOT / "corpus")}
    if REPLAY_CORPUS.exists():
        shutil.rmtree(REPLAY_CORPUS)
    if CACHE.exists():
        shutil.rmtree(CACHE)
    for defect_id in DEFECT_IDS:
        shutil.copytree(ROOT / "corpus" / defect_id, REPLAY_CORPUS / defect_id)

    defects = load_corpus(REPLAY_CORPUS)
    provider = ScriptedCorpusProvider(defects)
    gateway = Gateway(provider=provider, mode="record", cache_dir=CACHE)
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        manifest = RunManifest(
            corpus=REPLAY_CORPUS,
            out=Path(tmp) / "out",
            models=[MODEL],
            batches=["isolated"],
            run_ids=[1, 2, 3],
            mode="record",
        )
        summary = run_sweep(manifest, gateway)
    entries = len(list(CACHE.glob("*.json")))
    print(f"recorded {entries} cache entries; trials={summary.trials} "
          f"errors={len(summary.errors)}")
    if summary.errors:
        for error in summary.errors[:10]:
            print("  !", error)
        raise SystemExit(1)


if __name__ == "__main__":
    main()
