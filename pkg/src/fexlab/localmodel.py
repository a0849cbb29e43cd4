"""A deterministic offline model stand-in.

Produces schema-valid responses derived from a hash of the request, so the
pipeline can run end to end without network access.  Output quality varies
pseudo-randomly with the prompt, which gives downstream scoring and
stratification something to discriminate; it makes no attempt to actually
fix anything.
"""

from __future__ import annotations

import hashlib
import json
import re

from .gateway import CompletionRequest

_LINE = re.compile(r"\bL(\d+):")


def _digest(request: CompletionRequest) -> bytes:
    return hashlib.sha256(
        f"{request.model}|{request.schema_id}|{request.prompt}".encode()
    ).digest()


def _usage(prompt: str, raw: str) -> dict:
    return {"prompt_tokens": len(prompt.split()), "completion_tokens": len(raw.split())}


def local_provider(request: CompletionRequest) -> tuple[str, dict]:
    digest = _digest(request)
    if request.schema_id == "explanation":
        raw = _explanation(request.prompt, digest)
    elif request.schema_id == "judge":
        raw = _judge(digest)
    elif request.schema_id == "fix":
        raw = _fix(request.prompt, digest)
    else:
        raw = "{}"
    return raw, _usage(request.prompt, raw)


def _mentioned_lines(prompt: str) -> list[str]:
    return sorted({f"L{m}" for m in _LINE.findall(prompt)}, key=lambda s: int(s[1:]))[:3]

def _mentioned_names(prompt: str) -> list[str]:
    return sorted(set(re.findall(r"def (\w+)\(", prompt)))[:2]


def _explanation(prompt: str, digest: bytes) -> str:
    lines = _mentioned_lines(prompt)
    names = _mentioned_names(prompt)
    anchor = ", ".join(lines + names) or "the failing path"
    problem = f"The test fails because the logic around {anchor} computes a wrong value."
    chain = (
        "The input reaches the flawed branch, the intermediate value is computed "
        "incorrectly, and the wrong result propagates to the assertion."
    )
    actions = f"Inspect {anchor} and adjust the condition or computation it performs."
    if digest[0] % 3 == 0:
        chain += " " + "Each subsequent step amplifies the deviation." * (1 + digest[1] % 3)
    return json.dumps(
        {"problem": problem, "causal_chain": chain, "suggested_actions": actions}
    )


def _judge(digest: bytes) -> str:
    verdicts = {c: bool(digest[i] % 2) for i, c in enumerate(("c2", "c3", "c4", "c6"))}
    justifications = {
        c: ("criterion satisfied" if v else "criterion not satisfied")
        for c, v in verdicts.items()
    }
    payload = dict(verdicts)
    payload["justifications"] = justifications
    return json.dumps(payload)


def _fix(prompt: str, digest: bytes) -> str:
    names = _mentioned_names(prompt)
    name = names[digest[2] % len(names)] if names else "target"
    body = f"def {name}(*args, **kwargs):\n    raise NotImplementedError('stub fix')"
    return json.dumps({"function": body})
