"""Command-line entry point.

Subcommands mirror the pipeline stages: validate, slice, explain, score,
repair, analyze, report, and the end-to-end sweep.  A YAML config file can
pre-fill any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import context as ctx
from .corpus import load_corpus, trace_test, validate_defect
from .errors import FexlabError
from .gateway import Gateway, http_provider
from .localmodel import local_provider
from .pipeline import Pipeline, RunManifest, run_sweep
from .slicing import ModuleIndex, compute_slices, render_slice

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fexlab")
    parser.add_argument("--config", type=Path, help="YAML file pre-filling any flag")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--corpus", type=Path)
        p.add_argument("--out", type=Path)
        p.add_argument("--models", nargs="+", default=["local-sim"])
        p.add_argument("--batches", nargs="+", default=list(ctx.ALL_BATCHES),
                       choices=list(ctx.ALL_BATCHES))
        p.add_argument("--runs", type=int, default=3)
        p.add_argument("--mode", choices=["live", "record", "replay"], default="replay")
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--cache", type=Path, help="record/replay cache directory")
        p.add_argument("--labels", type=Path, help="study label CSV for agreement tables")
        p.add_argument("--judge-model", type=str, default=None)
        p.add_argument("--provider", choices=["local", "http"], default="local")
        p.add_argument("--providers", type=Path,
                       help="YAML mapping model ids to endpoint/settings")
        p.add_argument("--endpoint", type=str, help="http provider base URL")
        p.add_argument("--api-key-env", type=str, default="FEXLAB_API_KEY")
        p.add_argument("--timeout", type=float, default=30.0)
        p.add_argument("--rate-limit", type=float, default=None,
                       help="max provider requests per second")
        p.add_argument("--allow-partial", action="store_true")

    for name in ("validate", "slice", "explain", "score", "repair", "analyze",
                 "report", "sweep"):
        p = sub.add_parser(name)
        common(p)
    return parser


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config:
        overrides = yaml.safe_load(Path(args.config).read_text()) or {}
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr):
                setattr(args, attr, type(getattr(args, attr))(value)
                        if getattr(args, attr) is not None else value)
    return args


def _manifest(args: argparse.Namespace) -> RunManifest:
    if args.corpus is None or args.out is None:
        raise SystemExit("--corpus and --out are required")
    return RunManifest(
        corpus=args.corpus,
        out=args.out,
        models=args.models,
        batches=args.batches,
        run_ids=list(range(1, args.runs + 1)),
        mode=args.mode,
        parallelism=args.parallelism,
        seed=args.seed,
        cache_dir=args.cache,
        labels=args.labels,
        judge_model=args.judge_model,
        test_timeout=args.timeout,
    )


def _provider_registry(path: Path):
    """Per-model providers from a YAML config; unlisted models use the default."""
    config = yaml.safe_load(Path(path).read_text()) or {}
    models = config.get("models", {})
    default_kind = config.get("default", {}).get("kind", "local")
    resolved = {}
    for model_id, spec in models.items():
        if spec.get("kind", "http") == "local":
            resolved[model_id] = local_provider
        else:
            resolved[model_id] = http_provider(
                spec["endpoint"],
                spec.get("api_key_env", "FEXLAB_API_KEY"),
                settings={k: v for k, v in spec.items()
                          if k in ("temperature", "extra")},
            )

    def dispatch(request):
        provider = resolved.get(request.model)
        if provider is None:
            if default_kind != "local":
                raise SystemExit(f"no provider configured for model {request.model!r}")
            provider = local_provider
        return provider(request)

    return dispatch


def _gateway(args: argparse.Namespace) -> Gateway:
    provider = None
    if args.mode != "replay":
        if args.providers:
            provider = _provider_registry(args.providers)
        elif args.provider == "http":
            if not args.endpoint:
                raise SystemExit("--endpoint is required with --provider http")
            provider = http_provider(args.endpoint, args.api_key_env)
        else:
            provider = local_provider
    return Gateway(provider=provider, mode=args.mode, cache_dir=args.cache,
                   rate_limit=args.rate_limit)


def main(argv=None) -> int:
    args = _apply_config(build_parser().parse_args(argv))
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "validate":
        failures = 0
        for defect in load_corpus(args.corpus):
            report = validate_defect(defect, timeout=args.timeout)
            print(report.to_json())
            failures += not report.usable
        return 1 if failures and not args.allow_partial else 0

    if args.command == "slice":
        for defect in load_corpus(args.corpus):
            trace = trace_test(defect, timeout=args.timeout)
            slices = compute_slices(ModuleIndex(defect.buggy_source), trace)
            for kind, lineset in sorted(slices.items()):
                print(f"--- {defect.id} [{kind}] lines={lineset.sorted()}")
                print(render_slice(defect.buggy_source, lineset))
        return 0

    manifest = _manifest(args)
    try:
        gateway = _gateway(args)
        pipeline = Pipeline(manifest, gateway)
        if args.command == "sweep":
            summary = run_sweep(manifest, gateway)
            print(
                json.dumps(
                    {
                        "trials": summary.trials,
                        "skipped": summary.skipped,
                        "passes": summary.passes,
                        "errors": len(summary.errors),
                    }
                )
            )
            if summary.errors:
                for err in summary.errors[:20]:
                    log.error("%s", err)
                return 0 if args.allow_partial else 1
            return 0
        if args.command == "explain":
            summary = pipeline.explain()
        elif args.command == "score":
            summary = pipeline.score()
        elif args.command == "repair":
            summary = pipeline.repair()
        elif args.command in ("analyze", "report"):
            paths = pipeline.report()
            for path in paths:
                print(path)
            return 0
        else:  # pragma: no cover
            raise SystemExit(f"unknown command {args.command}")
    except FexlabError as exc:
        log.error("%s", exc)
        return 2
    print(json.dumps({"trials": summary.trials, "skipped": summary.skipped,
                      "errors": len(summary.errors)}))
    if summary.errors and not args.allow_partial:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
