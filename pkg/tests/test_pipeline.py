import json
from pathlib import Path

import pytest

from fexlab.cli import main as cli_main
from fexlab.errors import CacheMiss
from fexlab.gateway import Gateway
from fexlab.pipeline import JsonlStore, Pipeline, RunManifest, run_sweep

from .conftest import REPLAY_DIR

REPLAY_CORPUS = REPLAY_DIR / "corpus"
REPLAY_CACHE = REPLAY_DIR / "cache"
LABELS = REPLAY_DIR / "labels.csv"


def replay_manifest(out: Path, **overrides) -> RunManifest:
    kwargs = dict(
        corpus=REPLAY_CORPUS,
        out=out,
        models=["local-sim"],
        batches=["isolated"],
        run_ids=[1, 2, 3],
        mode="replay",
        cache_dir=REPLAY_CACHE,
        labels=LABELS,
        test_timeout=20.0,
    )
    kwargs.update(overrides)
    return RunManifest(**kwargs)


def replay_gateway() -> Gateway:
    return Gateway(mode="replay", cache_dir=REPLAY_CACHE)


def tree_digest(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


# -- store ---------------------------------------------------------------------


def test_store_first_write_wins(tmp_path):
    store = JsonlStore(tmp_path / "s.jsonl", lambda r: r["k"])
    assert store.append({"k": "a", "v": 1})
    assert not store.append({"k": "a", "v": 2})
    reloaded = JsonlStore(tmp_path / "s.jsonl", lambda r: r["k"])
    assert reloaded.get("a") == {"k": "a", "v": 1}


def test_store_tolerates_torn_tail(tmp_path):
    path = tmp_path / "s.jsonl"
    store = JsonlStore(path, lambda r: r["k"])
    store.append({"k": "a", "v": 1})
    with open(path, "a") as fh:
        fh.write('{"k": "b", "v":')  # simulated crash mid-write
    reloaded = JsonlStore(path, lambda r: r["k"])
    assert "a" in reloaded and "b" not in reloaded


# -- sweep ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def first_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep-a")
    summary = run_sweep(replay_manifest(out), replay_gateway())
    return out, summary


def test_replay_sweep_completes_offline(first_sweep):
    out, summary = first_sweep
    assert summary.errors == []
    assert summary.trials > 0
    explanations = (out / "explanations/local-sim/isolated.jsonl").read_text()
    assert len(explanations.splitlines()) == 3 * 9 * 3  # defects x instances x runs


def test_replay_sweep_bit_identical_across_fresh_runs(first_sweep, tmp_path):
    out_a, _ = first_sweep
    out_b = tmp_path / "sweep-b"
    run_sweep(replay_manifest(out_b), replay_gateway())
    assert tree_digest(out_a) == tree_digest(out_b)


def test_rerun_into_same_out_skips_everything(first_sweep):
    out, first = first_sweep
    before = tree_digest(out)
    summary = run_sweep(replay_manifest(out), replay_gateway())
    assert summary.skipped == summary.trials
    assert tree_digest(out) == before


def test_crash_resume_matches_uninterrupted_run(tmp_path):
    out_partial = tmp_path / "partial"
    manifest = replay_manifest(out_partial)
    pipeline = Pipeline(manifest, replay_gateway())
    pipeline.validate()
    pipeline.explain()  # "crash" after the first stage
    summary = run_sweep(manifest, replay_gateway())
    assert summary.errors == []
    out_full = tmp_path / "full"
    run_sweep(replay_manifest(out_full), replay_gateway())
    assert tree_digest(out_partial) == tree_digest(out_full)


def test_parallel_explain_yields_same_record_set(tmp_path):
    serial = Pipeline(replay_manifest(tmp_path / "serial"), replay_gateway())
    serial.validate()
    serial.explain()
    parallel = Pipeline(
        replay_manifest(tmp_path / "parallel", parallelism=4), replay_gateway()
    )
    parallel.validate()
    parallel.explain()

    def record_set(out: Path):
        path = out / "explanations/local-sim/isolated.jsonl"
        return {line for line in path.read_text().splitlines()}

    assert record_set(tmp_path / "serial") == record_set(tmp_path / "parallel")


def test_full_protocol_explain_produces_3420_records(tmp_path):
    from fexlab.localmodel import local_provider
    from .conftest import CORPUS_DIR

    manifest = RunManifest(
        corpus=CORPUS_DIR, out=tmp_path / "out", models=["local-sim"],
        batches=["isolated", "two_way", "three_way"], run_ids=[1, 2, 3],
        mode="live",
    )
    pipeline = Pipeline(manifest, Gateway(provider=local_provider, mode="live"))
    summary = pipeline.explain()
    assert summary.trials == 3420
    assert summary.errors == []
    total = sum(
        len((tmp_path / "out/explanations/local-sim" / f"{b}.jsonl")
            .read_text().splitlines())
        for b in manifest.batches
    )
    assert total == 12 * 95 * 3  # defects x instances x runs


def test_cold_cache_fails_fast_listing_keys(tmp_path):
    manifest = replay_manifest(tmp_path / "out", cache_dir=tmp_path / "empty-cache")
    gateway = Gateway(mode="replay", cache_dir=tmp_path / "empty-cache")
    with pytest.raises(CacheMiss) as excinfo:
        run_sweep(manifest, gateway)
    assert "first-stage keys" in str(excinfo.value)


def test_no_step_writes_outside_output_root(first_sweep):
    out, _ = first_sweep
    assert not (REPLAY_CORPUS / "explanations").exists()
    assert sorted(p.name for p in (out / "report").iterdir()) == ["figures", "tables"]


def test_no_explanation_attempts_once_per_defect_run(first_sweep):
    out, _ = first_sweep
    lines = (out / "repairs/local-sim/no_explanation.jsonl").read_text().splitlines()
    assert len(lines) == 3 * 3  # defects x runs
    records = [json.loads(line) for line in lines]
    assert all(rec["condition"] == "NO_EXPLANATION" for rec in records)


def test_with_explanation_attempt_per_trial(first_sweep):
    out, _ = first_sweep
    lines = (out / "repairs/local-sim/isolated.jsonl").read_text().splitlines()
    assert len(lines) == 3 * 9 * 3
    records = [json.loads(line) for line in lines]
    assert all(rec["condition"] == "WITH_EXPLANATION" for rec in records)
    passing = [rec for rec in records if rec["passed"]]
    assert passing, "scripted cache should contain passing fixes"
    assert all(rec["metrics"] is not None for rec in passing)
    failing = [rec for rec in records if not rec["passed"]]
    assert all(rec["metrics"] is None for rec in failing)


# -- CLI ---------------------------------------------------------------------------


def run_cli(*args) -> int:
    return cli_main([str(a) for a in args])


def test_cli_validate_demo_corpus(capsys):
    assert run_cli("validate", "--corpus", REPLAY_CORPUS) == 0
    out = capsys.readouterr().out
    assert out.count('"usable": true') == 3


def test_cli_sweep_and_report(tmp_path, capsys):
    code = run_cli(
        "sweep", "--corpus", REPLAY_CORPUS, "--out", tmp_path / "out",
        "--mode", "replay", "--cache", REPLAY_CACHE, "--models", "local-sim",
        "--batches", "isolated", "--runs", "3", "--labels", LABELS,
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["errors"] == 0
    assert (tmp_path / "out/report/tables/table5_quartile_pass_rates.csv").is_file()


def test_cli_slice_prints_rendered_slices(capsys):
    assert run_cli("slice", "--corpus", REPLAY_CORPUS) == 0
    out = capsys.readouterr().out
    assert "[backward]" in out and "L" in out


def test_cli_providers_config_routes_models(tmp_path, capsys):
    config = tmp_path / "providers.yaml"
    config.write_text(
        "default:\n  kind: local\n"
        "models:\n  sim-a:\n    kind: local\n"
    )
    code = run_cli(
        "explain", "--corpus", REPLAY_CORPUS, "--out", tmp_path / "out",
        "--mode", "live", "--providers", config, "--models", "sim-a",
        "--batches", "isolated", "--runs", "1",
    )
    assert code == 0
    produced = tmp_path / "out/explanations/sim-a/isolated.jsonl"
    assert len(produced.read_text().splitlines()) == 3 * 9
