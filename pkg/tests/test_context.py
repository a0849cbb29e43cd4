import itertools

import pytest

from fexlab.context import (
    ALL_BATCHES,
    BASELINE_NAME,
    CANONICAL_MODULES,
    EMPTY_DOCSTRING_MARKER,
    ContextConfiguration,
    DefectArtifacts,
    assemble_prompt,
    baseline_configuration,
    batch_instances,
    enumerate_configurations,
    materialize_module,
    run_explanation_trial,
    unique_configuration_names,
)
from fexlab.errors import MissingSlice
from fexlab.gateway import Gateway
from fexlab.localmodel import local_provider

from .conftest import make_defect


def test_batch_sizes():
    assert len(enumerate_configurations("isolated")) == 8
    assert len(enumerate_configurations("two_way")) == 28
    assert len(enumerate_configurations("three_way")) == 56
    assert len(enumerate_configurations("baseline")) == 1


def test_93_unique_configurations_and_95_instances():
    assert len(unique_configuration_names()) == 93
    assert sum(len(batch_instances(b)) for b in ALL_BATCHES) == 95


def test_configuration_names_canonical():
    cfg = ContextConfiguration(frozenset({"ERROR", "CODE"}), "two_way")
    assert cfg.name == "CODE+ERROR"
    assert baseline_configuration().name == BASELINE_NAME


def test_configuration_cardinality_enforced():
    with pytest.raises(ValueError):
        ContextConfiguration(frozenset({"CODE"}), "two_way")
    with pytest.raises(ValueError):
        ContextConfiguration(frozenset({"CODE", "ERROR"}), "baseline")


def test_enumeration_is_deterministic():
    first = [c.name for c in enumerate_configurations("two_way")]
    second = [c.name for c in enumerate_configurations("two_way")]
    assert first == second


def test_materialize_sections_have_headers(demo_artifacts):
    section = materialize_module(demo_artifacts, "ERROR")
    assert section.startswith("=== ERROR ===\n")
    assert demo_artifacts.trace.error_text.rstrip() in section


def test_materialize_code_and_test_are_exact_substrings(demo_artifacts):
    defect = demo_artifacts.defect
    assert defect.buggy_source.rstrip() in materialize_module(demo_artifacts, "CODE")
    assert defect.triggering_test.rstrip() in materialize_module(demo_artifacts, "TEST")


def test_empty_docstring_gets_marker(demo_artifacts):
    empty = make_defect("def f():\n    return 1\n", docstring="")
    artifacts = DefectArtifacts(empty, demo_artifacts.trace, demo_artifacts.slices)
    section = materialize_module(artifacts, "DOCSTRING")
    assert EMPTY_DOCSTRING_MARKER in section


def test_slice_sections_carry_rendered_text(demo_artifacts):
    from fexlab.slicing import render_slice

    section = materialize_module(demo_artifacts, "SLICE_UNION")
    rendered = render_slice(demo_artifacts.defect.buggy_source,
                            demo_artifacts.slices["union"])
    assert section == f"=== SLICE_UNION ===\n{rendered.rstrip()}\n"


def test_missing_slice_raises(demo_artifacts):
    artifacts = DefectArtifacts(demo_artifacts.defect, demo_artifacts.trace, {})
    with pytest.raises(MissingSlice):
        materialize_module(artifacts, "SLICE_UNION")


def test_prompt_deterministic_and_order_stable(demo_artifacts):
    for modules in itertools.permutations(["TEST", "CODE", "ERROR"]):
        cfg = ContextConfiguration(frozenset(modules), "three_way")
        prompt = assemble_prompt(demo_artifacts, cfg)
        assert prompt == assemble_prompt(demo_artifacts, cfg)
        assert prompt.index("=== CODE ===") < prompt.index("=== ERROR ===")
        assert prompt.index("=== ERROR ===") < prompt.index("=== TEST ===")


def test_baseline_prompt_has_all_eight_sections(demo_artifacts):
    prompt = assemble_prompt(demo_artifacts, baseline_configuration())
    for module in CANONICAL_MODULES:
        assert f"=== {module} ===" in prompt


def test_section_bodies_are_exact_artifact_substrings(demo_artifacts):
    defect = demo_artifacts.defect
    prompt = assemble_prompt(
        demo_artifacts, ContextConfiguration(frozenset({"CODE", "TEST"}), "two_way")
    )
    assert defect.buggy_source.rstrip() in prompt
    assert defect.triggering_test.rstrip() in prompt


def test_trial_round_trips_through_gateway(demo_artifacts, tmp_path):
    gw = Gateway(provider=local_provider, mode="record", cache_dir=tmp_path)
    cfg = ContextConfiguration(frozenset({"CODE"}), "isolated")
    record = run_explanation_trial(demo_artifacts, cfg, "local-sim", 1, gw,
                                   batch="isolated")
    assert record.key.run_id == 1
    assert record.batch == "isolated"
    assert record.problem
    replay = Gateway(mode="replay", cache_dir=tmp_path)
    again = run_explanation_trial(demo_artifacts, cfg, "local-sim", 1, replay,
                                  batch="isolated")
    assert again.explanation_text == record.explanation_text
    assert again.served_from == "replay"


def test_trial_plan_arithmetic_full_protocol():
    defects, runs = 12, 3
    per_defect_run = sum(len(batch_instances(b)) for b in ALL_BATCHES)
    assert per_defect_run == 95
    assert defects * per_defect_run * runs == 3420
