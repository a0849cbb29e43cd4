#!/usr/bin/env python3
"""Run the shipped offline sweep and print the quartile pass-rate table.

The replay cache under replay/ was recorded once against a deterministic
model stand-in, so this demo is fully offline and bit-identical on every
run. The same thing is available from the command line:

    fexlab sweep --corpus replay/corpus --out demo_out --mode replay \
        --cache replay/cache --models local-sim --batches isolated \
        --labels replay/labels.csv
"""

import tempfile
from pathlib import Path

from fexlab.gateway import Gateway
from fexlab.pipeline import RunManifest, run_sweep

ROOT = Path(__file__).resolve().parents[1]
REPLAY = ROOT / "replay"

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "out"
    manifest = RunManifest(
        corpus=REPLAY / "corpus",
        out=out,
        models=["local-sim"],
        batches=["isolated"],
        run_ids=[1, 2, 3],
        mode="replay",
        cache_dir=REPLAY / "cache",
        labels=REPLAY / "labels.csv",
    )
    summary = run_sweep(manifest, Gateway(mode="replay", cache_dir=REPLAY / "cache"))
    print(f"trials: {summary.trials}, skipped: {summary.skipped}, "
          f"errors: {len(summary.errors)}\n")

    print("---- downstream pass rates by explanation-quality quartile")
    print((out / "report/tables/table5_quartile_pass_rates.csv").read_text())
    print("---- per-configuration expected scores (first lines)")
    lines = (out / "report/figures/fig3_batch_scores.csv").read_text().splitlines()
    print("\n".join(lines[:8]))
