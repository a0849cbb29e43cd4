#!/usr/bin/env python3
"""Regenerate the synthetic study-label fixture at replay/labels.csv.

12 human raters label 24 items (8 defects x 3 runs) on the four
judgment-based criteria, following fixed per-criterion patterns whose
aggregate values are hand-computable:

  c2  even items unanimous pass, odd items 11-of-12
  c3  even items 9-of-12, odd items 6-of-12
  c4  all pass
  c6  every item 7-of-12 (so extremity contributes exactly 7/12)

Judge classes: judge-a copies the human labels, judge-b always passes,
judge-c copies the humans but flips rater h12.  Difficulty is constant per
criterion (c2=2, c3=3, c4=1, c6=4), rated once per participant x defect.
"""

import csv
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "replay" / "labels.csv"

DEFECTS = [
    "d01_text_wrap", "d02_running_stats", "d03_duration_parse", "d04_interest",
    "d05_bounds", "d06_numbers_util", "d07_robust_stats", "d08_table_format",
]
RUNS = (1, 2, 3)
DIFFICULTY = {"c2": 2, "c3": 3, "c4": 1, "c6": 4}


def human_verdict(criterion: str, item_index: int, rater_index: int) -> int:
    if criterion == "c2":
        threshold = 12 if item_index % 2 == 0 else 11
    elif criterion == "c3":
        threshold = 9 if item_index % 2 == 0 else 6
    elif criterion == "c4":
        threshold = 12
    else:
        threshold = 7
    return 1 if rater_index <= threshold else 0


def main():
    OUT.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    items = [(f"{defect}#r{run}", idx)
             for idx, (defect, run) in enumerate(
                 (d, r) for d in DEFECTS for r in RUNS)]
    for item_id, item_index in items:
        defect = item_id.split("#")[0]
        for criterion in ("c2", "c3", "c4", "c6"):
            for rater_index in range(1, 13):
                verdict = human_verdict(criterion, item_index, rater_index)
                rows.append(
                    [f"human:h{rater_index:02d}", item_id, criterion, verdict,
                     DIFFICULTY[criterion]]
                )
                rows.append(
                    [f"judge-a:rep{rater_index:02d}", item_id, criterion, verdict, ""]
                )
                rows.append(
                    [f"judge-b:rep{rater_index:02d}", item_id, criterion, 1, ""]
                )
                flipped = 1 - verdict if rater_index == 12 else verdict
                rows.append(
                    [f"judge-c:rep{rater_index:02d}", item_id, criterion, flipped, ""]
                )
    with open(OUT, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rater_id", "item_id", "criterion", "verdict", "difficulty"])
        writer.writerows(rows)
    human_rows = sum(1 for r in rows if r[0].startswith("human:"))
    print(f"wrote {len(rows)} label rows ({human_rows} human) to {OUT}")


if __name__ == "__main__":
    main()
