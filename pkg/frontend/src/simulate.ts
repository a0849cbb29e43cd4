/**
 * Headless study simulation for integration checks.
 *
 * Builds a synthetic corpus, runs N participants through their full
 * assignments with deterministic verdicts, and prints the exported label
 * CSV to stdout, so the analysis side can consume a genuine export.
 *
 *   node dist/simulate.js --participants 3 --defects 8 --seed 42
 */

import { buildAssignment, StudyAssignment } from "./assignment.js";
import { buildCorpus, ExplanationItem, itemId } from "./items.js";
import { exportLabels } from "./export.js";
import { hashString, mulberry32 } from "./rng.js";
import { LabelStore, Verdicts } from "./store.js";

function argValue(flag: string, fallback: string): string {
  const index = process.argv.indexOf(flag);
  return index >= 0 ? process.argv[index + 1] : fallback;
}

const participants = Number(argValue("--participants", "3"));
const defectCount = Number(argValue("--defects", "8"));
const seed = Number(argValue("--seed", "42"));

const items: ExplanationItem[] = [];
for (let d = 1; d <= defectCount; d++) {
  const defectId = `d${String(d).padStart(2, "0")}_sim`;
  for (const runId of [1, 2, 3]) {
    items.push({
      itemId: itemId(defectId, runId),
      defectId,
      runId,
      text: `simulated explanation ${itemId(defectId, runId)}`,
    });
  }
}
const corpus = buildCorpus(items);
const store = new LabelStore();
const assignments = new Map<string, StudyAssignment>();

for (let p = 1; p <= participants; p++) {
  const participantId = `p${String(p).padStart(2, "0")}`;
  const assignment = buildAssignment(participantId, seed, corpus);
  assignments.set(participantId, assignment);
  for (const defectId of assignment.defectOrder) {
    const presentation = assignment.presentations[defectId];
    for (const label of presentation.columnOrder) {
      const runId = presentation.labelToRun[label];
      const rng = mulberry32(hashString(`${participantId}|${defectId}|${runId}`));
      const verdicts = Object.fromEntries(
        ["c2", "c3", "c4", "c6"].map((c) => [c, rng() < 0.7 ? 1 : 0]),
      ) as unknown as Verdicts;
      store.record({
        participantId,
        itemId: itemId(defectId, runId),
        defectId,
        displayLabel: label,
        verdicts,
        difficulty: 1 + Math.floor(rng() * 5),
      });
    }
  }
}

process.stdout.write(exportLabels(store, assignments, corpus).csv);
