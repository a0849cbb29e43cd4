/**
 * Per-participant study randomization.
 *
 * Counterbalances order effects by randomizing (1) the order defects are
 * shown in, (2) which explanation hides behind each display label A/B/C,
 * and (3) the left-to-right column order of the labels. All three are
 * derived from a seeded generator keyed by (participant id, study seed),
 * so recomputing the assignment after a restart yields the identical
 * result and sessions can resume safely.
 */

import { StudyCorpus, itemId } from "./items.js";
import { hashString, mulberry32, shuffle } from "./rng.js";

export type DisplayLabel = "A" | "B" | "C";
export const LABELS: DisplayLabel[] = ["A", "B", "C"];

export interface DefectPresentation {
  /** display label -> run id of the explanation shown under that label */
  labelToRun: Record<DisplayLabel, number>;
  /** left-to-right order of display labels */
  columnOrder: DisplayLabel[];
}

export interface StudyAssignment {
  participantId: string;
  seed: number;
  defectOrder: string[];
  presentations: Record<string, DefectPresentation>;
}

export class MissingExplanationsError extends Error {}

export function buildAssignment(
  participantId: string,
  studySeed: number,
  corpus: StudyCorpus,
): StudyAssignment {
  if (corpus.defects.length === 0) {
    throw new MissingExplanationsError("empty defect set");
  }
  const seed = (hashString(`${studySeed}:${participantId}`) ^ studySeed) >>> 0;
  const rng = mulberry32(seed);
  const defectOrder = shuffle(corpus.defects, rng);
  const presentations: Record<string, DefectPresentation> = {};
  // Mappings are derived in canonical defect order so that two participants
  // with different defect orders still get independent per-defect draws.
  for (const defectId of corpus.defects) {
    const runs = corpus.runsByDefect.get(defectId) ?? [];
    if (runs.length !== LABELS.length) {
      throw new MissingExplanationsError(
        `defect ${defectId} has ${runs.length} explanation runs; need ${LABELS.length}`,
      );
    }
    const shuffledRuns = shuffle(runs, rng);
    const labelToRun = Object.fromEntries(
      LABELS.map((label, i) => [label, shuffledRuns[i]]),
    ) as Record<DisplayLabel, number>;
    presentations[defectId] = {
      labelToRun,
      columnOrder: shuffle(LABELS, rng),
    };
  }
  return { participantId, seed, defectOrder, presentations };
}

/** Canonical item id behind a displayed (defect, label) pair. */
export function resolveDisplayedItem(
  assignment: StudyAssignment,
  defectId: string,
  label: DisplayLabel,
): string {
  const presentation = assignment.presentations[defectId];
  if (!presentation) {
    throw new MissingExplanationsError(`defect ${defectId} not in assignment`);
  }
  return itemId(defectId, presentation.labelToRun[label]);
}

export function assignmentItemCount(assignment: StudyAssignment): number {
  return assignment.defectOrder.length * LABELS.length;
}
