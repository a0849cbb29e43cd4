/**
 * Label CSV export in the analysis pipeline's schema:
 * rater_id,item_id,criterion,verdict,difficulty with rater_id
 * "human:<participant>" and canonical item ids. Stored submissions are
 * already de-randomized, so the export is a straight projection; the
 * round-trip from displayed A/B/C labels back to canonical explanation
 * ids is covered by the assignment tests.
 */

import { StudyCorpus } from "./items.js";
import { CRITERIA, LabelStore } from "./store.js";
import { LABELS, StudyAssignment } from "./assignment.js";

export class EmptyStudyError extends Error {}

export interface ExportResult {
  csv: string;
  labelsPerCriterion: number;
  /** participants whose sessions have unlabeled items */
  partialParticipants: string[];
}

export function exportLabels(
  store: LabelStore,
  assignments: Map<string, StudyAssignment>,
  corpus: StudyCorpus,
): ExportResult {
  const rows: string[] = ["rater_id,item_id,criterion,verdict,difficulty"];
  const submissions = store
    .latestAll()
    .sort((a, b) =>
      a.participantId === b.participantId
        ? a.itemId.localeCompare(b.itemId)
        : a.participantId.localeCompare(b.participantId),
    );
  if (submissions.length === 0) {
    throw new EmptyStudyError("no completed sessions to export");
  }
  for (const submission of submissions) {
    for (const criterion of CRITERIA) {
      rows.push(
        [
          `human:${submission.participantId}`,
          submission.itemId,
          criterion,
          submission.verdicts[criterion],
          submission.difficulty,
        ].join(","),
      );
    }
  }
  const partialParticipants = [...assignments.keys()].filter((participantId) => {
    const assignment = assignments.get(participantId)!;
    const expected = assignment.defectOrder.length * LABELS.length;
    const done = store
      .latestAll()
      .filter((s) => s.participantId === participantId).length;
    return done > 0 && done < expected;
  });
  return {
    csv: rows.join("\n") + "\n",
    labelsPerCriterion: submissions.length,
    partialParticipants,
  };
}
