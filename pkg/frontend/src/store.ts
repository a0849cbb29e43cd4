/**
 * Append-only label storage with an audit trail.
 *
 * One study writes one JSON-lines file. Every submission is appended as a
 * new entry (never rewritten); resubmissions get an incremented revision
 * and the latest revision wins when reading. Writes for one submission are
 * a single atomic append of one line.
 */

import { appendFileSync, existsSync, readFileSync } from "node:fs";

export const CRITERIA = ["c2", "c3", "c4", "c6"] as const;
export type Criterion = (typeof CRITERIA)[number];
export type Verdicts = Record<Criterion, 0 | 1>;

export interface StoredSubmission {
  participantId: string;
  /** canonical item id (<defect>#r<run>), already de-randomized */
  itemId: string;
  defectId: string;
  displayLabel: string;
  verdicts: Verdicts;
  difficulty: number;
  revision: number;
  submittedAt: string;
}

export class IncompleteSubmissionError extends Error {}

export class LabelStore {
  private entries: StoredSubmission[] = [];

  constructor(private readonly path?: string) {
    if (path && existsSync(path)) {
      for (const line of readFileSync(path, "utf8").split("\n")) {
        if (line.trim()) this.entries.push(JSON.parse(line));
      }
    }
  }

  record(submission: Omit<StoredSubmission, "revision" | "submittedAt">): StoredSubmission {
    for (const criterion of CRITERIA) {
      const verdict = submission.verdicts[criterion];
      if (verdict !== 0 && verdict !== 1) {
        throw new IncompleteSubmissionError(`missing verdict for ${criterion}`);
      }
    }
    if (!Number.isInteger(submission.difficulty) ||
        submission.difficulty < 1 || submission.difficulty > 5) {
      throw new IncompleteSubmissionError("difficulty must be an integer in 1..5");
    }
    const revision = this.latest(submission.participantId, submission.itemId)
      ? this.entriesFor(submission.participantId, submission.itemId).length + 1
      : 1;
    const stored: StoredSubmission = {
      ...submission,
      revision,
      submittedAt: new Date().toISOString(),
    };
    if (this.path) {
      appendFileSync(this.path, JSON.stringify(stored) + "\n");
    }
    this.entries.push(stored);
    return stored;
  }

  private entriesFor(participantId: string, itemId: string): StoredSubmission[] {
    return this.entries.filter(
      (e) => e.participantId === participantId && e.itemId === itemId,
    );
  }

  latest(participantId: string, itemId: string): StoredSubmission | undefined {
    const matching = this.entriesFor(participantId, itemId);
    return matching.length ? matching[matching.length - 1] : undefined;
  }

  /** Latest revision of every (participant, item) pair. */
  latestAll(): StoredSubmission[] {
    const byKey = new Map<string, StoredSubmission>();
    for (const entry of this.entries) {
      byKey.set(`${entry.participantId}|${entry.itemId}`, entry);
    }
    return [...byKey.values()];
  }

  participants(): string[] {
    return [...new Set(this.entries.map((e) => e.participantId))].sort();
  }

  auditTrail(participantId: string, itemId: string): StoredSubmission[] {
    return this.entriesFor(participantId, itemId);
  }
}
