/**
 * HTTP API for the rating study.
 *
 * Sessions are resumable: the assignment is recomputed deterministically
 * from (participant id, study seed), and progress is derived from the
 * label store, so closing and reopening a session never changes what a
 * participant sees or loses persisted labels.
 */

import { existsSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import express, { Express } from "express";
import { z } from "zod";

import {
  buildAssignment,
  DisplayLabel,
  LABELS,
  resolveDisplayedItem,
  StudyAssignment,
} from "./assignment.js";
import { itemId, StudyCorpus } from "./items.js";
import { exportLabels, EmptyStudyError } from "./export.js";
import { IncompleteSubmissionError, LabelStore, Verdicts } from "./store.js";

const submissionSchema = z.object({
  defectId: z.string().min(1),
  label: z.enum(["A", "B", "C"]),
  verdicts: z.object({
    c2: z.union([z.literal(0), z.literal(1)]),
    c3: z.union([z.literal(0), z.literal(1)]),
    c4: z.union([z.literal(0), z.literal(1)]),
    c6: z.union([z.literal(0), z.literal(1)]),
  }),
  difficulty: z.number().int().min(1).max(5),
});

export interface StudyConfig {
  corpus: StudyCorpus;
  studySeed: number;
  store: LabelStore;
}

export interface DefectView {
  defectId: string;
  rootCause: string;
  columns: { label: DisplayLabel; text: string; labeled: boolean }[];
  progress: { labeledItems: number; totalItems: number; defectIndex: number;
              totalDefects: number };
}

export class Study {
  readonly assignments = new Map<string, StudyAssignment>();

  constructor(readonly config: StudyConfig) {}

  assignmentFor(participantId: string): StudyAssignment {
    let assignment = this.assignments.get(participantId);
    if (!assignment) {
      assignment = buildAssignment(participantId, this.config.studySeed,
                                   this.config.corpus);
      this.assignments.set(participantId, assignment);
    }
    return assignment;
  }

  labeledCount(participantId: string): number {
    const assignment = this.assignmentFor(participantId);
    let count = 0;
    for (const defectId of assignment.defectOrder) {
      for (const label of LABELS) {
        const canonical = resolveDisplayedItem(assignment, defectId, label);
        if (this.config.store.latest(participantId, canonical)) count++;
      }
    }
    return count;
  }

  nextView(participantId: string): DefectView | null {
    const assignment = this.assignmentFor(participantId);
    const total = assignment.defectOrder.length * LABELS.length;
    for (const [index, defectId] of assignment.defectOrder.entries()) {
      const presentation = assignment.presentations[defectId];
      const columns = presentation.columnOrder.map((label) => {
        const canonical = resolveDisplayedItem(assignment, defectId, label);
        return {
          label,
          text: this.config.corpus.items.get(canonical)?.text ?? "",
          labeled: Boolean(this.config.store.latest(participantId, canonical)),
        };
      });
      if (columns.some((c) => !c.labeled)) {
        return {
          defectId,
          rootCause: this.config.corpus.rootCauses.get(defectId) ?? "",
          columns,
          progress: {
            labeledItems: this.labeledCount(participantId),
            totalItems: total,
            defectIndex: index + 1,
            totalDefects: assignment.defectOrder.length,
          },
        };
      }
    }
    return null;
  }

  submit(participantId: string, defectId: string, label: DisplayLabel,
         verdicts: Verdicts, difficulty: number) {
    const assignment = this.assignmentFor(participantId);
    if (!assignment.defectOrder.includes(defectId)) {
      throw new UnknownItemError(`defect ${defectId} not in assignment`);
    }
    const canonical = resolveDisplayedItem(assignment, defectId, label);
    if (!this.config.corpus.items.has(canonical)) {
      throw new UnknownItemError(`item ${canonical} unknown`);
    }
    return this.config.store.record({
      participantId,
      itemId: canonical,
      defectId,
      displayLabel: label,
      verdicts,
      difficulty,
    });
  }
}

export class UnknownItemError extends Error {}

export function createApp(config: StudyConfig): Express {
  const study = new Study(config);
  const app = express();
  app.use(express.json());
  const staticDir = join(dirname(fileURLToPath(import.meta.url)), "..", "static");
  if (existsSync(staticDir)) {
    app.use(express.static(staticDir));
  }

  app.post("/api/session", (req, res) => {
    const participantId = String(req.body?.participantId ?? "").trim();
    if (!participantId) {
      res.status(400).json({ error: "participantId required" });
      return;
    }
    const assignment = study.assignmentFor(participantId);
    res.json({
      participantId,
      resumed: study.labeledCount(participantId) > 0,
      defectCount: assignment.defectOrder.length,
      labeledItems: study.labeledCount(participantId),
      totalItems: assignment.defectOrder.length * LABELS.length,
    });
  });

  app.get("/api/session/:participantId/next", (req, res) => {
    const view = study.nextView(req.params.participantId);
    if (view === null) {
      res.json({ done: true });
      return;
    }
    res.json(view);
  });

  app.post("/api/session/:participantId/labels", (req, res) => {
    const parsed = submissionSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: "incomplete submission",
                             details: parsed.error.issues });
      return;
    }
    const { defectId, label, verdicts, difficulty } = parsed.data;
    try {
      const stored = study.submit(req.params.participantId, defectId,
                                  label as DisplayLabel,
                                  verdicts as Verdicts, difficulty);
      res.json({ stored: { itemId: stored.itemId, revision: stored.revision } });
    } catch (error) {
      if (error instanceof UnknownItemError) {
        res.status(404).json({ error: String(error.message) });
      } else if (error instanceof IncompleteSubmissionError) {
        res.status(400).json({ error: String(error.message) });
      } else {
        res.status(500).json({ error: "internal error" });
      }
    }
  });

  app.get("/api/export.csv", (_req, res) => {
    try {
      const result = exportLabels(config.store, study.assignments, config.corpus);
      res.setHeader("X-Labels-Per-Criterion", String(result.labelsPerCriterion));
      res.setHeader("X-Partial-Participants",
                    result.partialParticipants.join(";"));
      res.type("text/csv").send(result.csv);
    } catch (error) {
      if (error instanceof EmptyStudyError) {
        res.status(409).json({ error: String((error as Error).message) });
      } else {
        res.status(500).json({ error: "internal error" });
      }
    }
  });

  return app;
}

export { itemId };
