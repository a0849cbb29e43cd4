/**
 * Study item ingestion: explanation records in, rateable items out.
 *
 * The study bundle reads the JSON-lines explanation records produced by the
 * generation pipeline, keeps the full-context (BASELINE) rows of one model,
 * and groups them into one item per (defect, run). Canonical item ids use
 * the `<defect>#r<run>` form that the analysis side expects.
 */

import { readFileSync } from "node:fs";

export interface ExplanationItem {
  itemId: string;
  defectId: string;
  runId: number;
  text: string;
}

export interface StudyCorpus {
  defects: string[];
  /** itemId -> explanation text */
  items: Map<string, ExplanationItem>;
  /** defectId -> run ids in ascending order */
  runsByDefect: Map<string, number[]>;
  rootCauses: Map<string, string>;
}

export function itemId(defectId: string, runId: number): string {
  return `${defectId}#r${runId}`;
}

interface RawRecord {
  defect_id: string;
  configuration: string;
  model: string;
  run_id: number;
  problem: string;
  causal_chain: string;
  suggested_actions: string;
}

export function loadExplanationJsonl(
  path: string,
  model: string,
  configuration = "BASELINE",
): ExplanationItem[] {
  const lines = readFileSync(path, "utf8").split("\n").filter((l) => l.trim());
  const items: ExplanationItem[] = [];
  for (const line of lines) {
    const rec = JSON.parse(line) as RawRecord;
    if (rec.configuration !== configuration || rec.model !== model) continue;
    items.push({
      itemId: itemId(rec.defect_id, rec.run_id),
      defectId: rec.defect_id,
      runId: rec.run_id,
      text: [rec.problem, rec.causal_chain, rec.suggested_actions].join("\n"),
    });
  }
  return items;
}

export function buildCorpus(
  items: ExplanationItem[],
  rootCauses: Map<string, string> = new Map(),
): StudyCorpus {
  const byId = new Map<string, ExplanationItem>();
  const runsByDefect = new Map<string, number[]>();
  for (const item of items) {
    byId.set(item.itemId, item);
    const runs = runsByDefect.get(item.defectId) ?? [];
    if (!runs.includes(item.runId)) runs.push(item.runId);
    runsByDefect.set(item.defectId, runs.sort((a, b) => a - b));
  }
  const defects = [...runsByDefect.keys()].sort();
  return { defects, items: byId, runsByDefect, rootCauses };
}
