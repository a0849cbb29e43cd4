import { buildCorpus, ExplanationItem, itemId, StudyCorpus } from "../src/items.js";

export function syntheticCorpus(defectCount: number, runs = [1, 2, 3]): StudyCorpus {
  const items: ExplanationItem[] = [];
  const rootCauses = new Map<string, string>();
  for (let d = 1; d <= defectCount; d++) {
    const defectId = `d${String(d).padStart(2, "0")}_case`;
    rootCauses.set(defectId, `reference root cause for ${defectId}`);
    for (const runId of runs) {
      items.push({
        itemId: itemId(defectId, runId),
        defectId,
        runId,
        text: `explanation body for ${itemId(defectId, runId)}`,
      });
    }
  }
  return buildCorpus(items, rootCauses);
}

export const ALL_PASS = { c2: 1, c3: 1, c4: 1, c6: 1 } as const;
