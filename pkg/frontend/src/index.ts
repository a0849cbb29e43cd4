/**
 * Entry point: serve the study against a generated explanation JSONL.
 *
 *   node dist/index.js --explanations ../demo_out/explanations/local-sim/isolated.jsonl \
 *       --model local-sim --seed 20260809 --labels-file study-labels.jsonl --port 8731
 */

import { buildCorpus, loadExplanationJsonl } from "./items.js";
import { createApp } from "./server.js";
import { LabelStore } from "./store.js";

function argValue(flag: string, fallback?: string): string | undefined {
  const index = process.argv.indexOf(flag);
  return index >= 0 ? process.argv[index + 1] : fallback;
}

const explanationsPath = argValue("--explanations");
if (!explanationsPath) {
  console.error("--explanations <jsonl> is required");
  process.exit(2);
}
const model = argValue("--model", "local-sim")!;
const seed = Number(argValue("--seed", "20260809"));
const labelsFile = argValue("--labels-file", "study-labels.jsonl");
const port = Number(argValue("--port", "8731"));

const corpus = buildCorpus(loadExplanationJsonl(explanationsPath, model));
const store = new LabelStore(labelsFile);
const app = createApp({ corpus, studySeed: seed, store });

app.listen(port, () => {
  console.log(`study-ui listening on :${port} with ${corpus.defects.length} defects`);
});
