/** Entry point: `node dist/src/main.js [config.json]` starts the service. */

import { createService, loadConfig, type ServiceConfig } from "./server.js";

const DEFAULT_CONFIG: ServiceConfig = {
  port: 8763,
  models: {
    generator: { kind: "cue-reaction" },
    embedder: { kind: "hash-encoder", dim: 64 },
    polarity: { kind: "lexicon" },
    completion: { kind: "bigram-lm" },
  },
};

const config = process.argv[2] ? loadConfig(process.argv[2]) : DEFAULT_CONFIG;
const server = createService(config);
server.listen(config.port, () => {
  const address = server.address();
  const port = typeof address === "object" && address ? address.port : config.port;
  console.log(`model service listening on :${port}`);
});
