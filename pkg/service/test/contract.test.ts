/**
 * Wire-contract conformance: the service must pass the exact fixture
 * suite the offline mock passes, over real HTTP. The fixture file is the
 * canonical contract shipped by the pipeline package.
 */

import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { after, before, test } from "node:test";
import type { AddressInfo } from "node:net";
import type { Server } from "node:http";

import { createService } from "../src/server.js";

interface FixtureCase {
  name: string;
  path: string;
  body: unknown;
  expect: "ok" | "error";
  checks: (string | [string, ...number[]])[];
}

const fixturesUrl = new URL("../../../src/emocause/data/wire_fixtures.json", import.meta.url);
const cases: FixtureCase[] = JSON.parse(readFileSync(fixturesUrl, "utf8")).cases;

let server: Server;
let baseUrl: string;

before(async () => {
  server = createService({
    port: 0,
    models: {
      generator: { kind: "cue-reaction" },
      embedder: { kind: "hash-encoder", dim: 64 },
      polarity: { kind: "lexicon" },
      completion: { kind: "bigram-lm" },
    },
  });
  await new Promise<void>((resolve) => server.listen(0, resolve));
  const { port } = server.address() as AddressInfo;
  baseUrl = `http://127.0.0.1:${port}`;
});

after(() => {
  server.close();
});

async function post(path: string, body: unknown): Promise<{ status: number; text: string }> {
  const response = await fetch(baseUrl + path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  return { status: response.status, text: await response.text() };
}

function checkVectorsShape(request: { texts: string[] }, body: { vectors: number[][]; dim: number }) {
  assert.ok(Number.isInteger(body.dim) && body.dim > 0);
  assert.equal(body.vectors.length, request.texts.length);
  for (const row of body.vectors) {
    assert.equal(row.length, body.dim);
    for (const x of row) {
      assert.ok(typeof x === "number" && Number.isFinite(x));
    }
  }
}

for (const fixture of cases) {
  test(`contract: ${fixture.name}`, async () => {
    const { status, text } = await post(fixture.path, fixture.body);
    const body = JSON.parse(text);
    if (fixture.expect === "ok") {
      assert.ok(status >= 200 && status < 300, `expected 2xx, got ${status}: ${text}`);
    } else {
      assert.ok(status < 200 || status >= 300, `expected non-2xx, got ${status}`);
    }
    for (const check of fixture.checks) {
      const [name, ...args] = Array.isArray(check) ? check : [check];
      switch (name) {
        case "reaction_string":
          assert.ok(typeof body.reaction === "string" && body.reaction.trim().length > 0);
          break;
        case "vectors_shape":
          checkVectorsShape(fixture.body as { texts: string[] }, body);
          break;
        case "vectors_identical":
          assert.deepEqual(body.vectors[args[0] as number], body.vectors[args[1] as number]);
          break;
        case "polarity_shape":
          assert.ok(body.label === "POSITIVE" || body.label === "NEGATIVE");
          assert.ok(typeof body.confidence === "number");
          assert.ok(body.confidence >= 0 && body.confidence <= 1);
          break;
        case "output_string":
          assert.ok(typeof body.output === "string" && body.output.length > 0);
          break;
        case "error_shape":
          assert.ok(typeof body.error === "string" && body.error.length > 0);
          break;
        case "repeat_deterministic": {
          const again = await post(fixture.path, fixture.body);
          assert.equal(again.status, status);
          assert.equal(again.text, text);
          break;
        }
        default:
          assert.fail(`unknown check ${name}`);
      }
    }
  });
}

test("startup rejects a config with missing roles", () => {
  assert.throws(
    () => createService({ port: 0, models: { generator: { kind: "cue-reaction" } } }),
    /missing|no model configured.*(embedder|polarity|completion)/s,
  );
});

test("malformed request body returns an error shape", async () => {
  const response = await fetch(`${baseUrl}/v1/generate`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: "{not json",
  });
  assert.ok(response.status >= 400);
  const body = await response.json() as { error?: string };
  assert.ok(typeof body.error === "string" && body.error.length > 0);
});
