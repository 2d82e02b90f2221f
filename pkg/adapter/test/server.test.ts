/** Tests for the policy adapter: session semantics in-process, then the
 * compiled entry point end to end over stdio and TCP. */

import { test } from "node:test";
import assert from "node:assert/strict";
import { spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import * as net from "node:net";
import { tmpdir } from "node:os";
import * as path from "node:path";
import process from "node:process";

import { RPC_SCHEMA } from "../dist/protocol";
import {
  describeFactorizationMismatch,
  policyTableFromDoc,
} from "../dist/table";
import { Session } from "../dist/server";

const MAIN_JS = path.join(__dirname, "..", "dist", "main.js");

const FACTORIZATION = {
  schema: "stache-factorization/1",
  factors: [
    { name: "x", kind: "numerical", lo: 0, hi: 2 },
    { name: "c", kind: "categorical", values: ["a", "b"] },
  ],
};

// Six states; action x when c is "a", otherwise 2 - x.
function tableDoc(): Record<string, unknown> {
  const entries: unknown[] = [];
  for (let x = 0; x <= 2; x++) {
    for (const c of ["a", "b"]) {
      entries.push([[x, c], c === "a" ? x : 2 - x]);
    }
  }
  return {
    schema: "stache-policy/1",
    factorization: FACTORIZATION,
    metadata: { name: "toy" },
    entries,
  };
}

function clone<T>(doc: T): T {
  return JSON.parse(JSON.stringify(doc));
}

function freshSession(): Session {
  return new Session(policyTableFromDoc(tableDoc()));
}

function send(session: Session, msg: unknown): Record<string, unknown> {
  const line = session.handleLine(JSON.stringify(msg));
  assert.notEqual(line, null);
  return JSON.parse(line as string);
}

function hello(session: Session): Record<string, unknown> {
  return send(session, {
    type: "hello",
    schema: RPC_SCHEMA,
    factorization: FACTORIZATION,
  });
}

test("handshake succeeds and act answers from the table", () => {
  const session = freshSession();
  assert.deepEqual(hello(session), { type: "ready" });
  const resp = send(session, { id: 1, type: "act", state: { x: 1, c: "b" } });
  assert.deepEqual(resp, { id: 1, action: 1 });
});

test("mismatched factorization is refused and the mismatch is named", () => {
  const session = freshSession();
  const altered = clone(FACTORIZATION);
  (altered.factors[1] as { values: string[] }).values = ["a", "z"];
  const resp = send(session, {
    type: "hello",
    schema: RPC_SCHEMA,
    factorization: altered,
  });
  assert.equal(resp.type, "error");
  assert.match(String(resp.error), /mismatch/);
  assert.match(String(resp.error), /"c"/);
  // A refused handshake must not unlock act requests.
  const denied = send(session, { id: 1, type: "act", state: { x: 0, c: "a" } });
  assert.match(String(denied.error), /handshake/);
});

test("wrong rpc schema string is refused", () => {
  const session = freshSession();
  const resp = send(session, {
    type: "hello",
    schema: "other-rpc/9",
    factorization: FACTORIZATION,
  });
  assert.equal(resp.type, "error");
  assert.match(String(resp.error), /schema/);
});

test("act_batch answers align with request order", () => {
  const session = freshSession();
  hello(session);
  const resp = send(session, {
    id: 7,
    type: "act_batch",
    states: [
      { x: 2, c: "a" },
      { x: 0, c: "a" },
      { x: 1, c: "b" },
    ],
  });
  assert.deepEqual(resp, { id: 7, actions: [2, 0, 1] });
});

test("states outside the table yield unknown_state", () => {
  const session = freshSession();
  hello(session);
  assert.deepEqual(
    send(session, { id: 1, type: "act", state: { x: 9, c: "a" } }),
    { id: 1, error: "unknown_state" },
  );
  assert.deepEqual(
    send(session, { id: 2, type: "act", state: { x: 1 } }),
    { id: 2, error: "unknown_state" },
  );
  assert.deepEqual(
    send(session, {
      id: 3,
      type: "act_batch",
      states: [{ x: 0, c: "a" }, { x: 0, c: "q" }],
    }),
    { id: 3, error: "unknown_state" },
  );
});

test("malformed lines answer an error and leave the session alive", () => {
  const session = freshSession();
  hello(session);
  const bad = session.handleLine("{not json");
  assert.match(String(JSON.parse(bad as string).error), /malformed/);
  const noState = send(session, { id: 4, type: "act" });
  assert.match(String(noState.error), /state/);
  const noId = send(session, { type: "act", state: { x: 0, c: "a" } });
  assert.match(String(noId.error), /id/);
  const unknownType = send(session, { id: 5, type: "quit" });
  assert.match(String(unknownType.error), /unknown request type/);
  // The session still serves after every malformed request above.
  assert.deepEqual(
    send(session, { id: 6, type: "act", state: { x: 0, c: "a" } }),
    { id: 6, action: 0 },
  );
});

test("blank lines produce no response", () => {
  const session = freshSession();
  assert.equal(session.handleLine(""), null);
  assert.equal(session.handleLine("   "), null);
});

test("native id table entries decode by mixed radix", () => {
  const doc = tableDoc();
  // Entries were pushed in lexicographic order, so the position is the id.
  doc.entries = (doc.entries as [unknown, number][]).map(
    (entry, i) => [i, entry[1]],
  );
  const table = policyTableFromDoc(doc);
  assert.equal(table.size, 6);
  assert.equal(table.lookup({ x: 1, c: "b" }), 1);
  assert.equal(table.lookup({ x: 2, c: "a" }), 2);
});

test("conflicting duplicate entries are rejected at load", () => {
  const doc = tableDoc();
  (doc.entries as unknown[]).push([[0, "a"], 2]);
  assert.throws(() => policyTableFromDoc(doc), /conflicting/);
});

test("a non-policy document is rejected", () => {
  assert.throws(
    () => policyTableFromDoc({ ...tableDoc(), schema: "nope/1" }),
    /stache-policy\/1/,
  );
});

test("factorization comparison pinpoints the first difference", () => {
  const mine = policyTableFromDoc(tableDoc()).factorization;
  assert.equal(describeFactorizationMismatch(mine, clone(mine)), null);
  const fewer = clone(mine);
  fewer.factors.pop();
  assert.match(String(describeFactorizationMismatch(mine, fewer)), /factors/);
  const bounds = clone(mine);
  (bounds.factors[0] as { hi: number }).hi = 3;
  const msg = describeFactorizationMismatch(mine, bounds);
  assert.match(String(msg), /bounds/);
  assert.match(String(msg), /"x"/);
  const renamed = clone(mine);
  renamed.factors[0].name = "y";
  assert.match(String(describeFactorizationMismatch(mine, renamed)), /named/);
});

function writeTable(): string {
  const dir = mkdtempSync(path.join(tmpdir(), "adapter-test-"));
  const tablePath = path.join(dir, "table.json");
  writeFileSync(tablePath, JSON.stringify(tableDoc()));
  return tablePath;
}

function collectLines(stream: NodeJS.ReadableStream, n: number): Promise<string[]> {
  return new Promise((resolve, reject) => {
    const lines: string[] = [];
    let buf = "";
    stream.on("data", (chunk: Buffer | string) => {
      buf += chunk.toString();
      let cut;
      while ((cut = buf.indexOf("\n")) >= 0) {
        lines.push(buf.slice(0, cut));
        buf = buf.slice(cut + 1);
        if (lines.length === n) {
          resolve(lines);
          return;
        }
      }
    });
    stream.on("error", reject);
    stream.on("end", () => reject(new Error("stream ended early")));
  });
}

test("stdio round trip answers in order and exits cleanly", async () => {
  const child = spawn(process.execPath, [MAIN_JS, "--table", writeTable()]);
  const requests = [
    { type: "hello", schema: RPC_SCHEMA, factorization: FACTORIZATION },
    { id: 1, type: "act", state: { x: 2, c: "a" } },
    { id: 2, type: "act_batch", states: [{ x: 0, c: "a" }, { x: 0, c: "b" }] },
  ];
  const replies = collectLines(child.stdout, 3);
  child.stdin.write(requests.map((r) => JSON.stringify(r)).join("\n") + "\n");
  const lines = (await replies).map((line) => JSON.parse(line));
  child.stdin.end();
  const code = await new Promise<number | null>((resolve) =>
    child.on("close", (c) => resolve(c)),
  );
  assert.equal(code, 0);
  assert.deepEqual(lines, [
    { type: "ready" },
    { id: 1, action: 2 },
    { id: 2, actions: [0, 2] },
  ]);
});

test("a missing table file fails fast with a message", async () => {
  const child = spawn(process.execPath, [MAIN_JS, "--table", "/no/such/table.json"]);
  const errs: string[] = [];
  child.stderr.on("data", (chunk) => errs.push(chunk.toString()));
  const code = await new Promise<number | null>((resolve) =>
    child.on("close", (c) => resolve(c)),
  );
  assert.equal(code, 1);
  assert.match(errs.join(""), /cannot read/);
});

test("tcp mode serves a connection on the reported port", async () => {
  const child = spawn(process.execPath, [
    MAIN_JS, "--table", writeTable(), "--tcp", "0",
  ]);
  const port = await new Promise<number>((resolve, reject) => {
    let buf = "";
    child.stderr.on("data", (chunk) => {
      buf += chunk.toString();
      const m = buf.match(/listening on 127\.0\.0\.1:(\d+)/);
      if (m) resolve(Number(m[1]));
    });
    child.on("close", () => reject(new Error("adapter exited before listening")));
  });
  const socket = net.connect(port, "127.0.0.1");
  await new Promise((resolve) => socket.on("connect", resolve));
  const replies = collectLines(socket, 2);
  socket.write(
    JSON.stringify({ type: "hello", schema: RPC_SCHEMA, factorization: FACTORIZATION }) +
      "\n" +
      JSON.stringify({ id: 1, type: "act", state: { x: 1, c: "a" } }) +
      "\n",
  );
  const lines = (await replies).map((line) => JSON.parse(line));
  assert.deepEqual(lines, [{ type: "ready" }, { id: 1, action: 1 }]);
  socket.destroy();
  child.kill();
  await new Promise((resolve) => child.on("close", resolve));
});
