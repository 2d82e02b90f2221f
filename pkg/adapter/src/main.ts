/**
 * Policy adapter entry point.
 *
 * Serves a stache-policy/1 table over the stache-policy-rpc/1 JSON-lines
 * protocol.  By default requests arrive on stdin and responses leave on
 * stdout; with --tcp the same loop runs per connection on a local socket.
 */

import * as net from "node:net";
import * as readline from "node:readline";
import { stdin, stdout, stderr, exit, argv } from "node:process";
import { parseArgs } from "node:util";
import { PolicyTable, loadPolicyTable } from "./table";
import { Session } from "./server";

const USAGE = "usage: main.js --table PATH [--tcp PORT]";

function serveStdio(table: PolicyTable): void {
  const session = new Session(table);
  const lines = readline.createInterface({ input: stdin, terminal: false });
  lines.on("line", (line) => {
    const response = session.handleLine(line);
    if (response !== null) stdout.write(response + "\n");
  });
  lines.on("close", () => exit(0));
}

function serveTcp(table: PolicyTable, port: number): void {
  const server = net.createServer((socket) => {
    const session = new Session(table);
    const lines = readline.createInterface({ input: socket, terminal: false });
    lines.on("line", (line) => {
      const response = session.handleLine(line);
      if (response !== null && socket.writable) socket.write(response + "\n");
    });
    socket.on("error", () => socket.destroy());
  });
  server.listen(port, "127.0.0.1", () => {
    const address = server.address() as net.AddressInfo;
    // Port 0 asks the OS for a free port; report the one actually bound.
    stderr.write(`listening on 127.0.0.1:${address.port}\n`);
  });
}

function main(): void {
  let values: { table?: string; tcp?: string };
  try {
    ({ values } = parseArgs({
      args: argv.slice(2),
      options: {
        table: { type: "string" },
        tcp: { type: "string" },
      },
    }));
  } catch (err) {
    stderr.write(`error: ${err instanceof Error ? err.message : err}\n${USAGE}\n`);
    exit(2);
    return;
  }
  if (values.table === undefined) {
    stderr.write(`error: --table is required\n${USAGE}\n`);
    exit(2);
    return;
  }
  let table: PolicyTable;
  try {
    table = loadPolicyTable(values.table);
  } catch (err) {
    stderr.write(`error: ${err instanceof Error ? err.message : err}\n`);
    exit(1);
    return;
  }
  if (values.tcp !== undefined) {
    const port = Number(values.tcp);
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      stderr.write(`error: bad port ${JSON.stringify(values.tcp)}\n`);
      exit(2);
      return;
    }
    serveTcp(table, port);
  } else {
    serveStdio(table);
  }
}

main();
