/**
 * Request handling for one protocol session.
 *
 * A session is a stateful line-in, line-out loop: the factorization handshake
 * must succeed before any act request is answered.  Malformed input produces
 * an error response and leaves the session usable; nothing here terminates
 * the connection.
 */

import { RPC_SCHEMA, isRecord } from "./protocol";
import { PolicyTable, describeFactorizationMismatch } from "./table";

function errorLine(id: number | undefined, message: string): string {
  if (id === undefined) {
    return JSON.stringify({ error: message });
  }
  return JSON.stringify({ id, error: message });
}

export class Session {
  private ready = false;

  constructor(private readonly table: PolicyTable) {}

  /** Response line for one request line, or null when the line is blank. */
  handleLine(line: string): string | null {
    if (line.trim() === "") return null;
    let msg: unknown;
    try {
      msg = JSON.parse(line);
    } catch {
      return errorLine(undefined, "malformed request: not valid JSON");
    }
    if (!isRecord(msg)) {
      return errorLine(undefined, "malformed request: expected an object");
    }
    const id = typeof msg.id === "number" ? msg.id : undefined;
    switch (msg.type) {
      case "hello":
        return this.handleHello(msg);
      case "act":
        return this.handleAct(id, msg);
      case "act_batch":
        return this.handleActBatch(id, msg);
      default:
        return errorLine(id, `unknown request type ${JSON.stringify(msg.type)}`);
    }
  }

  private handleHello(msg: Record<string, unknown>): string {
    if (msg.schema !== RPC_SCHEMA) {
      return JSON.stringify({
        type: "error",
        error:
          `unsupported schema ${JSON.stringify(msg.schema)}, ` +
          `this endpoint speaks ${RPC_SCHEMA}`,
      });
    }
    const mismatch = describeFactorizationMismatch(
      this.table.factorization,
      msg.factorization,
    );
    if (mismatch !== null) {
      return JSON.stringify({ type: "error", error: mismatch });
    }
    this.ready = true;
    return JSON.stringify({ type: "ready" });
  }

  private checkActPreamble(id: number | undefined): string | null {
    if (id === undefined) {
      return errorLine(undefined, "malformed request: missing numeric id");
    }
    if (!this.ready) {
      return errorLine(id, "handshake required before act requests");
    }
    return null;
  }

  private handleAct(id: number | undefined, msg: Record<string, unknown>): string {
    const failed = this.checkActPreamble(id);
    if (failed !== null) return failed;
    if (!isRecord(msg.state)) {
      return errorLine(id, "malformed request: state must be an object");
    }
    const action = this.table.lookup(msg.state);
    if (action === undefined) {
      return errorLine(id, "unknown_state");
    }
    return JSON.stringify({ id, action });
  }

  private handleActBatch(
    id: number | undefined,
    msg: Record<string, unknown>,
  ): string {
    const failed = this.checkActPreamble(id);
    if (failed !== null) return failed;
    if (!Array.isArray(msg.states)) {
      return errorLine(id, "malformed request: states must be an array");
    }
    const actions: number[] = [];
    for (const state of msg.states) {
      const action = isRecord(state) ? this.table.lookup(state) : undefined;
      if (action === undefined) {
        return errorLine(id, "unknown_state");
      }
      actions.push(action);
    }
    return JSON.stringify({ id, actions });
  }
}
