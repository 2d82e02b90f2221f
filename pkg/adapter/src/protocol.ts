/**
 * Message shapes for the stache-policy-rpc/1 JSON-lines protocol.
 *
 * One request per line, one response per line.  The client opens with a
 * `hello` carrying its factorization; the server answers `ready` only when
 * that factorization matches the one behind the policy being served.
 */

export const RPC_SCHEMA = "stache-policy-rpc/1";
export const FACTORIZATION_SCHEMA = "stache-factorization/1";
export const POLICY_SCHEMA = "stache-policy/1";

export type FactorValue = number | string;

export interface NumericalFactorDoc {
  name: string;
  kind: "numerical";
  lo: number;
  hi: number;
}

export interface CategoricalFactorDoc {
  name: string;
  kind: "categorical";
  values: FactorValue[];
}

export type FactorDoc = NumericalFactorDoc | CategoricalFactorDoc;

export interface FactorizationDoc {
  schema: string;
  factors: FactorDoc[];
}

export interface HelloRequest {
  type: "hello";
  schema: string;
  factorization: FactorizationDoc;
}

export interface ActRequest {
  id: number;
  type: "act";
  state: Record<string, FactorValue>;
}

export interface ActBatchRequest {
  id: number;
  type: "act_batch";
  states: Record<string, FactorValue>[];
}

export interface ReadyResponse {
  type: "ready";
}

export interface ActResponse {
  id: number;
  action: number;
}

export interface ActBatchResponse {
  id: number;
  actions: number[];
}

export interface ErrorResponse {
  id?: number;
  type?: "error";
  error: string;
}

export function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

export function isFactorValue(v: unknown): v is FactorValue {
  return typeof v === "string" || (typeof v === "number" && Number.isFinite(v));
}

export function isFactorDoc(v: unknown): v is FactorDoc {
  if (!isRecord(v) || typeof v.name !== "string") return false;
  if (v.kind === "numerical") {
    return Number.isInteger(v.lo) && Number.isInteger(v.hi);
  }
  if (v.kind === "categorical") {
    return Array.isArray(v.values) && v.values.every(isFactorValue);
  }
  return false;
}

export function isFactorizationDoc(v: unknown): v is FactorizationDoc {
  return (
    isRecord(v) &&
    typeof v.schema === "string" &&
    Array.isArray(v.factors) &&
    v.factors.every(isFactorDoc)
  );
}
