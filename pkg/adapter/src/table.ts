/**
 * Loader for stache-policy/1 tables.
 *
 * A table maps every listed state of a factored space to one integer action.
 * Entries may spell out the factor values or give the state's native id, the
 * mixed-radix rank of the value tuple in factor order.
 */

import { readFileSync } from "node:fs";
import {
  FACTORIZATION_SCHEMA,
  POLICY_SCHEMA,
  FactorDoc,
  FactorValue,
  FactorizationDoc,
  isFactorizationDoc,
  isRecord,
} from "./protocol";

function domainOf(factor: FactorDoc): FactorValue[] {
  if (factor.kind === "numerical") {
    const out: number[] = [];
    for (let v = factor.lo; v <= factor.hi; v++) out.push(v);
    return out;
  }
  return [...factor.values];
}

function inDomain(factor: FactorDoc, value: unknown): boolean {
  if (factor.kind === "numerical") {
    return (
      typeof value === "number" &&
      Number.isInteger(value) &&
      value >= factor.lo &&
      value <= factor.hi
    );
  }
  return factor.values.some((w) => w === value);
}

function stateFromIndex(factors: FactorDoc[], index: number): FactorValue[] {
  const domains = factors.map(domainOf);
  const total = domains.reduce((n, d) => n * d.length, 1);
  if (!Number.isInteger(index) || index < 0 || index >= total) {
    throw new Error(`native state id ${index} out of range`);
  }
  const values: FactorValue[] = new Array(factors.length);
  let rest = index;
  for (let j = factors.length - 1; j >= 0; j--) {
    const domain = domains[j];
    values[j] = domain[rest % domain.length];
    rest = Math.floor(rest / domain.length);
  }
  return values;
}

export class PolicyTable {
  readonly factorization: FactorizationDoc;
  readonly metadata: Record<string, unknown>;
  private readonly actions: Map<string, number>;

  constructor(
    factorization: FactorizationDoc,
    actions: Map<string, number>,
    metadata: Record<string, unknown>,
  ) {
    this.factorization = factorization;
    this.actions = actions;
    this.metadata = metadata;
  }

  get size(): number {
    return this.actions.size;
  }

  /** Action for a state given as a name-to-value object, or undefined
   * when the state is outside the table. */
  lookup(state: Record<string, unknown>): number | undefined {
    const values: FactorValue[] = [];
    for (const factor of this.factorization.factors) {
      const v = state[factor.name];
      if (!inDomain(factor, v)) return undefined;
      values.push(v as FactorValue);
    }
    return this.actions.get(JSON.stringify(values));
  }
}

export function policyTableFromDoc(doc: unknown): PolicyTable {
  if (!isRecord(doc) || doc.schema !== POLICY_SCHEMA) {
    throw new Error(`expected a ${POLICY_SCHEMA} document`);
  }
  if (!isFactorizationDoc(doc.factorization)) {
    throw new Error("policy table has no valid factorization");
  }
  const factorization = doc.factorization;
  if (factorization.schema !== FACTORIZATION_SCHEMA) {
    throw new Error(
      `unexpected factorization schema ${JSON.stringify(factorization.schema)}`,
    );
  }
  if (!Array.isArray(doc.entries)) {
    throw new Error("policy table has no entries array");
  }
  const factors = factorization.factors;
  const actions = new Map<string, number>();
  for (const entry of doc.entries) {
    if (!Array.isArray(entry) || entry.length !== 2) {
      throw new Error(`bad table entry ${JSON.stringify(entry)}`);
    }
    const [key, action] = entry;
    if (!Number.isInteger(action) || (action as number) < 0) {
      throw new Error(`bad action ${JSON.stringify(action)} in table entry`);
    }
    let values: FactorValue[];
    if (typeof key === "number") {
      values = stateFromIndex(factors, key);
    } else if (Array.isArray(key) && key.length === factors.length) {
      factors.forEach((factor, j) => {
        if (!inDomain(factor, key[j])) {
          throw new Error(
            `value ${JSON.stringify(key[j])} outside domain of factor ` +
              JSON.stringify(factor.name),
          );
        }
      });
      values = key as FactorValue[];
    } else {
      throw new Error(`bad table key ${JSON.stringify(key)}`);
    }
    const mapKey = JSON.stringify(values);
    const prev = actions.get(mapKey);
    if (prev !== undefined && prev !== action) {
      throw new Error(`conflicting table entries for state ${mapKey}`);
    }
    actions.set(mapKey, action as number);
  }
  const metadata = isRecord(doc.metadata) ? doc.metadata : {};
  return new PolicyTable(factorization, actions, metadata);
}

export function loadPolicyTable(path: string): PolicyTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read policy table ${path}: ${String(err)}`);
  }
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new Error(`policy table ${path} is not valid JSON`);
  }
  return policyTableFromDoc(doc);
}

/** Human-readable description of the first difference between the served
 * factorization and the one a client announced, or null when they agree. */
export function describeFactorizationMismatch(
  mine: FactorizationDoc,
  theirs: unknown,
): string | null {
  if (!isFactorizationDoc(theirs)) {
    return "factorization mismatch: client sent no valid factorization";
  }
  if (theirs.schema !== mine.schema) {
    return (
      `factorization mismatch: schema ${JSON.stringify(theirs.schema)}, ` +
      `expected ${JSON.stringify(mine.schema)}`
    );
  }
  if (theirs.factors.length !== mine.factors.length) {
    return (
      `factorization mismatch: ${theirs.factors.length} factors, ` +
      `expected ${mine.factors.length}`
    );
  }
  for (let j = 0; j < mine.factors.length; j++) {
    const a = mine.factors[j];
    const b = theirs.factors[j];
    if (a.name !== b.name) {
      return (
        `factorization mismatch: factor ${j} is named ` +
        `${JSON.stringify(b.name)}, expected ${JSON.stringify(a.name)}`
      );
    }
    if (a.kind !== b.kind) {
      return (
        `factorization mismatch: factor ${JSON.stringify(a.name)} has kind ` +
        `${JSON.stringify(b.kind)}, expected ${JSON.stringify(a.kind)}`
      );
    }
    if (a.kind === "numerical" && b.kind === "numerical") {
      if (a.lo !== b.lo || a.hi !== b.hi) {
        return (
          `factorization mismatch: factor ${JSON.stringify(a.name)} has ` +
          `bounds ${b.lo}..${b.hi}, expected ${a.lo}..${a.hi}`
        );
      }
    }
    if (a.kind === "categorical" && b.kind === "categorical") {
      const mineValues = JSON.stringify(a.values);
      if (JSON.stringify(b.values) !== mineValues) {
        return (
          `factorization mismatch: factor ${JSON.stringify(a.name)} has ` +
          `values ${JSON.stringify(b.values)}, expected ${mineValues}`
        );
      }
    }
  }
  return null;
}
