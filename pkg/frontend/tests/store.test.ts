import { describe, expect, it } from "vitest";

import { idempotencyKey, MemoryStorage, QueueStore } from "../src/store";
import type { CandidateBatch } from "../src/types";

function makeBatch(
  texts: string[],
  kind: "variable" | "relation" = "variable",
  batchId = "b00001",
): CandidateBatch {
  return {
    batch_id: batchId,
    iteration: 1,
    phase: kind === "variable" ? "variables-global" : "relations",
    kind,
    status: "open",
    items: texts.map((text, i) => ({
      text,
      confidence: 0.9 - i * 0.1,
      examples: [{ doc: "d", sent: i, text: `the ${text} moved` }],
    })),
  };
}

describe("QueueStore", () => {
  it("tracks decisions and completeness", () => {
    const store = new QueueStore("s1", makeBatch(["a", "b"]), new MemoryStorage());
    expect(store.allDecided()).toBe(false);
    store.decide("a", { decision: "accept" });
    expect(store.allDecided()).toBe(false);
    store.decide("b", { decision: "reject" });
    expect(store.allDecided()).toBe(true);
    expect(store.canSubmit()).toBe(true);
  });

  it("rejects decisions for unknown candidates", () => {
    const store = new QueueStore("s1", makeBatch(["a"]), new MemoryStorage());
    expect(() => store.decide("zz", { decision: "accept" })).toThrow(/unknown/);
  });

  it("requires polarity on accepted relations", () => {
    const store = new QueueStore(
      "s1",
      makeBatch(["push up"], "relation"),
      new MemoryStorage(),
    );
    store.decide("push up", { decision: "accept" });
    expect(store.canSubmit()).toBe(false);
    expect(store.validationErrors().get("push up")).toMatch(/polarity/);
    store.decide("push up", { decision: "accept", polarity: "increase" });
    expect(store.canSubmit()).toBe(true);
  });

  it("rejected relations need no polarity", () => {
    const store = new QueueStore(
      "s1",
      makeBatch(["push up"], "relation"),
      new MemoryStorage(),
    );
    store.decide("push up", { decision: "reject" });
    expect(store.canSubmit()).toBe(true);
  });

  it("serializes decisions in batch order with nulls filled", () => {
    const store = new QueueStore("s1", makeBatch(["a", "b"]), new MemoryStorage());
    store.decide("b", { decision: "reject" });
    store.decide("a", { decision: "accept" });
    expect(store.toDecisions()).toEqual([
      { candidate: "a", kind: "variable", decision: "accept",
        polarity: null, canonical_name: null },
      { candidate: "b", kind: "variable", decision: "reject",
        polarity: null, canonical_name: null },
    ]);
  });

  it("persists decisions across instances until acknowledged", () => {
    const storage = new MemoryStorage();
    const first = new QueueStore("s1", makeBatch(["a", "b"]), storage);
    first.decide("a", { decision: "accept" });

    const reloaded = new QueueStore("s1", makeBatch(["a", "b"]), storage);
    expect(reloaded.decisionFor("a")).toEqual({ decision: "accept" });
    expect(reloaded.pendingCount()).toBe(1);

    reloaded.acknowledge();
    const afterAck = new QueueStore("s1", makeBatch(["a", "b"]), storage);
    expect(afterAck.pendingCount()).toBe(0);
  });

  it("reconcile keeps decisions still present in the reloaded queue", () => {
    const storage = new MemoryStorage();
    const store = new QueueStore("s1", makeBatch(["a", "b", "c"]), storage);
    store.decide("a", { decision: "accept" });
    store.decide("b", { decision: "reject" });
    store.decide("c", { decision: "reject" });

    store.reconcile(makeBatch(["b", "c", "d"], "variable", "b00002"));
    expect(store.batchId).toBe("b00002");
    expect(store.decisionFor("a")).toBeUndefined();
    expect(store.decisionFor("b")).toEqual({ decision: "reject" });
    expect(store.decisionFor("c")).toEqual({ decision: "reject" });
    expect(store.allDecided()).toBe(false); // "d" still undecided
  });

  it("undecide reopens a candidate", () => {
    const store = new QueueStore("s1", makeBatch(["a"]), new MemoryStorage());
    store.decide("a", { decision: "accept" });
    store.undecide("a");
    expect(store.allDecided()).toBe(false);
  });

  it("idempotency key is stable per (session, batch)", () => {
    expect(idempotencyKey("s1", "b00001")).toBe(idempotencyKey("s1", "b00001"));
    expect(idempotencyKey("s1", "b00001")).not.toBe(idempotencyKey("s1", "b00002"));
  });
});
