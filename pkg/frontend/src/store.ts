import type {
  CandidateBatch,
  DecisionChoice,
  LabelDecision,
  Polarity,
} from "./types";

/** Minimal slice of the Web Storage interface, injectable for tests. */
export interface KeyValueStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStorage implements KeyValueStorage {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

export interface PendingDecision {
  decision: DecisionChoice;
  polarity?: Polarity;
  canonical_name?: string;
}

interface PersistedState {
  batchId: string;
  decisions: Record<string, PendingDecision>;
}

/**
 * Local buffer of the editor's decisions for one candidate queue.
 *
 * Decisions live in browser storage until the server acknowledges them, so a
 * network blip, a page refresh or a 409 conflict never destroys work. The
 * server stays the source of truth for the queue itself.
 */
export class QueueStore {
  private decisions = new Map<string, PendingDecision>();
  private batch: CandidateBatch;
  private storage: KeyValueStorage;
  private sessionId: string;

  constructor(
    sessionId: string,
    batch: CandidateBatch,
    storage?: KeyValueStorage,
  ) {
    this.sessionId = sessionId;
    this.batch = batch;
    this.storage =
      storage ??
      (typeof localStorage !== "undefined" ? localStorage : new MemoryStorage());
    this.restore();
  }

  private storageKey(): string {
    return `econkg:decisions:${this.sessionId}`;
  }

  private restore(): void {
    const raw = this.storage.getItem(this.storageKey());
    if (!raw) return;
    try {
      const saved = JSON.parse(raw) as PersistedState;
      const inBatch = new Set(this.batch.items.map((i) => i.text));
      for (const [candidate, pending] of Object.entries(saved.decisions)) {
        if (inBatch.has(candidate)) this.decisions.set(candidate, pending);
      }
    } catch {
      this.storage.removeItem(this.storageKey());
    }
  }

  private persist(): void {
    const state: PersistedState = {
      batchId: this.batch.batch_id,
      decisions: Object.fromEntries(this.decisions),
    };
    this.storage.setItem(this.storageKey(), JSON.stringify(state));
  }

  get batchId(): string {
    return this.batch.batch_id;
  }

  get items() {
    return this.batch.items;
  }

  decisionFor(candidate: string): PendingDecision | undefined {
    return this.decisions.get(candidate);
  }

  decide(candidate: string, pending: PendingDecision): void {
    if (!this.batch.items.some((i) => i.text === candidate)) {
      throw new Error(`unknown candidate: ${candidate}`);
    }
    this.decisions.set(candidate, pending);
    this.persist();
  }

  undecide(candidate: string): void {
    this.decisions.delete(candidate);
    this.persist();
  }

  allDecided(): boolean {
    return this.batch.items.every((i) => this.decisions.has(i.text));
  }

  /** Per-candidate validation messages; submission requires an empty map. */
  validationErrors(): Map<string, string> {
    const errors = new Map<string, string>();
    for (const item of this.batch.items) {
      const pending = this.decisions.get(item.text);
      if (!pending) {
        errors.set(item.text, "decision required");
        continue;
      }
      if (
        this.batch.kind === "relation" &&
        pending.decision === "accept" &&
        !pending.polarity
      ) {
        errors.set(item.text, "accepted relations need a polarity");
      }
    }
    return errors;
  }

  canSubmit(): boolean {
    return this.validationErrors().size === 0;
  }

  toDecisions(): LabelDecision[] {
    return this.batch.items.map((item) => {
      const pending = this.decisions.get(item.text);
      if (!pending) throw new Error(`undecided candidate: ${item.text}`);
      return {
        candidate: item.text,
        kind: this.batch.kind,
        decision: pending.decision,
        polarity: pending.polarity ?? null,
        canonical_name: pending.canonical_name ?? null,
      };
    });
  }

  /**
   * Rebind to a freshly fetched queue after a conflict (stale batch id).
   * Decisions for candidates still present carry over; the rest stay in
   * storage untouched until acknowledged or superseded.
   */
  reconcile(batch: CandidateBatch): void {
    this.batch = batch;
    const inBatch = new Set(batch.items.map((i) => i.text));
    const kept = new Map<string, PendingDecision>();
    for (const [candidate, pending] of this.decisions) {
      if (inBatch.has(candidate)) kept.set(candidate, pending);
    }
    this.decisions = kept;
    this.persist();
  }

  /** Drop the buffer once the server acknowledged the submission. */
  acknowledge(): void {
    this.decisions.clear();
    this.storage.removeItem(this.storageKey());
  }

  pendingCount(): number {
    return this.decisions.size;
  }
}

/** Deterministic-enough idempotency key for one submission attempt. */
export function idempotencyKey(sessionId: string, batchId: string): string {
  return `${sessionId}:${batchId}`;
}
