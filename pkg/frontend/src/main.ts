import { ApiError, CurationClient } from "./api";
import { idempotencyKey, QueueStore } from "./store";
import {
  renderDuplicates,
  renderGraph,
  renderQueue,
  renderRetryBanner,
} from "./render";
import type { MergeDecision, Polarity, SessionView } from "./types";

type Screen = "candidates" | "duplicates" | "graph";

class App {
  private client = new CurationClient({ baseUrl: "" });
  private view: SessionView | null = null;
  private store: QueueStore | null = null;
  private screen: Screen = "candidates";
  private confirmedPairs = new Set<string>();
  private root: HTMLElement;
  private banner: HTMLElement;

  constructor() {
    this.root = document.getElementById("screen")!;
    this.banner = document.getElementById("banner")!;
    for (const name of ["candidates", "duplicates", "graph"] as Screen[]) {
      document.getElementById(`tab-${name}`)!.addEventListener("click", () => {
        this.screen = name;
        void this.refresh();
      });
    }
    document.addEventListener("keydown", (event) => this.onKey(event));
  }

  async start(): Promise<void> {
    try {
      const existing = window.location.hash.slice(1);
      this.view = existing
        ? await this.client.getCandidates(existing)
        : await this.client.createSession({});
      if (!existing) window.location.hash = this.view.id;
      if (this.view.state === "idle") {
        this.view = await this.client.getCandidates(this.view.id);
      }
      this.bindStore();
      await this.refresh();
    } catch (error) {
      this.showBanner(error, () => void this.start());
    }
  }

  private bindStore(): void {
    const batch = this.view?.open_batch ?? null;
    if (batch === null) {
      this.store = null;
      return;
    }
    if (this.store && this.store.batchId === batch.batch_id) return;
    if (this.store) {
      this.store.reconcile(batch);
    } else {
      this.store = new QueueStore(this.view!.id, batch);
    }
  }

  private showBanner(error: unknown, retry: () => void): void {
    const message =
      error instanceof ApiError ? error.detail : "service unreachable";
    this.banner.innerHTML = renderRetryBanner(message);
    document.getElementById("retry")!.addEventListener("click", () => {
      this.banner.innerHTML = "";
      retry();
    });
  }

  private onKey(event: KeyboardEvent): void {
    if (this.screen !== "candidates" || !this.store) return;
    const focused = document.activeElement?.closest?.(".card");
    const candidate = focused?.getAttribute("data-candidate");
    if (!candidate) return;
    if (event.key === "a") {
      this.store.decide(candidate, { decision: "accept" });
      void this.refresh();
    } else if (event.key === "r") {
      this.store.decide(candidate, { decision: "reject" });
      void this.refresh();
    }
  }

  private async refresh(): Promise<void> {
    try {
      if (this.screen === "candidates") {
        await this.renderCandidates();
      } else if (this.screen === "duplicates") {
        await this.renderDuplicatesScreen();
      } else {
        await this.renderGraphScreen();
      }
    } catch (error) {
      this.showBanner(error, () => void this.refresh());
    }
  }

  private async renderCandidates(): Promise<void> {
    if (!this.view) return;
    if (this.view.open_batch && !this.store) this.bindStore();
    this.root.innerHTML = renderQueue(
      this.view,
      this.store ?? new QueueStore(this.view.id, {
        batch_id: "none", iteration: 0, phase: "", kind: "variable",
        status: "open", items: [],
      }),
    );
    this.wireQueueHandlers();
  }

  private wireQueueHandlers(): void {
    const store = this.store;
    if (!store) return;
    this.root.querySelectorAll("button.accept").forEach((button) =>
      button.addEventListener("click", () => {
        const candidate = button.getAttribute("data-candidate")!;
        const polarity = this.polarityFor(candidate);
        store.decide(candidate, { decision: "accept", ...(polarity && { polarity }) });
        void this.refresh();
      }),
    );
    this.root.querySelectorAll("button.reject").forEach((button) =>
      button.addEventListener("click", () => {
        store.decide(button.getAttribute("data-candidate")!, { decision: "reject" });
        void this.refresh();
      }),
    );
    this.root.querySelectorAll("select.polarity").forEach((select) =>
      select.addEventListener("change", () => {
        const candidate = select.getAttribute("data-candidate")!;
        const pending = store.decisionFor(candidate);
        const polarity = (select as HTMLSelectElement).value as Polarity | "";
        if (pending && polarity) {
          store.decide(candidate, { ...pending, polarity });
          void this.refresh();
        }
      }),
    );
    const submit = document.getElementById("submit");
    submit?.addEventListener("click", () => void this.submit());
  }

  private polarityFor(candidate: string): Polarity | undefined {
    const select = this.root.querySelector(
      `select.polarity[data-candidate="${CSS.escape(candidate)}"]`,
    ) as HTMLSelectElement | null;
    return (select?.value || undefined) as Polarity | undefined;
  }

  private async submit(): Promise<void> {
    const store = this.store;
    const view = this.view;
    if (!view || !store || !store.canSubmit()) return;
    const key = idempotencyKey(view.id, store.batchId);
    try {
      this.view = await this.client.submitLabels(
        view.id,
        store.batchId,
        store.toDecisions(),
        key,
      );
      store.acknowledge();
      this.store = null;
      this.bindStore();
      await this.refresh();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // conflicting submission: reload the queue, keep local decisions
        this.view = await this.client.getCandidates(view.id);
        if (this.view.open_batch) store.reconcile(this.view.open_batch);
        await this.refresh();
        return;
      }
      this.showBanner(error, () => void this.submit());
    }
  }

  private async renderDuplicatesScreen(): Promise<void> {
    const { proposals } = await this.client.corefProposals();
    this.root.innerHTML = renderDuplicates(proposals, this.confirmedPairs);
    this.root.querySelectorAll("button.confirm").forEach((button) =>
      button.addEventListener("click", () => void this.confirmPair(button, true)),
    );
    this.root.querySelectorAll("button.distinct").forEach((button) =>
      button.addEventListener("click", () => void this.confirmPair(button, false)),
    );
  }

  private async confirmPair(button: Element, confirm: boolean): Promise<void> {
    const key = button.getAttribute("data-pair")!;
    const [a, b] = key.split("||");
    const input = this.root.querySelector(
      `input.canonical[data-pair="${CSS.escape(key)}"]`,
    ) as HTMLInputElement | null;
    const decision: MergeDecision = {
      a,
      b,
      confirm,
      canonical: input?.value || null,
    };
    await this.client.submitCorefDecisions([decision]);
    if (confirm) this.confirmedPairs.add(key);
    await this.refresh();
  }

  private async renderGraphScreen(): Promise<void> {
    const params = new URLSearchParams(window.location.search);
    const center = params.get("center") ?? undefined;
    const hops = Number(params.get("hops") ?? "2");
    const payload = await this.client.graph(center, hops);
    this.root.innerHTML = renderGraph(payload);
  }
}

if (typeof document !== "undefined" && document.getElementById("screen")) {
  const app = new App();
  void app.start();
}

export { App };
