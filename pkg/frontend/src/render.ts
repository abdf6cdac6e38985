import type {
  CandidateItem,
  DuplicateProposal,
  GraphPayload,
  Polarity,
  SessionView,
} from "./types";
import type { QueueStore } from "./store";

const POLARITY_COLORS: Record<Polarity, string> = {
  increase: "#1a7f37",
  decrease: "#c0392b",
  neutral: "#6b7280",
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Wrap every case-insensitive occurrence of the candidate in <mark>. */
export function highlightCandidate(sentence: string, candidate: string): string {
  if (!candidate) return escapeHtml(sentence);
  const lower = sentence.toLowerCase();
  const needle = candidate.toLowerCase();
  let cursor = 0;
  let html = "";
  while (cursor < sentence.length) {
    const hit = lower.indexOf(needle, cursor);
    if (hit < 0) {
      html += escapeHtml(sentence.slice(cursor));
      break;
    }
    html += escapeHtml(sentence.slice(cursor, hit));
    html += `<mark>${escapeHtml(sentence.slice(hit, hit + candidate.length))}</mark>`;
    cursor = hit + candidate.length;
  }
  return html;
}

function candidateCard(item: CandidateItem, store: QueueStore, kind: string): string {
  const pending = store.decisionFor(item.text);
  const decided = pending ? ` data-decision="${pending.decision}"` : "";
  const examples = item.examples
    .filter((e) => e.text)
    .map((e) => `<p class="provenance" data-doc="${escapeHtml(e.doc)}" data-sent="${e.sent}">
        ${highlightCandidate(e.text!, item.text)}</p>`)
    .join("\n");
  const polarity =
    kind === "relation"
      ? `<select class="polarity" data-candidate="${escapeHtml(item.text)}">
           <option value="">polarity...</option>
           <option value="increase"${pending?.polarity === "increase" ? " selected" : ""}>increase</option>
           <option value="decrease"${pending?.polarity === "decrease" ? " selected" : ""}>decrease</option>
           <option value="neutral"${pending?.polarity === "neutral" ? " selected" : ""}>neutral</option>
         </select>`
      : "";
  return `<li class="card" data-candidate="${escapeHtml(item.text)}"
              data-confidence="${item.confidence}"${decided}>
    <span class="text">${escapeHtml(item.text)}</span>
    <span class="confidence">${item.confidence.toFixed(4)}</span>
    <button class="accept" data-candidate="${escapeHtml(item.text)}">accept</button>
    <button class="reject" data-candidate="${escapeHtml(item.text)}">reject</button>
    ${polarity}
    ${examples}
  </li>`;
}

/** Candidate queue in API order; confidences are rendered verbatim. */
export function renderQueue(view: SessionView, store: QueueStore): string {
  const batch = view.open_batch;
  if (view.state === "converged" || batch === null) {
    return `<section class="converged">
      <h2>Converged</h2>
      <p>No new candidates after iteration ${view.iteration}.
         Lexicon: ${view.variables} variables, ${view.relations} relation keywords.</p>
    </section>`;
  }
  const cards = batch.items.map((i) => candidateCard(i, store, batch.kind)).join("\n");
  const errors = store.validationErrors();
  const submit = store.canSubmit()
    ? '<button id="submit" class="submit">submit &amp; iterate</button>'
    : '<button id="submit" class="submit" disabled>submit &amp; iterate</button>';
  return `<section class="queue" data-batch="${escapeHtml(batch.batch_id)}"
               data-kind="${batch.kind}" data-iteration="${batch.iteration}">
    <h2>${batch.kind} candidates, iteration ${batch.iteration} (${batch.phase})</h2>
    <p class="progress">${store.pendingCount()} of ${batch.items.length} decided</p>
    <ol class="cards">${cards}</ol>
    ${errors.size ? `<p class="validation">${errors.size} candidate(s) need attention</p>` : ""}
    ${submit}
  </section>`;
}

export function renderDuplicates(
  proposals: DuplicateProposal[],
  confirmed: Set<string>,
): string {
  if (!proposals.length) {
    return '<section class="duplicates"><p>No duplicate candidates.</p></section>';
  }
  const rows = proposals
    .map((p) => {
      const key = `${p.a}||${p.b}`;
      const state = confirmed.has(key) ? " data-confirmed" : "";
      return `<tr data-pair="${escapeHtml(key)}"${state}>
        <td>${escapeHtml(p.a)}</td><td>${escapeHtml(p.b)}</td>
        <td>${p.score.toFixed(4)}</td>
        <td><button class="confirm" data-pair="${escapeHtml(key)}">same entity</button>
            <button class="distinct" data-pair="${escapeHtml(key)}">distinct</button>
            <input class="canonical" data-pair="${escapeHtml(key)}"
                   placeholder="canonical name" /></td>
      </tr>`;
    })
    .join("\n");
  return `<section class="duplicates">
    <table><thead><tr><th>entity</th><th>entity</th><th>score</th><th></th></tr></thead>
    <tbody>${rows}</tbody></table>
  </section>`;
}

/** SVG preview with polarity-colored directed edges, nodes on a circle. */
export function renderGraph(payload: GraphPayload, size = 640): string {
  const nodes = payload.nodes;
  if (!nodes.length) return '<section class="graph"><p>Empty graph.</p></section>';
  const radius = size / 2 - 80;
  const cx = size / 2;
  const cy = size / 2;
  const position = new Map<string, { x: number; y: number }>();
  nodes.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / nodes.length - Math.PI / 2;
    position.set(node.name, {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });
  const edges = payload.edges
    .map((e) => {
      const a = position.get(e.subject)!;
      const b = position.get(e.object)!;
      const color = POLARITY_COLORS[e.polarity] ?? "#6b7280";
      return `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}"
                    x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}"
                    stroke="${color}" stroke-width="2"
                    marker-end="url(#arrow)"
                    data-polarity="${e.polarity}"><title>${escapeHtml(
                      e.keywords.join(", "))}</title></line>`;
    })
    .join("\n");
  const circles = nodes
    .map((n) => {
      const p = position.get(n.name)!;
      const fill = n.is_center ? "#f4c20d" : "#dbeafe";
      return `<g data-node="${escapeHtml(n.name)}">
        <circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="26" fill="${fill}"
                stroke="#1f2937"${n.is_center ? ' data-center="true"' : ""}/>
        <text x="${p.x.toFixed(1)}" y="${(p.y + 42).toFixed(1)}"
              text-anchor="middle" font-size="11">${escapeHtml(n.name)}</text>
      </g>`;
    })
    .join("\n");
  return `<section class="graph"><svg viewBox="0 0 ${size} ${size}"
      xmlns="http://www.w3.org/2000/svg">
    <defs><marker id="arrow" viewBox="0 0 10 10" refX="22" refY="5"
      markerWidth="7" markerHeight="7" orient="auto-start-reverse">
      <path d="M 0 0 L 10 5 L 0 10 z" fill="#374151"/></marker></defs>
    ${edges}
    ${circles}
  </svg></section>`;
}

export function renderRetryBanner(message: string): string {
  return `<div class="banner" role="alert">
    ${escapeHtml(message)} — your decisions are kept locally.
    <button id="retry">retry</button>
  </div>`;
}
