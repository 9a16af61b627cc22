/** DOM rendering for the auditor console.
 *
 * render() rebuilds the view from scratch on every state change; the DOM
 * is small enough that diffing would buy nothing. Controls dispatch
 * events back through the supplied callback, never mutate state.
 */

import type { Value } from "./api";
import type { AppEvent, UiState, Verdict } from "./state";
import { progressText } from "./state";

export type Dispatch = (ev: AppEvent) => void;

export interface RenderOptions {
  /** Label-elicitation mode: buttons submit the auditor's own label
   *  instead of a fair/unfair verdict. */
  elicitLabels?: boolean;
  /** Output space for label mode; defaults to binary 0/1. */
  outputs?: Value[];
  /** Clock for verdict timestamps; injectable for tests. */
  now?: () => string;
}

/** Dataset-specific phrasing for the system's label on the card. */
export function systemLabelPhrase(dataset: string, label: Value): string {
  if (dataset.startsWith("compas-binary")) {
    return label === 1 || label === "1"
      ? "predicted to reoffend within two years"
      : "predicted not to reoffend within two years";
  }
  if (dataset.startsWith("german")) {
    return label === 1 || label === "1"
      ? "predicted a good credit risk"
      : "predicted a bad credit risk";
  }
  if (dataset.startsWith("adult")) {
    return label === 1 || label === "1"
      ? "predicted to earn over $50K per year"
      : "predicted to earn at most $50K per year";
  }
  return `system label: ${label}`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function banner(state: UiState, dispatch: Dispatch): HTMLElement | null {
  if (state.banner === null) return null;
  const box = el("div", { class: `banner banner-${state.banner.kind}`, role: "alert" });
  box.append(el("span", {}, state.banner.message));
  if (state.banner.kind === "retry") {
    const retry = el("button", { type: "button", "data-action": "retry" }, "Retry");
    retry.addEventListener("click", () => dispatch({ kind: "retry_requested" }));
    box.append(retry);
  }
  if (state.banner.kind === "offline") {
    const again = el("button", { type: "button", "data-action": "reconnect" }, "Reconnect");
    again.addEventListener("click", () => dispatch({ kind: "reconnected" }));
    box.append(again);
  }
  return box;
}

function pendingBadge(state: UiState): HTMLElement | null {
  if (state.pendingQueue.length === 0) return null;
  const n = state.pendingQueue.length;
  return el(
    "span",
    { class: "pending-badge", "data-pending": String(n) },
    `${n} judgment${n === 1 ? "" : "s"} pending`,
  );
}

function startScreen(state: UiState, dispatch: Dispatch): HTMLElement {
  const box = el("section", { class: "start-screen" });
  box.append(el("h2", {}, "Start an audit session"));
  const input = el("input", {
    id: "auditor-id",
    type: "text",
    placeholder: "auditor id",
    value: state.auditorId,
  });
  const button = el("button", { id: "start-session", type: "button" }, "Start session");
  button.addEventListener("click", () =>
    dispatch({ kind: "start_requested", auditorId: input.value }),
  );
  input.addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Enter") {
      dispatch({ kind: "start_requested", auditorId: input.value });
    }
  });
  box.append(input, button);
  return box;
}

function verdictControls(
  state: UiState,
  dispatch: Dispatch,
  opts: RenderOptions,
): HTMLElement {
  const card = state.card;
  if (card === null) throw new Error("verdict controls need a card");
  const rowId = card.row_id;
  const now = opts.now ?? (() => new Date().toISOString());
  const controls = el("div", { class: "verdict-controls" });
  const disabled = state.awaitingAck;

  if (opts.elicitLabels) {
    const outputs = opts.outputs ?? [0, 1];
    for (const label of outputs) {
      const b = el(
        "button",
        { type: "button", class: "label-button", "data-label": String(label) },
        `My label: ${label}`,
      );
      b.disabled = disabled;
      b.addEventListener("click", () =>
        dispatch({ kind: "label_clicked", rowId, label, at: now() }),
      );
      controls.append(b);
    }
    return controls;
  }

  const mk = (verdict: Verdict, id: string, text: string) => {
    const b = el("button", { type: "button", id, "data-verdict": String(verdict) }, text);
    b.disabled = disabled;
    b.addEventListener("click", () =>
      dispatch({ kind: "verdict_clicked", rowId, verdict, at: now() }),
    );
    return b;
  };
  controls.append(mk(0, "verdict-fair", "Fair"), mk(1, "verdict-unfair", "Unfair"));
  return controls;
}

function cardPanel(state: UiState, dispatch: Dispatch, opts: RenderOptions): HTMLElement {
  const card = state.card;
  if (card === null) throw new Error("card screen without a card");
  const panel = el("section", { class: "tuple-card", "data-row-id": String(card.row_id) });
  panel.append(el("div", { class: "progress" }, progressText(card)));

  const list = el("dl", { class: "features" });
  for (const [name, value] of Object.entries(card.features)) {
    list.append(el("dt", {}, name.replace(/_/g, " ")));
    list.append(el("dd", { "data-feature": name }, String(value)));
  }
  panel.append(list);

  panel.append(
    el("p", { class: "system-label" }, systemLabelPhrase(state.dataset, card.system_label)),
  );
  panel.append(
    el("p", { class: "prompt" }, "Is this decision fair for this individual?"),
  );
  panel.append(verdictControls(state, dispatch, opts));
  return panel;
}

function notionName(notion: string): string {
  return notion.replace(/-/g, " ");
}

function reportPanel(state: UiState): HTMLElement {
  const box = el("section", { class: "report-panel" });
  box.append(el("h2", {}, "Session report"));
  const report = state.report;
  if (report === null) {
    box.append(el("p", { class: "report-note" }, "no report yet"));
    return box;
  }
  box.append(
    el(
      "p",
      { class: "report-progress" },
      `${report.judged} of ${report.total} judged, ${report.flagged} flagged`,
    ),
  );
  const profile = report.profile;
  if (profile === null) {
    box.append(
      el(
        "p",
        { class: "report-note", "data-insufficient": "1" },
        report.note ?? "insufficient data",
      ),
    );
    return box;
  }
  box.append(
    el(
      "p",
      { class: "report-fitted", "data-fitted-at": String(profile.fitted_at) },
      `model fitted at ${profile.fitted_at} judgments (${profile.family})`,
    ),
  );
  if (profile.model === null) {
    box.append(el("p", { class: "report-note" }, profile.note ?? "no model"));
    return box;
  }
  const pct = (profile.model.accuracy * 100).toFixed(1);
  box.append(el("p", { class: "report-accuracy" }, `rule accuracy ${pct}%`));
  if (profile.model.warning) {
    box.append(el("p", { class: "report-warning" }, profile.model.warning));
  }

  if (profile.notions !== undefined) {
    const table = el("table", { class: "notion-flags" });
    const attrs = Object.keys(profile.notions);
    const first = profile.notions[attrs[0] ?? ""] ?? {};
    const notions = Object.keys(first);
    const head = el("tr");
    head.append(el("th", {}, "attribute"));
    for (const n of notions) head.append(el("th", {}, notionName(n)));
    table.append(head);
    for (const attr of attrs) {
      const row = el("tr", { "data-attr": attr });
      row.append(el("td", {}, attr));
      const flags = profile.notions[attr] ?? {};
      for (const n of notions) {
        row.append(el("td", { "data-notion": n, class: `flag-${flags[n]}` }, flags[n] ?? ""));
      }
      table.append(row);
    }
    box.append(table);
  }
  if (profile.consistency !== undefined) {
    box.append(
      el(
        "p",
        { class: "report-consistency" },
        `similar-individual consistency ${(profile.consistency * 100).toFixed(1)}%`,
      ),
    );
  }
  return box;
}

function completionScreen(state: UiState): HTMLElement {
  const box = el("section", { class: "completion-screen" });
  box.append(el("h2", {}, "Session complete"));
  box.append(
    el("p", {}, `All ${state.judged} of ${state.total} tuples judged. Thank you.`),
  );
  return box;
}

function errorScreen(state: UiState, dispatch: Dispatch): HTMLElement {
  const box = el("section", { class: "error-screen", role: "alert" });
  box.append(el("h2", {}, "Session unavailable"));
  box.append(el("p", { class: "error-message" }, state.error ?? "unknown error"));
  const reset = el("button", { type: "button", "data-action": "reset" }, "Start over");
  reset.addEventListener("click", () => dispatch({ kind: "reset_requested" }));
  box.append(reset);
  return box;
}

export function render(
  root: HTMLElement,
  state: UiState,
  dispatch: Dispatch,
  opts: RenderOptions = {},
): void {
  root.textContent = "";
  const header = el("header", { class: "console-header" });
  header.append(el("h1", {}, "Fairness audit console"));
  if (state.sessionId !== null) {
    header.append(
      el(
        "span",
        { class: "session-info", "data-session-id": state.sessionId },
        `${state.auditorId} on ${state.dataset}`,
      ),
    );
  }
  const badge = pendingBadge(state);
  if (badge !== null) header.append(badge);
  root.append(header);

  const alert = banner(state, dispatch);
  if (alert !== null) root.append(alert);

  switch (state.screen) {
    case "start":
      root.append(startScreen(state, dispatch));
      break;
    case "loading":
      root.append(el("section", { class: "loading-screen" }, "loading..."));
      break;
    case "card":
      root.append(cardPanel(state, dispatch, opts));
      root.append(reportPanel(state));
      break;
    case "complete":
      root.append(completionScreen(state));
      root.append(reportPanel(state));
      break;
    case "error":
      root.append(errorScreen(state, dispatch));
      break;
  }
}
