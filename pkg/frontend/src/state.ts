/** Pure session state machine for the auditor console.
 *
 * The reducer owns every invariant the console promises:
 *
 * - a displayed tuple receives at most one submitted verdict (clicks on a
 *   card that is already in flight, queued, or stale are ignored);
 * - the card advances only on a server ack, never optimistically;
 * - offline submissions queue with a visible badge and flush in order;
 * - state is a pure function of the events fed in, so replaying the same
 *   server payloads reconstructs the same screen.
 *
 * All I/O lives in the controller, which interprets the effect list.
 */

import type {
  Ack,
  NextResponse,
  Report,
  SessionCreated,
  SessionView,
  TupleCard,
  Value,
} from "./api";
import { isDone } from "./api";

export type Verdict = 0 | 1;

/** One committed click: the judgment the console owes the server. */
export interface VerdictEvent {
  rowId: number;
  verdict?: Verdict;
  label?: Value;
  at: string;
}

export type Screen = "start" | "loading" | "card" | "complete" | "error";

export interface Banner {
  kind: "retry" | "duplicate" | "invalid" | "offline";
  message: string;
}

export interface UiState {
  screen: Screen;
  sessionId: string | null;
  auditorId: string;
  dataset: string;
  total: number;
  judged: number;
  card: TupleCard | null;
  /** A submission is in flight; verdict controls are disabled. */
  awaitingAck: boolean;
  /** Judgments made while offline, oldest first; shown as a pending badge. */
  pendingQueue: VerdictEvent[];
  offline: boolean;
  banner: Banner | null;
  report: Report | null;
  /** What to re-issue when the user clicks retry on a failed fetch. */
  retry: Effect | null;
  error: string | null;
}

export type AppEvent =
  | { kind: "start_requested"; auditorId: string }
  | { kind: "resume_requested"; sessionId: string }
  | { kind: "session_started"; payload: SessionCreated }
  | { kind: "view_received"; payload: SessionView }
  | { kind: "card_received"; payload: NextResponse }
  | { kind: "verdict_clicked"; rowId: number; verdict: Verdict; at: string }
  | { kind: "label_clicked"; rowId: number; label: Value; at: string }
  | { kind: "ack_received"; payload: Ack; event: VerdictEvent }
  | { kind: "submit_conflict"; event: VerdictEvent; detail: string }
  | { kind: "submit_invalid"; event: VerdictEvent; detail: string }
  | { kind: "went_offline"; event: VerdictEvent }
  | { kind: "reconnected" }
  | { kind: "report_received"; payload: Report }
  | { kind: "request_failed"; effect: Effect; message: string }
  | { kind: "retry_requested" }
  | { kind: "not_found"; message: string }
  | { kind: "reset_requested" };

export type Effect =
  | { kind: "create_session"; auditorId: string }
  | { kind: "fetch_view"; sessionId: string }
  | { kind: "fetch_next"; sessionId: string }
  | { kind: "submit"; sessionId: string; event: VerdictEvent }
  | { kind: "fetch_report"; sessionId: string }
  | { kind: "persist_session"; sessionId: string; auditorId: string }
  | { kind: "clear_session" };

export interface Step {
  state: UiState;
  effects: Effect[];
}

export function initialState(auditorId = ""): UiState {
  return {
    screen: "start",
    sessionId: null,
    auditorId,
    dataset: "",
    total: 0,
    judged: 0,
    card: null,
    awaitingAck: false,
    pendingQueue: [],
    offline: false,
    banner: null,
    report: null,
    retry: null,
    error: null,
  };
}

function stay(state: UiState): Step {
  return { state, effects: [] };
}

function protocolError(state: UiState, message: string): Step {
  return {
    state: { ...state, screen: "error", card: null, error: message },
    effects: [],
  };
}

/** True when this card may still take a click. */
function clickable(state: UiState, rowId: number): boolean {
  if (state.screen !== "card" || state.card === null) return false;
  if (state.card.row_id !== rowId) return false;
  if (state.awaitingAck) return false;
  return !state.pendingQueue.some((e) => e.rowId === rowId);
}

function acceptJudgment(state: UiState, event: VerdictEvent): Step {
  if (state.offline) {
    // no server, no ack: queue it and keep the card on screen
    return {
      state: {
        ...state,
        pendingQueue: [...state.pendingQueue, event],
        banner: { kind: "offline", message: "connection lost: judgment queued" },
      },
      effects: [],
    };
  }
  return {
    state: { ...state, awaitingAck: true, banner: null },
    effects: [{ kind: "submit", sessionId: state.sessionId as string, event }],
  };
}

export function reduce(state: UiState, ev: AppEvent): Step {
  switch (ev.kind) {
    case "start_requested": {
      const auditorId = ev.auditorId.trim();
      if (auditorId === "") {
        return stay({
          ...state,
          banner: { kind: "invalid", message: "auditor id is required" },
        });
      }
      return {
        state: { ...initialState(auditorId), screen: "loading" },
        effects: [{ kind: "create_session", auditorId }],
      };
    }

    case "resume_requested":
      return {
        state: { ...state, screen: "loading", sessionId: ev.sessionId },
        effects: [{ kind: "fetch_view", sessionId: ev.sessionId }],
      };

    case "session_started": {
      const p = ev.payload;
      const next: UiState = {
        ...state,
        screen: "loading",
        sessionId: p.session_id,
        auditorId: p.auditor_id,
        dataset: p.dataset,
        total: p.total,
        judged: 0,
      };
      return {
        state: next,
        effects: [
          { kind: "persist_session", sessionId: p.session_id, auditorId: p.auditor_id },
          { kind: "fetch_next", sessionId: p.session_id },
          { kind: "fetch_report", sessionId: p.session_id },
        ],
      };
    }

    case "view_received": {
      const v = ev.payload;
      const base: UiState = {
        ...state,
        sessionId: v.session_id,
        auditorId: v.auditor_id,
        dataset: v.dataset,
        total: v.total,
        judged: v.judged,
        awaitingAck: false,
      };
      const persist: Effect = {
        kind: "persist_session",
        sessionId: v.session_id,
        auditorId: v.auditor_id,
      };
      const report: Effect = { kind: "fetch_report", sessionId: v.session_id };
      if (v.status === "complete") {
        return {
          state: { ...base, screen: "complete", card: null },
          effects: [persist, report],
        };
      }
      if (v.pending_card !== null) {
        // the server already served this row: show it again, do not
        // request another tuple (that would double-serve)
        return {
          state: { ...base, screen: "card", card: v.pending_card },
          effects: [persist, report],
        };
      }
      return {
        state: { ...base, screen: "loading", card: null },
        effects: [persist, { kind: "fetch_next", sessionId: v.session_id }, report],
      };
    }

    case "card_received": {
      const next = ev.payload;
      if (isDone(next)) {
        return stay({
          ...state,
          screen: "complete",
          card: null,
          judged: next.judged,
          total: next.total,
          awaitingAck: false,
        });
      }
      if (next.progress.served > next.progress.total) {
        return protocolError(state, "server progress exceeds the session size");
      }
      return stay({
        ...state,
        screen: "card",
        card: next,
        judged: next.progress.judged,
        total: next.progress.total,
        awaitingAck: false,
      });
    }

    case "verdict_clicked": {
      if (!clickable(state, ev.rowId)) return stay(state);
      return acceptJudgment(state, { rowId: ev.rowId, verdict: ev.verdict, at: ev.at });
    }

    case "label_clicked": {
      if (!clickable(state, ev.rowId)) return stay(state);
      return acceptJudgment(state, { rowId: ev.rowId, label: ev.label, at: ev.at });
    }

    case "ack_received": {
      const sessionId = state.sessionId as string;
      const judged = ev.payload.judged;
      const queue = state.pendingQueue.filter((e) => e.rowId !== ev.event.rowId);
      if (queue.length > 0) {
        // more offline judgments owed: keep flushing before advancing
        return {
          state: { ...state, judged, pendingQueue: queue, awaitingAck: true },
          effects: [{ kind: "submit", sessionId, event: queue[0] as VerdictEvent }],
        };
      }
      const base: UiState = {
        ...state,
        judged,
        pendingQueue: queue,
        awaitingAck: false,
        banner: null,
      };
      if (ev.payload.status === "complete") {
        return {
          state: { ...base, screen: "complete", card: null },
          effects: [{ kind: "fetch_report", sessionId }],
        };
      }
      return {
        state: base,
        effects: [
          { kind: "fetch_next", sessionId },
          { kind: "fetch_report", sessionId },
        ],
      };
    }

    case "submit_conflict": {
      // the server already holds a judgment for this row: agree with it,
      // warn, and move on to the next tuple
      const sessionId = state.sessionId as string;
      return {
        state: {
          ...state,
          awaitingAck: false,
          pendingQueue: state.pendingQueue.filter((e) => e.rowId !== ev.event.rowId),
          banner: { kind: "duplicate", message: `duplicate judgment: ${ev.detail}` },
        },
        effects: [
          { kind: "fetch_next", sessionId },
          { kind: "fetch_report", sessionId },
        ],
      };
    }

    case "submit_invalid":
      // leave the card up so the auditor can judge again
      return stay({
        ...state,
        awaitingAck: false,
        banner: { kind: "invalid", message: ev.detail },
      });

    case "went_offline":
      return stay({
        ...state,
        awaitingAck: false,
        offline: true,
        pendingQueue: state.pendingQueue.some((e) => e.rowId === ev.event.rowId)
          ? state.pendingQueue
          : [...state.pendingQueue, ev.event],
        banner: { kind: "offline", message: "connection lost: judgment queued" },
      });

    case "reconnected": {
      if (state.sessionId === null) return stay({ ...state, offline: false });
      const head = state.pendingQueue[0];
      if (head === undefined) {
        return stay({ ...state, offline: false, banner: null });
      }
      return {
        state: { ...state, offline: false, awaitingAck: true, banner: null },
        effects: [{ kind: "submit", sessionId: state.sessionId, event: head }],
      };
    }

    case "report_received":
      return stay({ ...state, report: ev.payload });

    case "request_failed":
      return stay({
        ...state,
        awaitingAck: false,
        retry: ev.effect,
        banner: { kind: "retry", message: `request failed: ${ev.message}` },
      });

    case "retry_requested": {
      const effect = state.retry;
      if (effect === null) return stay(state);
      return {
        state: { ...state, retry: null, banner: null, offline: false },
        effects: [effect],
      };
    }

    case "not_found":
      return {
        state: { ...state, screen: "error", card: null, error: ev.message },
        effects: [{ kind: "clear_session" }],
      };

    case "reset_requested":
      return {
        state: initialState(state.auditorId),
        effects: [{ kind: "clear_session" }],
      };
  }
}

/** Progress line for the card header, 1-based: "k of n". */
export function progressText(card: TupleCard): string {
  return `${card.progress.served} of ${card.progress.total}`;
}
