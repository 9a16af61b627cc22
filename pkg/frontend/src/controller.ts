/** Controller: wires the pure reducer to the HTTP client and the DOM.
 *
 * All side effects flow through runEffect, and every server response or
 * failure is folded back into the reducer as an event, so the screen
 * stays a pure function of what the server said.
 */

import type { Value } from "./api";
import { ApiError, AuditClient, NetworkError } from "./client";
import type { AppEvent, Effect, UiState } from "./state";
import { initialState, reduce } from "./state";
import { render } from "./ui";

const SESSION_KEY = "fairaudit.session";
const AUDITOR_KEY = "fairaudit.auditor";

export interface ConsoleOptions {
  baseUrl: string;
  root: HTMLElement;
  storage?: Storage;
  fetchFn?: (input: string, init?: RequestInit) => Promise<Response>;
  elicitLabels?: boolean;
  outputs?: Value[];
  now?: () => string;
}

export class AuditConsole {
  state: UiState;
  readonly client: AuditClient;
  private readonly root: HTMLElement;
  private readonly storage: Storage;
  private readonly renderOpts: { elicitLabels?: boolean; outputs?: Value[]; now?: () => string };
  private inFlight = 0;
  private idleWaiters: (() => void)[] = [];
  private stopped = false;

  constructor(opts: ConsoleOptions) {
    this.client = new AuditClient(opts.baseUrl, opts.fetchFn);
    this.root = opts.root;
    this.storage = opts.storage ?? window.localStorage;
    this.renderOpts = {
      elicitLabels: opts.elicitLabels,
      outputs: opts.outputs,
      now: opts.now,
    };
    this.state = initialState(this.storage.getItem(AUDITOR_KEY) ?? "");
  }

  /** Resume the stored session if there is one, else show the start form. */
  boot(): void {
    const saved = this.storage.getItem(SESSION_KEY);
    if (saved !== null && saved !== "") {
      this.dispatch({ kind: "resume_requested", sessionId: saved });
    } else {
      this.draw();
    }
  }

  /** Detach from the DOM; in-flight responses are dropped. */
  stop(): void {
    this.stopped = true;
  }

  /** Resolves once no effects are in flight; test hook. */
  settled(): Promise<void> {
    if (this.inFlight === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  dispatch = (ev: AppEvent): void => {
    if (this.stopped) return;
    const step = reduce(this.state, ev);
    this.state = step.state;
    this.draw();
    for (const effect of step.effects) void this.runEffect(effect);
  };

  private draw(): void {
    render(this.root, this.state, this.dispatch, this.renderOpts);
  }

  private async runEffect(effect: Effect): Promise<void> {
    this.inFlight += 1;
    try {
      const ev = await this.perform(effect);
      if (ev !== null) this.dispatch(ev);
    } finally {
      this.inFlight -= 1;
      if (this.inFlight === 0) {
        const waiters = this.idleWaiters;
        this.idleWaiters = [];
        for (const wake of waiters) wake();
      }
    }
  }

  private async perform(effect: Effect): Promise<AppEvent | null> {
    switch (effect.kind) {
      case "persist_session":
        this.storage.setItem(SESSION_KEY, effect.sessionId);
        this.storage.setItem(AUDITOR_KEY, effect.auditorId);
        return null;
      case "clear_session":
        this.storage.removeItem(SESSION_KEY);
        return null;
      case "create_session":
        try {
          return {
            kind: "session_started",
            payload: await this.client.createSession(effect.auditorId),
          };
        } catch (err) {
          return this.fetchFailure(effect, err);
        }
      case "fetch_view":
        try {
          return { kind: "view_received", payload: await this.client.view(effect.sessionId) };
        } catch (err) {
          return this.fetchFailure(effect, err);
        }
      case "fetch_next":
        try {
          return { kind: "card_received", payload: await this.client.next(effect.sessionId) };
        } catch (err) {
          return this.fetchFailure(effect, err);
        }
      case "fetch_report":
        try {
          return {
            kind: "report_received",
            payload: await this.client.report(effect.sessionId),
          };
        } catch (err) {
          // a stale report panel is acceptable; a dead session is not
          if (err instanceof ApiError && err.status === 404) {
            return { kind: "not_found", message: err.detail };
          }
          return null;
        }
      case "submit": {
        const event = effect.event;
        const judgment =
          event.label !== undefined
            ? { label: event.label }
            : { verdict: event.verdict ?? 0 };
        try {
          const ack = await this.client.submit(effect.sessionId, event.rowId, judgment);
          return { kind: "ack_received", payload: ack, event };
        } catch (err) {
          if (err instanceof NetworkError) {
            return { kind: "went_offline", event };
          }
          if (err instanceof ApiError && err.status === 409) {
            return { kind: "submit_conflict", event, detail: err.detail };
          }
          if (err instanceof ApiError && err.status === 404) {
            return { kind: "not_found", message: err.detail };
          }
          if (err instanceof ApiError) {
            return { kind: "submit_invalid", event, detail: err.detail };
          }
          throw err;
        }
      }
    }
  }

  private fetchFailure(effect: Effect, err: unknown): AppEvent {
    if (err instanceof ApiError && err.status === 404) {
      return { kind: "not_found", message: err.detail };
    }
    const message = err instanceof Error ? err.message : String(err);
    return { kind: "request_failed", effect, message };
  }
}
