/** Wire types for the audit service HTTP+JSON API.
 *
 * These mirror the JSON the service emits field for field; the console
 * never reshapes payloads, so the reducer can treat them as facts.
 */

export type Value = string | number;

export interface SessionCreated {
  session_id: string;
  auditor_id: string;
  dataset: string;
  subset_index: number;
  total: number;
}

export interface Progress {
  served: number;
  judged: number;
  total: number;
}

export interface TupleCard {
  row_id: number;
  features: Record<string, Value>;
  system_label: Value;
  progress: Progress;
  status?: "ok";
}

export interface SessionDone {
  status: "complete";
  judged: number;
  total: number;
}

export type NextResponse = TupleCard | SessionDone;

export function isDone(next: NextResponse): next is SessionDone {
  return next.status === "complete";
}

export interface Ack {
  seq: number;
  session_seq: number;
  judged: number;
  remaining: number;
  status: string;
}

export interface SessionView {
  session_id: string;
  auditor_id: string;
  dataset: string;
  status: string;
  created_at: string;
  served: number;
  judged: number;
  total: number;
  pending_card: TupleCard | null;
}

export type NotionFlag = "yes" | "no" | "undefined";

export interface ModelSummary {
  accuracy: number;
  warning: string;
}

export interface Profile {
  fitted_at: number;
  family: string;
  model: ModelSummary | null;
  note?: string;
  notions?: Record<string, Record<string, NotionFlag>>;
  consistency?: number;
}

export interface Report {
  session_id: string;
  auditor_id: string;
  dataset: string;
  status: string;
  served: number;
  judged: number;
  flagged: number;
  unjudged_served: number;
  total: number;
  delta: number;
  refit_every: number;
  profile: Profile | null;
  note?: string;
}

/** Judgment body: exactly one of verdict (0 accepts, 1 flags) or label. */
export type Judgment = { verdict: 0 | 1 } | { label: Value };
