/** Browser entry point.
 *
 * Query parameters:
 *   api=http://host:port   service base URL (default http://127.0.0.1:8000)
 *   labels=1               label-elicitation mode instead of fair/unfair
 */

import { AuditConsole } from "./controller";

function start(): void {
  const params = new URLSearchParams(window.location.search);
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app mount point");
  const console_ = new AuditConsole({
    baseUrl: params.get("api") ?? "http://127.0.0.1:8000",
    root,
    elicitLabels: params.get("labels") === "1",
  });
  console_.boot();
  window.addEventListener("online", () => console_.dispatch({ kind: "reconnected" }));
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", start);
} else {
  start();
}
