/** DOM wiring for the demo page. All broker interaction goes through
 * BrokerApi; everything here is presentation. */

import { ApiError, BrokerApi, BrokerStatus, NotificationDoc } from "./api.js";
import { compareModes } from "./compare.js";
import {
  DrainLoop,
  FeedModel,
  SseParser,
  backoffMs,
  parseNotification,
} from "./feed.js";
import {
  OPS,
  PairRow,
  PredicateRow,
  PrecisionChoice,
  buildEvent,
  buildSubscription,
  canSubmitEvent,
  canSubmitSubscription,
} from "./forms.js";
import { Json } from "./payload.js";
import { DEFAULT_POLL_MS, StatusPoller } from "./status.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let api = new BrokerApi("http://127.0.0.1:8080");
let clientId = "";
let poller: StatusPoller | null = null;
let streamAbort: AbortController | null = null;
let drainLoop: DrainLoop | null = null;
const feed = new FeedModel();

// ---------------------------------------------------------------------------
// status bar

function renderStatus(status: BrokerStatus | null, error?: Error): void {
  const bar = $("status-line");
  if (!status) {
    bar.textContent = `broker unreachable${error ? `: ${error.message}` : ""}`;
    bar.className = "bad";
    return;
  }
  bar.className = "";
  bar.textContent =
    `mode=${status.mode}  clients=${status.clients}  ` +
    `subs=${status.subscriptions}  events=${status.events_published}  ` +
    `notifications=${status.notifications_sent}  ` +
    `dead-letters=${status.dead_letters}  year=${status.current_year}`;
  $("mode-pill").textContent = status.mode;
}

function connectBroker(): void {
  const base = ($("broker-url") as HTMLInputElement).value.trim().replace(/\/$/, "");
  const token = ($("admin-token") as HTMLInputElement).value.trim();
  api = new BrokerApi(base, { adminToken: token });
  poller?.stop();
  poller = new StatusPoller(() => api.status(), renderStatus, DEFAULT_POLL_MS);
  poller.start();
}

async function setMode(mode: string): Promise<void> {
  try {
    await api.setMode(mode);
    await poller?.tick();
  } catch (err) {
    alert(`mode change failed: ${(err as Error).message}`);
  }
}

// ---------------------------------------------------------------------------
// session

async function register(): Promise<void> {
  const name = ($("client-name") as HTMLInputElement).value.trim() || "anon";
  const transport = ($("client-transport") as HTMLSelectElement).value;
  const url = ($("webhook-url") as HTMLInputElement).value.trim();
  const out = $("session-result");
  try {
    const info = await api.registerClient(name, transport, url);
    clientId = info.client_id;
    out.textContent = `registered ${info.client_id} (${info.transport})`;
    out.className = "ok";
  } catch (err) {
    out.textContent = (err as Error).message;
    out.className = "bad";
  }
}

// ---------------------------------------------------------------------------
// dynamic rows

function readPredicateRows(): PredicateRow[] {
  return [...document.querySelectorAll<HTMLTableRowElement>("#sub-rows tr")].map(
    (tr) => ({
      attribute: tr.querySelector<HTMLInputElement>(".attr")!.value,
      op: tr.querySelector<HTMLSelectElement>(".op")!.value,
      value: tr.querySelector<HTMLInputElement>(".val")!.value,
    }),
  );
}

function readPairRows(): PairRow[] {
  return [...document.querySelectorAll<HTMLTableRowElement>("#pub-rows tr")].map(
    (tr) => ({
      attribute: tr.querySelector<HTMLInputElement>(".attr")!.value,
      value: tr.querySelector<HTMLInputElement>(".val")!.value,
    }),
  );
}

function addRow(tbodyId: "sub-rows" | "pub-rows"): void {
  const tr = document.createElement("tr");
  const attr = `<td><input class="attr" placeholder="attribute"></td>`;
  const val = `<td><input class="val" placeholder="value"></td>`;
  const del = `<td><button class="del" type="button">×</button></td>`;
  if (tbodyId === "sub-rows") {
    const ops = OPS.map((o) => `<option>${o}</option>`).join("");
    tr.innerHTML = `${attr}<td><select class="op">${ops}</select></td>${val}${del}`;
  } else {
    tr.innerHTML = `${attr}${val}${del}`;
  }
  tr.querySelector("button.del")!.addEventListener("click", () => {
    tr.remove();
    refreshButtons();
  });
  tr.querySelectorAll("input, select").forEach((el) =>
    el.addEventListener("input", refreshButtons),
  );
  $(tbodyId).appendChild(tr);
  refreshButtons();
}

function refreshButtons(): void {
  ($("sub-submit") as HTMLButtonElement).disabled =
    !canSubmitSubscription(readPredicateRows());
  const ok = canSubmitEvent(readPairRows());
  ($("pub-submit") as HTMLButtonElement).disabled = !ok;
  ($("pub-compare") as HTMLButtonElement).disabled = !ok;
}

function precisionChoice(): PrecisionChoice {
  const v = ($("sub-precision") as HTMLSelectElement).value;
  if (v === "synonyms-only") return { kind: "synonyms-only" };
  if (v === "exact") return { kind: "exact" };
  return { kind: "broker-default" };
}

// ---------------------------------------------------------------------------
// subscribe / publish

async function submitSubscription(): Promise<void> {
  const out = $("sub-result");
  try {
    const doc = buildSubscription(
      ($("sub-id") as HTMLInputElement).value,
      readPredicateRows(),
      precisionChoice(),
    );
    const { sub_id } = await api.subscribe(clientId, doc);
    out.textContent = `subscribed: ${sub_id}`;
    out.className = "ok";
  } catch (err) {
    out.textContent = describe(err);
    out.className = "bad";
  }
}

async function submitEvent(): Promise<void> {
  const out = $("pub-result");
  try {
    const doc = buildEvent(($("pub-id") as HTMLInputElement).value, readPairRows());
    const receipt = await api.publish(clientId, doc);
    out.textContent =
      `published ${receipt.event_id}: matched ${receipt.matched_count} ` +
      `subscription${receipt.matched_count === 1 ? "" : "s"}`;
    out.className = "ok";
  } catch (err) {
    out.textContent = describe(err);
    out.className = "bad";
  }
}

async function runCompare(): Promise<void> {
  const out = $("pub-result");
  try {
    const doc = buildEvent(($("pub-id") as HTMLInputElement).value, readPairRows());
    const result = await compareModes(api, clientId, doc as { [k: string]: Json });
    out.textContent =
      `semantic: ${result.semantic} matched · syntactic: ${result.syntactic} ` +
      `matched (mode restored to ${result.restoredMode})`;
    out.className = "ok";
  } catch (err) {
    out.textContent = describe(err);
    out.className = "bad";
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `broker says: ${err.message}`;
  return (err as Error).message;
}

// ---------------------------------------------------------------------------
// feed

function renderFeed(): void {
  const list = $("feed-list");
  list.innerHTML = "";
  for (const row of feed.rows) {
    const li = document.createElement("li");
    const when = new Date(row.receivedAt).toLocaleTimeString();
    const n = row.notification;
    const head = document.createElement("div");
    head.textContent =
      `${when}  event ${n.event_id} → subscription ${n.sub_id} ` +
      `(via ${n.delivered_via})`;
    li.appendChild(head);
    const trace = document.createElement("ul");
    trace.className = "trace";
    if (row.traceRows.length === 0) {
      const item = document.createElement("li");
      item.textContent = "exact match, no semantic steps";
      trace.appendChild(item);
    }
    for (const line of row.traceRows) {
      const item = document.createElement("li");
      item.textContent = line;
      trace.appendChild(item);
    }
    li.appendChild(trace);
    list.appendChild(li);
  }
}

function takeNotification(n: NotificationDoc): void {
  if (feed.add(n)) renderFeed();
}

function setFeedState(text: string, cls = ""): void {
  const badge = $("feed-state");
  badge.textContent = text;
  badge.className = cls;
}

async function openStream(): Promise<void> {
  closeStream();
  let attempt = 0;
  const run = async (): Promise<void> => {
    const abort = new AbortController();
    streamAbort = abort;
    try {
      setFeedState(attempt ? `reconnecting (try ${attempt + 1})` : "connecting");
      const response = await fetch(api.streamUrl(clientId), {
        signal: abort.signal,
      });
      if (!response.ok || !response.body) {
        throw new Error(`stream rejected: ${response.status}`);
      }
      setFeedState("live", "ok");
      attempt = 0;
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SseParser();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
          if (frame.data) takeNotification(parseNotification(frame.data));
        }
      }
      throw new Error("stream ended");
    } catch (err) {
      if (abort.signal.aborted) return;
      const delay = backoffMs(attempt++);
      setFeedState(`disconnected, retrying in ${delay}ms`, "bad");
      setTimeout(() => void run(), delay);
    }
  };
  await run();
}

function stopPolling(): void {
  drainLoop?.stop();
  drainLoop = null;
}

function closeStream(): void {
  streamAbort?.abort();
  streamAbort = null;
  stopPolling();
  setFeedState("idle");
}

function togglePolling(): void {
  if (drainLoop !== null) {
    stopPolling();
    setFeedState("idle");
    return;
  }
  drainLoop = new DrainLoop(
    () => api.drain(clientId),
    takeNotification,
    (err) =>
      err
        ? setFeedState(`poll failed: ${describe(err)}`, "bad")
        : setFeedState("polling queue", "ok"),
  );
  drainLoop.start();
}

// ---------------------------------------------------------------------------

function init(): void {
  $("broker-connect").addEventListener("click", connectBroker);
  $("mode-semantic").addEventListener("click", () => void setMode("semantic"));
  $("mode-syntactic").addEventListener("click", () => void setMode("syntactic"));
  $("client-register").addEventListener("click", () => void register());
  $("sub-add-row").addEventListener("click", () => addRow("sub-rows"));
  $("pub-add-row").addEventListener("click", () => addRow("pub-rows"));
  $("sub-submit").addEventListener("click", () => void submitSubscription());
  $("pub-submit").addEventListener("click", () => void submitEvent());
  $("pub-compare").addEventListener("click", () => void runCompare());
  $("feed-stream").addEventListener("click", () => void openStream());
  $("feed-poll").addEventListener("click", togglePolling);
  $("feed-stop").addEventListener("click", closeStream);
  ($("client-transport") as HTMLSelectElement).addEventListener("change", () => {
    $("webhook-url-row").style.display =
      ($("client-transport") as HTMLSelectElement).value === "webhook"
        ? ""
        : "none";
  });
  addRow("sub-rows");
  addRow("pub-rows");
  connectBroker();
}

document.addEventListener("DOMContentLoaded", init);
