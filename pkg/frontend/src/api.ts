/** Thin typed client for the broker's HTTP/JSON interface. */

import { canonicalJson, Json } from "./payload.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ClientInfo {
  client_id: string;
  name: string;
  transport: string;
  url: string;
}

export interface Receipt {
  event_id: string;
  matched_count: number;
}

export interface TraceRecord {
  stage: string;
  detail: string;
  hops: number;
}

export interface NotificationDoc {
  event_id: string;
  sub_id: string;
  subscriber: string;
  publisher: string;
  trace: TraceRecord[];
  delivered_via: string;
  dedupe_key: string;
}

export interface BrokerStatus {
  mode: string;
  clients: number;
  subscriptions: number;
  events_published: number;
  notifications_sent: number;
  dead_letters: number;
  log_lines_skipped: number;
  current_year: number;
  ontology: { domains: string[]; digest: string };
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export interface ApiOptions {
  adminToken?: string;
  fetchImpl?: FetchLike;
}

export class BrokerApi {
  private readonly fetchImpl: FetchLike;
  private readonly adminToken: string;

  constructor(
    readonly baseUrl: string,
    options: ApiOptions = {},
  ) {
    this.fetchImpl = options.fetchImpl ?? ((url, init) => fetch(url, init));
    this.adminToken = options.adminToken ?? "";
  }

  private async request(
    method: string,
    path: string,
    body?: Json,
    admin = false,
  ): Promise<unknown> {
    const headers: Record<string, string> = {};
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      init.body = canonicalJson(body);
    }
    if (admin && this.adminToken) headers["x-admin-token"] = this.adminToken;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    const doc = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiError(response.status, doc.error ?? response.statusText);
    }
    return doc;
  }

  registerClient(
    name: string,
    transport: string,
    url = "",
  ): Promise<ClientInfo> {
    return this.request("POST", "/clients", {
      name,
      transport,
      url,
    }) as Promise<ClientInfo>;
  }

  subscribe(clientId: string, subscription: Json): Promise<{ sub_id: string }> {
    return this.request("POST", "/subscriptions", {
      client_id: clientId,
      subscription,
    }) as Promise<{ sub_id: string }>;
  }

  unsubscribe(subId: string): Promise<{ removed: string }> {
    return this.request(
      "DELETE",
      `/subscriptions/${encodeURIComponent(subId)}`,
    ) as Promise<{ removed: string }>;
  }

  publish(clientId: string, event: Json): Promise<Receipt> {
    return this.request("POST", "/publications", {
      client_id: clientId,
      event,
    }) as Promise<Receipt>;
  }

  async drain(clientId: string): Promise<NotificationDoc[]> {
    const doc = (await this.request(
      "GET",
      `/notifications?client_id=${encodeURIComponent(clientId)}`,
    )) as { notifications: NotificationDoc[] };
    return doc.notifications;
  }

  status(): Promise<BrokerStatus> {
    return this.request("GET", "/status") as Promise<BrokerStatus>;
  }

  setMode(mode: string): Promise<{ mode: string }> {
    return this.request("POST", "/admin/mode", { mode }, true) as Promise<{
      mode: string;
    }>;
  }

  async deadLetters(): Promise<unknown[]> {
    const doc = (await this.request("GET", "/admin/dead-letters", undefined,
      true)) as { dead_letters: unknown[] };
    return doc.dead_letters;
  }

  streamUrl(clientId: string): string {
    return `${this.baseUrl}/stream?client_id=${encodeURIComponent(clientId)}`;
  }
}
