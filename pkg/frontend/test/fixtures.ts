/** Recorded broker JSON, captured from a live golden-scenario run. Keys map
 * to exact canonical strings; tests compare byte-for-byte. */

import { readFileSync } from "node:fs";

export interface Fixtures {
  subscription_S: string;
  event_E: string;
  event_E2: string;
  subscribe_request: string;
  publish_request: string;
  notification_E_S: string;
}

export const fixtures: Fixtures = JSON.parse(
  readFileSync(new URL("./fixtures.json", import.meta.url), "utf-8"),
);
