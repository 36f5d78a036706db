/**
 * Side-by-side demo: replay one publication in semantic and syntactic mode
 * and report both match counts. Purely presentation logic; the broker mode
 * is restored afterwards even if a call fails.
 */

import { BrokerApi } from "./api.js";
import { Json } from "./payload.js";

export interface ModeComparison {
  semantic: number;
  syntactic: number;
  restoredMode: string;
}

interface EventDoc {
  [key: string]: Json;
}

/** Each replay leg gets a suffixed event_id so its notifications cannot be
 * confused (or deduplicated) with the original publication's. */
function legEvent(event: EventDoc, mode: string): EventDoc {
  const leg = { ...event };
  if (typeof leg.event_id === "string") {
    leg.event_id = `${leg.event_id}~${mode}`;
  }
  return leg;
}

export async function compareModes(
  api: BrokerApi,
  clientId: string,
  event: EventDoc,
): Promise<ModeComparison> {
  const original = (await api.status()).mode;
  const counts: Record<string, number> = {};
  try {
    for (const mode of ["semantic", "syntactic"] as const) {
      await api.setMode(mode);
      const receipt = await api.publish(clientId, legEvent(event, mode));
      counts[mode] = receipt.matched_count;
    }
  } finally {
    await api.setMode(original);
  }
  return {
    semantic: counts.semantic ?? 0,
    syntactic: counts.syntactic ?? 0,
    restoredMode: original,
  };
}
