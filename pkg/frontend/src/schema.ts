// Wire schema for the simulation service (JSON text frames, version 1).
// Every frame carries a `v` version field; mismatches fail loudly rather
// than rendering garbage.

import { z } from "zod";

export const SCHEMA_VERSION = 1;

export const frontEntrySchema = z.object({
  u: z.number(),
  J1: z.number(),
  J2: z.number(),
});

export const stateSchema = z.object({
  v: z.literal(SCHEMA_VERSION),
  type: z.literal("state"),
  t: z.number(),
  p: z.number(),
  v_kmh: z.number(),
  S: z.number(),
  u: z.number(),
  rho: z.number().min(0).max(1),
  scenario: z.string(),
  limits: z.object({ vmin: z.number(), vmax: z.number() }),
  front: z.array(frontEntrySchema),
  selected: z.number().int(),
});

export const finishedSchema = z.object({
  v: z.literal(SCHEMA_VERSION),
  type: z.literal("finished"),
  totals: z.object({ J1: z.number(), J2: z.number() }),
});

export const errorSchema = z.object({
  v: z.literal(SCHEMA_VERSION),
  type: z.literal("error"),
  message: z.string(),
});

export const serverMessageSchema = z.discriminatedUnion("type", [
  stateSchema,
  finishedSchema,
  errorSchema,
]);

export type StateMessage = z.infer<typeof stateSchema>;
export type FinishedMessage = z.infer<typeof finishedSchema>;
export type ErrorMessage = z.infer<typeof errorSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;

export type ClientMessage =
  | { type: "set_rho"; value: number }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "set_speed"; factor: number }
  | { type: "reset"; track?: string };

/** Parse one incoming frame; returns null for anything off-schema. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  const result = serverMessageSchema.safeParse(data);
  return result.success ? result.data : null;
}
