import { readFileSync } from "node:fs";

export interface TapeEntry {
  method: "GET" | "POST";
  path: string;
  body: unknown;
  response: unknown;
}

export function loadTape(): TapeEntry[] {
  const url = new URL("../fixtures/api_replay.json", import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")).tape as TapeEntry[];
}

export function tapeResponse<T>(tape: TapeEntry[], path: string, occurrence = 0): T {
  const hits = tape.filter((e) => e.path === path);
  if (occurrence >= hits.length) {
    throw new Error(`fixture has ${hits.length} ${path} responses, wanted #${occurrence}`);
  }
  return hits[occurrence].response as T;
}

/** The polygon the recorded interaction drew (the whole-map rectangle). */
export const RECORDED_RING = [
  [-0.001, -0.001], [0.03, -0.001], [0.03, 0.03], [-0.001, 0.03],
];
