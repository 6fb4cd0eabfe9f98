/** Test support: fixture loading and a recording fake fetch. */

import { readFileSync } from "node:fs";
import type { FetchLike } from "../src/api.js";

export function fixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}

export function fixtureText(name: string): string {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return readFileSync(url, "utf8");
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface Route {
  status?: number;
  body: unknown;
  text?: string;
}

/** Fake fetch keyed by "METHOD path"; records every call it serves. */
export function makeFetch(routes: Record<string, Route>) {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const key = `${method} ${url}`;
    const route = routes[key];
    if (!route) {
      throw new Error(`no route for ${key}`);
    }
    calls.push({
      url,
      method,
      body: init?.body ? JSON.parse(init.body) : undefined,
    });
    return {
      status: route.status ?? 200,
      json: async () => route.body,
      text: async () => route.text ?? JSON.stringify(route.body),
    };
  };
  return { fetchFn, calls };
}
