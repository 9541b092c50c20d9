/** Test doubles: a scripted fetch for the ApiClient and an in-memory
 * storage for session persistence. */

import { ApiClient, type FetchLike } from "../src/api.js";
import type { StorageLike } from "../src/codingSession.js";

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

export type Route = (url: string, init?: RequestInit) => { status?: number; body: unknown } | null;

export function makeApi(routes: Route[]): { api: ApiClient; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, init });
    for (const route of routes) {
      const match = route(url, init);
      if (match) {
        const status = match.status ?? 200;
        return new Response(JSON.stringify(match.body), {
          status,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: `no route for ${url}` }), { status: 500 });
  };
  return { api: new ApiClient("http://api.test", fetchFn), calls };
}

export class MemoryStorage implements StorageLike {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
