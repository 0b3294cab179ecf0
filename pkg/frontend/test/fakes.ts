/** Test doubles: a hand-cranked map adapter and a scripted fetch. */

import type { MapAdapter, MarkerSpec } from "../src/mapPanel.js";
import type { Bounds, ChatResponse, MarkerGroup, ViewportResponse } from "../src/types.js";

export class FakeMapAdapter implements MapAdapter {
  bounds: Bounds = { south: -44, west: 112, north: -9, east: 154 };
  zoom = 12; // above the clustering threshold by default
  markers: MarkerSpec[] = [];
  views: Array<{ latitude: number; longitude: number; zoom: number }> = [];
  private settleCallbacks: Array<() => void> = [];

  mount(_container: HTMLElement): void {}

  getBounds(): Bounds {
    return this.bounds;
  }

  getZoom(): number {
    return this.zoom;
  }

  setView(latitude: number, longitude: number, zoom: number): void {
    this.views.push({ latitude, longitude, zoom });
    this.zoom = zoom;
  }

  setMarkers(markers: MarkerSpec[]): void {
    this.markers = markers;
  }

  onSettle(callback: () => void): void {
    this.settleCallbacks.push(callback);
  }

  /** Simulate the user finishing a pan/zoom. */
  settle(bounds?: Partial<Bounds>): void {
    if (bounds) this.bounds = { ...this.bounds, ...bounds };
    for (const callback of this.settleCallbacks) callback();
  }
}

export interface FetchLogEntry {
  url: string;
  body?: unknown;
}

export interface FetchStubOptions {
  specimens?: (url: URL) => ViewportResponse;
  chat?: (body: Record<string, unknown>) => ChatResponse;
  /** when set, specimen responses wait until released */
  gate?: { promises: Array<() => void> };
}

export function stubFetch(options: FetchStubOptions) {
  const calls: FetchLogEntry[] = [];

  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), "http://test.local");
    const entry: FetchLogEntry = { url: url.pathname + url.search };
    if (init?.body) entry.body = JSON.parse(String(init.body));
    calls.push(entry);

    if (url.pathname === "/api/specimens") {
      const payload = options.specimens
        ? options.specimens(url)
        : emptyViewport();
      if (options.gate) {
        await new Promise<void>((resolve) => {
          options.gate!.promises.push(resolve);
        });
      }
      return json(payload);
    }
    if (url.pathname === "/api/chat") {
      if (!options.chat) throw new Error("unexpected chat call");
      return json(options.chat(entry.body as Record<string, unknown>));
    }
    if (url.pathname === "/api/health") {
      return json({ status: "ok", mode: "offline", record_count: 5000 });
    }
    throw new Error(`unexpected request: ${url.pathname}`);
  }) as typeof fetch;

  return { fetchFn, calls };
}

function json(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "content-type": "application/json" },
  });
}

export function emptyViewport(): ViewportResponse {
  return { groups: [], truncated: false, total_groups: 0 };
}

export function groupOf(records: number, options: Partial<MarkerGroup> = {}): MarkerGroup {
  return {
    latitude: options.latitude ?? -33.8696,
    longitude: options.longitude ?? 151.2111,
    has_any_image: options.has_any_image ?? true,
    records: Array.from({ length: records }, (_, i) => ({
      record_id: `r${i}`,
      catalogue_number: `O.${i + 1}`,
      scientific_name: ["Ocyphaps lophotes", "Malurus cyaneus",
                        "Dacelo novaeguineae"][i % 3],
      common_name: ["Crested Pigeon", "Superb Fairywren",
                    "Laughing Kookaburra"][i % 3],
      state_province: "New South Wales",
      locality: "Sydney Harbour Foreshore",
      year: 2010 + i,
      event_date: null,
      collector: "L. Gibson",
      image_urls: i === 0 ? ["https://media.example.org/r0/0.jpg"] : [],
    })),
  };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
