/** Typed client for the gateway API; the UI talks to nothing else. */

import type {
  Bounds,
  ChatResponse,
  HealthResponse,
  ViewportResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, detail: string) {
    super(`${code}: ${detail}`);
  }
}

async function decode<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body.error ?? "error", body.detail ?? "");
  }
  return body as T;
}

export class ApiClient {
  private readonly fetchFn: typeof fetch;

  constructor(private readonly baseUrl: string = "", fetchFn?: typeof fetch) {
    this.fetchFn = fetchFn ?? fetch.bind(globalThis);
  }

  async fetchSpecimens(
    bounds: Bounds,
    zoom: number,
    imagesOnly: boolean,
    maxMarkers = 500,
  ): Promise<ViewportResponse> {
    const bbox = [bounds.south, bounds.west, bounds.north, bounds.east].join(",");
    const params = new URLSearchParams({
      bbox,
      zoom: String(zoom),
      images_only: String(imagesOnly),
      max: String(maxMarkers),
    });
    const response = await this.fetchFn(
      `${this.baseUrl}/api/specimens?${params.toString()}`,
    );
    return decode<ViewportResponse>(response);
  }

  async sendChat(
    text: string,
    sessionId: string | null,
    images: string[],
  ): Promise<ChatResponse> {
    const body: Record<string, unknown> = { text };
    if (sessionId) body.session_id = sessionId;
    if (images.length) body.images = images;
    const response = await this.fetchFn(`${this.baseUrl}/api/chat`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return decode<ChatResponse>(response);
  }

  async fetchHealth(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/api/health`);
    return decode<HealthResponse>(response);
  }
}
