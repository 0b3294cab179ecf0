/** Payload shapes of the gateway JSON API. */

export interface MarkerRecord {
  record_id: string;
  catalogue_number: string;
  scientific_name: string;
  common_name: string | null;
  state_province: string | null;
  locality: string | null;
  year: number | null;
  event_date: string | null;
  collector: string | null;
  image_urls: string[];
}

export interface MarkerGroup {
  latitude: number;
  longitude: number;
  has_any_image: boolean;
  records: MarkerRecord[];
}

export interface ViewportResponse {
  groups: MarkerGroup[];
  truncated: boolean;
  total_groups: number;
}

export interface ChatResponse {
  session_id: string;
  reply: string;
  trace?: unknown[];
}

export interface HealthResponse {
  status: string;
  mode: string;
  record_count: number;
}

export interface Bounds {
  south: number;
  west: number;
  north: number;
  east: number;
}
