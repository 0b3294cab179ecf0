/** Client-side visual clustering of nearby marker groups at low zoom.
 *
 * Server groups are exact co-locations; on a zoomed-out map many distinct
 * groups crowd together, so they are binned into grid cells sized by zoom.
 * Clicking a multi-group cluster zooms in to expand it.
 */

import type { MarkerGroup } from "./types.js";

export const CLUSTER_MAX_ZOOM = 11;

export interface Cluster {
  latitude: number;
  longitude: number;
  groups: MarkerGroup[];
  recordCount: number;
  hasAnyImage: boolean;
}

export function clusterGroups(
  groups: MarkerGroup[],
  zoom: number,
  maxClusterZoom = CLUSTER_MAX_ZOOM,
): Cluster[] {
  if (zoom > maxClusterZoom) {
    return groups.map((group) => ({
      latitude: group.latitude,
      longitude: group.longitude,
      groups: [group],
      recordCount: group.records.length,
      hasAnyImage: group.has_any_image,
    }));
  }
  const cellDegrees = 360 / Math.pow(2, zoom + 3);
  const cells = new Map<string, MarkerGroup[]>();
  for (const group of groups) {
    const key = `${Math.floor(group.latitude / cellDegrees)}:${Math.floor(
      group.longitude / cellDegrees,
    )}`;
    const bucket = cells.get(key);
    if (bucket) bucket.push(group);
    else cells.set(key, [group]);
  }
  const clusters: Cluster[] = [];
  for (const bucket of cells.values()) {
    const n = bucket.length;
    clusters.push({
      latitude: bucket.reduce((s, g) => s + g.latitude, 0) / n,
      longitude: bucket.reduce((s, g) => s + g.longitude, 0) / n,
      groups: bucket,
      recordCount: bucket.reduce((s, g) => s + g.records.length, 0),
      hasAnyImage: bucket.some((g) => g.has_any_image),
    });
  }
  clusters.sort((a, b) => a.latitude - b.latitude || a.longitude - b.longitude);
  return clusters;
}
