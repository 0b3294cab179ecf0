/** Leaflet-backed MapAdapter. The library is loaded as a global (see
 * index.html); when it is missing the map pane degrades to a notice so
 * the chat panel still works. */

import type * as Leaflet from "leaflet";
import type { MapAdapter, MarkerSpec } from "./mapPanel.js";

declare global {
  interface Window {
    L?: typeof Leaflet;
  }
}

const DEFAULT_CENTER: [number, number] = [-33.8688, 151.2093];
const DEFAULT_ZOOM = 6;

export class LeafletMapAdapter implements MapAdapter {
  private map: Leaflet.Map | null = null;
  private layer: Leaflet.LayerGroup | null = null;
  private settleCallbacks: Array<() => void> = [];

  constructor(
    private readonly tileUrlTemplate: string =
      "https://tile.openstreetmap.org/{z}/{x}/{y}.png",
    private readonly attribution: string =
      '&copy; <a href="https://www.openstreetmap.org/copyright">OpenStreetMap</a> contributors',
  ) {}

  mount(container: HTMLElement): void {
    const L = window.L;
    if (!L) {
      const notice = document.createElement("p");
      notice.className = "map-missing";
      notice.textContent =
        "Map library unavailable; the conversational agent still works.";
      container.appendChild(notice);
      return;
    }
    this.map = L.map(container).setView(DEFAULT_CENTER, DEFAULT_ZOOM);
    L.tileLayer(this.tileUrlTemplate, {
      attribution: this.attribution,
      maxZoom: 19,
    }).addTo(this.map);
    this.layer = L.layerGroup().addTo(this.map);
    this.map.on("moveend zoomend", () => {
      for (const callback of this.settleCallbacks) callback();
    });
  }

  getBounds() {
    if (!this.map) return { south: -44, west: 112, north: -9, east: 154 };
    const bounds = this.map.getBounds();
    return {
      south: bounds.getSouth(),
      west: bounds.getWest(),
      north: bounds.getNorth(),
      east: bounds.getEast(),
    };
  }

  getZoom(): number {
    return this.map ? this.map.getZoom() : DEFAULT_ZOOM;
  }

  setView(latitude: number, longitude: number, zoom: number): void {
    this.map?.setView([latitude, longitude], zoom);
  }

  setMarkers(markers: MarkerSpec[]): void {
    const L = window.L;
    if (!L || !this.layer) return;
    this.layer.clearLayers();
    for (const spec of markers) {
      const marker = L.marker([spec.latitude, spec.longitude], {
        icon: markerIcon(L, spec),
      });
      marker.on("click", spec.onClick);
      this.layer.addLayer(marker);
    }
  }

  onSettle(callback: () => void): void {
    this.settleCallbacks.push(callback);
  }
}

function markerIcon(L: typeof Leaflet, spec: MarkerSpec): Leaflet.DivIcon {
  const classes = ["marker-dot"];
  if (spec.isCluster) classes.push("marker-cluster");
  if (spec.hasImage) classes.push("marker-has-image");
  const label = spec.count > 1 ? String(spec.count) : "";
  return L.divIcon({
    className: classes.join(" "),
    html: `<span>${label}</span>`,
    iconSize: spec.isCluster ? [34, 34] : [18, 18],
  });
}
