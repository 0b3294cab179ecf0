/** The map side of the split panel.
 *
 * Reloads markers for the current bounds on every pan/zoom settle
 * (latest-wins), renders cluster markers, and opens a popup when a marker
 * is clicked. Co-located records page through a carousel. A toggle limits
 * the load to image-bearing records.
 */

import type { ApiClient } from "./api.js";
import { CLUSTER_MAX_ZOOM, Cluster, clusterGroups } from "./cluster.js";
import { LatestWins } from "./scheduler.js";
import type { MarkerGroup, MarkerRecord } from "./types.js";

export interface MarkerSpec {
  latitude: number;
  longitude: number;
  count: number;
  isCluster: boolean;
  hasImage: boolean;
  onClick: () => void;
}

/** The part of the map library the panel depends on. */
export interface MapAdapter {
  mount(container: HTMLElement): void;
  getBounds(): { south: number; west: number; north: number; east: number };
  getZoom(): number;
  setView(latitude: number, longitude: number, zoom: number): void;
  setMarkers(markers: MarkerSpec[]): void;
  onSettle(callback: () => void): void;
}

export class MapPanel {
  readonly element: HTMLElement;
  imagesOnly = false;
  truncated = false;
  groups: MarkerGroup[] = [];
  selectedGroup: MarkerGroup | null = null;
  carouselIndex = 0;

  private readonly loader = new LatestWins();
  private readonly popup: HTMLElement;
  private readonly status: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly map: MapAdapter,
    private readonly maxMarkers = 500,
  ) {
    this.element = el("section", "map-panel");
    const mapHost = el("div", "map-host");
    this.element.appendChild(mapHost);

    const controls = el("div", "map-controls");
    const label = el("label", "images-toggle");
    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.setAttribute("data-testid", "images-only-toggle");
    toggle.addEventListener("change", () => {
      this.imagesOnly = toggle.checked;
      this.closePopup();
      this.refresh();
    });
    label.appendChild(toggle);
    label.appendChild(document.createTextNode(" Records with images only"));
    controls.appendChild(label);
    this.status = el("span", "map-status");
    controls.appendChild(this.status);
    this.element.appendChild(controls);

    this.popup = el("div", "marker-popup");
    this.popup.hidden = true;
    this.element.appendChild(this.popup);

    this.map.mount(mapHost);
    this.map.onSettle(() => this.refresh());
  }

  /** One viewport load; concurrent settles coalesce to the newest. */
  refresh(): void {
    this.loader.schedule(async () => {
      const bounds = this.map.getBounds();
      const zoom = this.map.getZoom();
      const response = await this.api.fetchSpecimens(
        bounds, zoom, this.imagesOnly, this.maxMarkers);
      this.groups = response.groups;
      this.truncated = response.truncated;
      this.renderMarkers(zoom);
      this.status.textContent = response.truncated
        ? `${response.total_groups} locations (zoom in for more)`
        : `${response.total_groups} locations`;
    });
  }

  private renderMarkers(zoom: number): void {
    const clusters = clusterGroups(this.groups, zoom);
    const markers = clusters.map((cluster): MarkerSpec => ({
      latitude: cluster.latitude,
      longitude: cluster.longitude,
      count: cluster.recordCount,
      isCluster: cluster.groups.length > 1,
      hasImage: cluster.hasAnyImage,
      onClick: () => this.activate(cluster),
    }));
    this.map.setMarkers(markers);
  }

  private activate(cluster: Cluster): void {
    if (cluster.groups.length > 1) {
      // expand: zoom towards the cluster until groups separate
      const zoom = Math.min(this.map.getZoom() + 2, CLUSTER_MAX_ZOOM + 3);
      this.map.setView(cluster.latitude, cluster.longitude, zoom);
      return;
    }
    this.openGroup(cluster.groups[0]);
  }

  openGroup(group: MarkerGroup): void {
    this.selectedGroup = group;
    this.carouselIndex = 0;
    this.renderPopup();
  }

  closePopup(): void {
    this.selectedGroup = null;
    this.popup.hidden = true;
    this.popup.replaceChildren();
  }

  private renderPopup(): void {
    const group = this.selectedGroup;
    if (!group) return;
    const pages = group.records.length;
    if (this.carouselIndex >= pages) this.carouselIndex = 0;

    this.popup.hidden = false;
    this.popup.replaceChildren();
    this.popup.setAttribute("data-testid", "marker-popup");

    const close = document.createElement("button");
    close.className = "popup-close";
    close.textContent = "×";
    close.addEventListener("click", () => this.closePopup());
    this.popup.appendChild(close);

    const carousel = el("div", "carousel");
    carousel.setAttribute("data-testid", "carousel");
    carousel.setAttribute("data-pages", String(pages));

    if (pages > 1) {
      const nav = el("div", "carousel-nav");
      const prev = document.createElement("button");
      prev.textContent = "‹";
      prev.setAttribute("data-testid", "carousel-prev");
      prev.addEventListener("click", () => this.turn(-1));
      const indicator = el("span", "carousel-indicator");
      indicator.setAttribute("data-testid", "carousel-indicator");
      indicator.textContent = `${this.carouselIndex + 1} / ${pages}`;
      const next = document.createElement("button");
      next.textContent = "›";
      next.setAttribute("data-testid", "carousel-next");
      next.addEventListener("click", () => this.turn(1));
      nav.append(prev, indicator, next);
      carousel.appendChild(nav);
    }

    carousel.appendChild(recordCard(group.records[this.carouselIndex]));
    this.popup.appendChild(carousel);
  }

  private turn(step: number): void {
    const group = this.selectedGroup;
    if (!group) return;
    const pages = group.records.length;
    this.carouselIndex = (this.carouselIndex + step + pages) % pages;
    this.renderPopup();
  }
}

function recordCard(record: MarkerRecord): HTMLElement {
  const card = el("div", "record-card");
  card.setAttribute("data-testid", "record-card");
  if (record.image_urls.length) {
    const img = document.createElement("img");
    img.src = record.image_urls[0];
    img.alt = record.common_name ?? record.scientific_name;
    img.className = "record-image";
    card.appendChild(img);
  }
  const title = el("h3", "record-title");
  title.textContent = record.common_name ?? record.scientific_name;
  card.appendChild(title);
  const scientific = el("p", "record-scientific");
  scientific.textContent = record.scientific_name;
  card.appendChild(scientific);

  const meta = el("dl", "record-meta");
  addMeta(meta, "Catalogue number", record.catalogue_number);
  addMeta(meta, "Collector", record.collector);
  addMeta(meta, "Date", record.event_date ?? numberOrNull(record.year));
  addMeta(meta, "Location", [record.locality, record.state_province]
    .filter(Boolean).join(", ") || null);
  card.appendChild(meta);
  return card;
}

function numberOrNull(value: number | null): string | null {
  return value === null ? null : String(value);
}

function addMeta(list: HTMLElement, term: string, value: string | null): void {
  if (!value) return;
  const dt = document.createElement("dt");
  dt.textContent = term;
  const dd = document.createElement("dd");
  dd.textContent = value;
  list.append(dt, dd);
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
