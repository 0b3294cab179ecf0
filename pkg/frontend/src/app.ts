/** Split-panel application: interactive map left, conversational agent
 * right. Both panels speak only to the gateway API. */

import type { ApiClient } from "./api.js";
import { ChatPanel } from "./chatPanel.js";
import { MapAdapter, MapPanel } from "./mapPanel.js";

export interface App {
  root: HTMLElement;
  mapPanel: MapPanel;
  chatPanel: ChatPanel;
}

export function createApp(
  root: HTMLElement,
  api: ApiClient,
  map: MapAdapter,
  maxMarkers = 500,
): App {
  root.classList.add("explorer-app");
  const mapPanel = new MapPanel(api, map, maxMarkers);
  const chatPanel = new ChatPanel(api);
  root.replaceChildren(mapPanel.element, chatPanel.element);
  mapPanel.refresh(); // initial viewport load
  return { root, mapPanel, chatPanel };
}
