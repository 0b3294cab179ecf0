/** Browser bootstrap: same-origin API by default, overridable via
 * window.EXPLORER_CONFIG for split deployments. */

import { ApiClient } from "./api.js";
import { createApp } from "./app.js";
import { LeafletMapAdapter } from "./leafletAdapter.js";

interface ExplorerConfig {
  apiBaseUrl?: string;
  tileUrlTemplate?: string;
  tileAttribution?: string;
}

declare global {
  interface Window {
    EXPLORER_CONFIG?: ExplorerConfig;
  }
}

const config = window.EXPLORER_CONFIG ?? {};
const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

createApp(
  root,
  new ApiClient(config.apiBaseUrl ?? ""),
  new LeafletMapAdapter(config.tileUrlTemplate, config.tileAttribution),
);
