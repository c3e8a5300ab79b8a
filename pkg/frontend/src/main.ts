/** Browser entry point: connect to the service named by the `?service=`
 * query parameter (default: the page's own origin) and mount the console. */

import { mountApp, webSocketConnector } from "./app.js";
import { ServiceClient } from "./client.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? `${window.location.protocol}//${window.location.host}`;

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
mountApp(root, {
  client: new ServiceClient(base),
  connect: webSocketConnector,
});
