/** Browser entry point: mount the dashboard against a running API. */

import { ApiClient } from "./api.js";
import { mount } from "./app.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient({
  baseUrl: params.get("api") ?? "http://localhost:8000",
  token: params.get("token") ?? undefined,
});

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

mount(root, {
  api,
  lang: params.get("lang") ?? "en",
  actor: params.get("actor") ?? "moderator",
});
