import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { RunPoller } from "./poll.js";

const api = new ApiClient();
const app = new App(
  document.getElementById("app") ?? document.body,
  api,
  new RunPoller(api),
);
app.mount();
