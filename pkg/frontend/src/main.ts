import { PlaygroundApp } from "./app";

const root = document.getElementById("app");
if (root !== null) {
  const params = new URLSearchParams(window.location.search);
  const app = new PlaygroundApp(root, { apiBase: params.get("api") ?? "" });
  void app.init();
}
