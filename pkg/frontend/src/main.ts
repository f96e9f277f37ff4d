/** Entry point: resolve the annotator id, then hand off to the app.
 *
 * The id comes from the ?annotator= query parameter so a session
 * survives reloads without any client-side storage. Without one, a
 * small form asks for it and reloads with the parameter set.
 */

import { ApiClient } from "./api.js";
import { AnnotateApp } from "./app.js";

function renderLogin(root: HTMLElement): void {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  const wrap = doc.createElement("div");
  wrap.className = "login-form";
  const label = doc.createElement("p");
  label.textContent = "annotator id";
  const input = doc.createElement("input");
  input.type = "text";
  const go = doc.createElement("button");
  go.textContent = "start";
  go.addEventListener("click", () => {
    const id = input.value.trim();
    if (!id) return;
    const url = new URL(window.location.href);
    url.searchParams.set("annotator", id);
    window.location.href = url.toString();
  });
  wrap.append(label, input, go);
  root.append(wrap);
}

const root = document.getElementById("app");
if (root) {
  const annotator = new URLSearchParams(window.location.search).get("annotator");
  if (annotator) {
    const app = new AnnotateApp(root, new ApiClient("", annotator));
    void app.start();
  } else {
    renderLogin(root);
  }
}
