// Browser entry point: wires the controller and renderer to the DOM. All
// logic lives in the other modules; this file only routes events.

import { PanelClient } from "./api.js";
import { ReviewController } from "./controller.js";
import { renderState, renderSummary } from "./render.js";

function joinForm(): string {
  return `
    <section class="join">
      <h2>Join a session</h2>
      <form id="join">
        <label>Session id <input name="session" required /></label>
        <label>Rater id <input name="rater" required /></label>
        <button type="submit">Start reviewing</button>
      </form>
    </section>`;
}

function main(): void {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app element");

  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const raterId = params.get("rater");

  if (sessionId === null || raterId === null) {
    root.innerHTML = joinForm();
    const form = document.getElementById("join") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      const target = new URLSearchParams({
        session: String(data.get("session") ?? ""),
        rater: String(data.get("rater") ?? ""),
      });
      window.location.search = target.toString();
    });
    return;
  }

  const client = new PanelClient("");
  const controller = new ReviewController(client, sessionId, raterId);
  let showingSummary = false;

  const paint = (): void => {
    if (showingSummary) return;
    root.innerHTML = renderState(controller.state);
  };
  controller.onChange(paint);

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const choice = target.closest<HTMLElement>("[data-category]");
    if (choice?.dataset.category !== undefined) {
      controller.select(choice.dataset.category as never);
      return;
    }
    if (target.closest("#submit") !== null) {
      void controller.submit();
      return;
    }
    if (target.closest("#retry") !== null) {
      void controller.refresh();
      return;
    }
    if (target.closest("#back") !== null) {
      showingSummary = false;
      paint();
    }
  });

  document.addEventListener("keydown", (event) => {
    if (showingSummary) return;
    if (event.target instanceof HTMLInputElement) return;
    if (controller.selectByKey(event.key)) {
      event.preventDefault();
      return;
    }
    if (event.key === "Enter") {
      event.preventDefault();
      void controller.submit();
    }
  });

  const summaryButton = document.getElementById("show-summary");
  summaryButton?.addEventListener("click", () => {
    void client.fetchProgress(sessionId).then((progress) => {
      showingSummary = true;
      root.innerHTML =
        renderSummary(progress) + '<button type="button" id="back">Back to review</button>';
    });
  });

  void controller.start();
}

main();
