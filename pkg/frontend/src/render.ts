// Render every screen to an HTML string. No DOM access here, so the exact
// markup (including what is *not* in it) is testable in plain node.

import type { DiffHunk } from "./diff.js";
import type { ItemView, ReviewState } from "./controller.js";
import { VERDICT_CHOICES, type ProgressResponse, type VerdictCategory } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function renderState(state: ReviewState): string {
  switch (state.kind) {
    case "loading":
      return '<p class="loading">Loading…</p>';
    case "item":
      return renderItem(state.view, state.selected, state.notice);
    case "done":
      return renderDone(state.annotated, state.total);
    case "error":
      return renderError(state.message, state.retryable);
  }
}

export function renderItem(
  view: ItemView,
  selected: VerdictCategory | null,
  notice: string | null,
): string {
  const parts: string[] = [];
  parts.push('<section class="item">');
  parts.push(
    `<header><h2>Item ${escapeHtml(view.itemId)}</h2>` +
      `<span class="position">${view.position} of ${view.total}</span></header>`,
  );
  if (notice !== null) {
    parts.push(`<p class="notice" role="status">${escapeHtml(notice)}</p>`);
  }
  parts.push('<div class="panes">');
  parts.push(pane("Buggy source", view.buggySource));
  parts.push(pane("Compiler error", view.compilerMessage + diagnosticsBlock(view)));
  parts.push(pane("Proposed fix", view.fixedSource));
  parts.push("</div>");
  parts.push(renderDiff(view.diffHunks));
  parts.push(`<p class="compile-status">Fix compile status: ${escapeHtml(view.compileStatus)}</p>`);
  parts.push(renderChoices(selected));
  parts.push('<button type="button" id="submit">Submit verdict</button>');
  parts.push("</section>");
  return parts.join("\n");
}

function pane(title: string, body: string): string {
  return `<div class="pane"><h3>${escapeHtml(title)}</h3><pre>${escapeHtml(body)}</pre></div>`;
}

function diagnosticsBlock(view: ItemView): string {
  // Folded into the compiler-error pane as plain text lines.
  if (view.diagnostics.length === 0) return "";
  const lines = view.diagnostics.map((d) => {
    const where = d.column === null ? `${d.line}` : `${d.line}:${d.column}`;
    return `${d.file}:${where}: ${d.severity}: ${d.message}`;
  });
  return "\n\n" + lines.join("\n");
}

export function renderDiff(hunks: DiffHunk[]): string {
  if (hunks.length === 0) {
    return '<p class="no-diff">The proposed fix is textually identical to the buggy source.</p>';
  }
  const parts: string[] = ['<table class="diff">'];
  for (const hunk of hunks) {
    parts.push(`<tr class="hunk-header"><td colspan="4">${escapeHtml(hunk.header)}</td></tr>`);
    for (const row of hunk.rows) {
      const left = row.kind === "added" ? "" : escapeHtml(row.text);
      const right = row.kind === "removed" ? "" : escapeHtml(row.text);
      parts.push(
        `<tr class="${row.kind}">` +
          `<td class="lineno">${row.leftNo ?? ""}</td><td class="left">${left}</td>` +
          `<td class="lineno">${row.rightNo ?? ""}</td><td class="right">${right}</td>` +
          "</tr>",
      );
    }
  }
  parts.push("</table>");
  return parts.join("\n");
}

export function renderChoices(selected: VerdictCategory | null): string {
  const buttons = VERDICT_CHOICES.map((choice) => {
    const pressed = choice.category === selected ? "true" : "false";
    return (
      `<button type="button" class="choice" data-category="${choice.category}" ` +
      `aria-pressed="${pressed}">` +
      `<kbd>${choice.key}</kbd> ${escapeHtml(choice.label)}</button>`
    );
  });
  return `<div class="choices" role="group" aria-label="verdict">${buttons.join("")}</div>`;
}

export function renderDone(annotated: number, total: number): string {
  return (
    '<section class="done"><h2>All items annotated</h2>' +
    `<p>You annotated ${annotated} of ${total} items in this session.</p></section>`
  );
}

export function renderError(message: string, retryable: boolean): string {
  const retry = retryable ? '<button type="button" id="retry">Retry</button>' : "";
  return (
    `<section class="error ${retryable ? "banner" : "blocking"}" role="alert">` +
    `<p>${escapeHtml(message)}</p>${retry}</section>`
  );
}

export function renderSummary(progress: ProgressResponse): string {
  const rows = Object.keys(progress.raters)
    .sort()
    .map((rater) => {
      const count = progress.raters[rater] ?? 0;
      return `<tr><td>${escapeHtml(rater)}</td><td>${count}/${progress.total_items}</td></tr>`;
    });
  return (
    `<section class="summary"><h2>Session ${escapeHtml(progress.session_id)}</h2>` +
    `<p>Status: ${escapeHtml(progress.status)}${progress.complete ? " — complete" : ""}</p>` +
    `<table class="progress"><tr><th>Rater</th><th>Annotated</th></tr>${rows.join("")}</table>` +
    "</section>"
  );
}
