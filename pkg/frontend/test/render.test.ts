import { describe, expect, test } from "vitest";

import { itemViewFrom, type ItemView } from "../src/controller.js";
import {
  escapeHtml,
  renderChoices,
  renderDiff,
  renderDone,
  renderError,
  renderItem,
  renderState,
  renderSummary,
} from "../src/render.js";
import { VERDICT_CHOICES, type RaterItem } from "../src/types.js";

function sampleItem(overrides: Partial<RaterItem> = {}): RaterItem {
  return {
    item_id: "it-1",
    buggy_source: "int main() {\n  int a = 1\n  return a;\n}\n",
    compiler_message: "snippet.cpp:2:12: error: expected ';'",
    fixed_source: "int main() {\n  int a = 1;\n  return a;\n}\n",
    compile_status: "pass",
    diagnostics: [
      { file: "snippet.cpp", line: 2, column: 12, severity: "error", message: "expected ';'" },
    ],
    position: 1,
    total: 5,
    ...overrides,
  };
}

function view(overrides: Partial<RaterItem> = {}): ItemView {
  return itemViewFrom(sampleItem(overrides));
}

describe("escapeHtml", () => {
  test("neutralizes markup characters", () => {
    expect(escapeHtml('<b a="1">&\'</b>')).toBe("&lt;b a=&quot;1&quot;&gt;&amp;&#39;&lt;/b&gt;");
  });

  test("plain text passes through", () => {
    expect(escapeHtml("int a = 1;")).toBe("int a = 1;");
  });
});

describe("renderChoices", () => {
  test("renders exactly the four categories, in order", () => {
    const html = renderChoices(null);
    const found = [...html.matchAll(/data-category="([a-z_]+)"/g)].map((m) => m[1]);
    expect(found).toEqual([
      "genuine_fix",
      "trivial_deletion",
      "excessive_modification",
      "invalid_fix",
    ]);
  });

  test("keyboard hints 1-4 follow the listed order", () => {
    const html = renderChoices(null);
    const keys = [...html.matchAll(/<kbd>(\d)<\/kbd>/g)].map((m) => m[1]);
    expect(keys).toEqual(["1", "2", "3", "4"]);
    expect(VERDICT_CHOICES.map((c) => c.key)).toEqual(["1", "2", "3", "4"]);
  });

  test("only the selected choice is pressed", () => {
    const html = renderChoices("trivial_deletion");
    const pressed = [...html.matchAll(/data-category="([a-z_]+)" aria-pressed="true"/g)];
    expect(pressed.length).toBe(1);
    expect(pressed[0]![1]).toBe("trivial_deletion");
  });
});

describe("renderItem", () => {
  test("shows position, sources, compiler message, and a submit button", () => {
    const html = renderItem(view(), null, null);
    expect(html).toContain("1 of 5");
    expect(html).toContain("Item it-1");
    expect(html).toContain("int a = 1");
    expect(html).toContain("expected &#39;;&#39;");
    expect(html).toContain('id="submit"');
  });

  test("escapes hostile source text", () => {
    const html = renderItem(
      view({ buggy_source: '<script>alert("x")</script>\n' }),
      null,
      null,
    );
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });

  test("diff marks the changed line on both sides", () => {
    const html = renderItem(view(), null, null);
    expect(html).toContain('<tr class="removed">');
    expect(html).toContain('<tr class="added">');
    expect(html).toContain("int a = 1;");
  });

  test("notice appears when given and not otherwise", () => {
    expect(renderItem(view(), null, "Already annotated; skipped.")).toContain(
      "Already annotated; skipped.",
    );
    expect(renderItem(view(), null, null)).not.toContain('class="notice"');
  });

  test("diagnostics fold into the compiler pane", () => {
    const html = renderItem(view(), null, null);
    expect(html).toContain("snippet.cpp:2:12: error:");
  });

  test("never shows a machine verdict, even if the payload smuggles one", () => {
    // The service strips the field; the view constructor must too.
    const hostile = {
      ...sampleItem(),
      machine_verdict: { category: "genuine_fix", rationale: "MACHINE-SECRET" },
    } as RaterItem;
    const html = renderItem(itemViewFrom(hostile), null, null);
    expect(html).not.toContain("machine_verdict");
    expect(html).not.toContain("MACHINE-SECRET");
  });
});

describe("renderDiff", () => {
  test("identical sources render a no-diff note instead of a table", () => {
    const html = renderDiff([]);
    expect(html).toContain("textually identical");
    expect(html).not.toContain("<table");
  });
});

describe("renderState and friends", () => {
  test("loading state", () => {
    expect(renderState({ kind: "loading" })).toContain("Loading");
  });

  test("done state shows the counts", () => {
    const html = renderDone(5, 5);
    expect(html).toContain("5 of 5");
    expect(renderState({ kind: "done", annotated: 3, total: 7 })).toContain("3 of 7");
  });

  test("retryable error offers a retry button, blocking error does not", () => {
    expect(renderError("service unreachable", true)).toContain('id="retry"');
    expect(renderError("unknown rater", false)).not.toContain('id="retry"');
  });

  test("item state routes through renderItem", () => {
    const html = renderState({ kind: "item", view: view(), selected: null, notice: null });
    expect(html).toContain("Item it-1");
  });
});

describe("renderSummary", () => {
  test("per-rater counts in rater order", () => {
    const html = renderSummary({
      session_id: "s1",
      status: "open",
      total_items: 5,
      raters: { r2: 5, r1: 3 },
      complete: false,
    });
    expect(html).toContain("Session s1");
    expect(html).toContain("<td>r1</td><td>3/5</td>");
    expect(html).toContain("<td>r2</td><td>5/5</td>");
    expect(html.indexOf("r1")).toBeLessThan(html.indexOf("r2"));
  });

  test("complete session says so", () => {
    const html = renderSummary({
      session_id: "s1",
      status: "open",
      total_items: 2,
      raters: { r1: 2 },
      complete: true,
    });
    expect(html).toContain("complete");
  });
});
