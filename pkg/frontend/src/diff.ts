// Line diff between the buggy source and the proposed fix, computed
// client-side from the two raw strings. Classic longest-common-subsequence
// alignment; sources here are short snippets, so the O(n*m) table is fine.

export type DiffKind = "same" | "removed" | "added";

export type DiffRow = {
  kind: DiffKind;
  leftNo: number | null; // 1-based line number in the buggy source
  rightNo: number | null; // 1-based line number in the fixed source
  text: string;
};

export type DiffHunk = {
  header: string; // "@@ -start,count +start,count @@"
  rows: DiffRow[];
};

export function splitLines(text: string): string[] {
  if (text === "") return [];
  const lines = text.split("\n");
  // A trailing newline does not add an extra empty line.
  if (lines[lines.length - 1] === "") lines.pop();
  return lines;
}

export function diffLines(beforeText: string, afterText: string): DiffRow[] {
  const a = splitLines(beforeText);
  const b = splitLines(afterText);
  const n = a.length;
  const m = b.length;

  // lcs[i][j] = length of the LCS of a[i..] and b[j..].
  const lcs: Int32Array[] = [];
  for (let i = 0; i <= n; i += 1) lcs.push(new Int32Array(m + 1));
  for (let i = n - 1; i >= 0; i -= 1) {
    const row = lcs[i]!;
    const below = lcs[i + 1]!;
    for (let j = m - 1; j >= 0; j -= 1) {
      row[j] = a[i] === b[j] ? below[j + 1]! + 1 : Math.max(below[j]!, row[j + 1]!);
    }
  }

  const rows: DiffRow[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i] === b[j]) {
      rows.push({ kind: "same", leftNo: i + 1, rightNo: j + 1, text: a[i]! });
      i += 1;
      j += 1;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) {
      rows.push({ kind: "removed", leftNo: i + 1, rightNo: null, text: a[i]! });
      i += 1;
    } else {
      rows.push({ kind: "added", leftNo: null, rightNo: j + 1, text: b[j]! });
      j += 1;
    }
  }
  for (; i < n; i += 1) rows.push({ kind: "removed", leftNo: i + 1, rightNo: null, text: a[i]! });
  for (; j < m; j += 1) rows.push({ kind: "added", leftNo: null, rightNo: j + 1, text: b[j]! });
  return rows;
}

export function diffHunks(beforeText: string, afterText: string, context = 2): DiffHunk[] {
  const rows = diffLines(beforeText, afterText);
  const keep = new Array<boolean>(rows.length).fill(false);
  for (let idx = 0; idx < rows.length; idx += 1) {
    if (rows[idx]!.kind === "same") continue;
    const lo = Math.max(0, idx - context);
    const hi = Math.min(rows.length - 1, idx + context);
    for (let k = lo; k <= hi; k += 1) keep[k] = true;
  }

  const hunks: DiffHunk[] = [];
  let current: DiffRow[] = [];
  for (let idx = 0; idx < rows.length; idx += 1) {
    if (keep[idx]) {
      current.push(rows[idx]!);
    } else if (current.length > 0) {
      hunks.push(makeHunk(current));
      current = [];
    }
  }
  if (current.length > 0) hunks.push(makeHunk(current));
  return hunks;
}

function makeHunk(rows: DiffRow[]): DiffHunk {
  const leftNos = rows.filter((r) => r.leftNo !== null).map((r) => r.leftNo!);
  const rightNos = rows.filter((r) => r.rightNo !== null).map((r) => r.rightNo!);
  const leftStart = leftNos.length > 0 ? leftNos[0]! : 0;
  const rightStart = rightNos.length > 0 ? rightNos[0]! : 0;
  return {
    header: `@@ -${leftStart},${leftNos.length} +${rightStart},${rightNos.length} @@`,
    rows,
  };
}
