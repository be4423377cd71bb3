// Wire types mirror the panel service JSON field-for-field (snake_case and
// all); view types are what the renderer consumes.

export type VerdictCategory =
  | "genuine_fix"
  | "trivial_deletion"
  | "excessive_modification"
  | "invalid_fix";

export type VerdictChoice = {
  category: VerdictCategory;
  label: string;
  key: string; // keyboard shortcut
};

// Order matters: keys 1-4 map to these in listed order.
export const VERDICT_CHOICES: readonly VerdictChoice[] = [
  { category: "genuine_fix", label: "Genuine Fix", key: "1" },
  { category: "trivial_deletion", label: "Trivial Deletion", key: "2" },
  { category: "excessive_modification", label: "Excessive Modification", key: "3" },
  { category: "invalid_fix", label: "Invalid Fix", key: "4" },
];

export function choiceForKey(key: string): VerdictChoice | null {
  for (const choice of VERDICT_CHOICES) {
    if (choice.key === key) return choice;
  }
  return null;
}

export type Diagnostic = {
  file: string;
  line: number;
  column: number | null;
  severity: string;
  message: string;
};

// GET /sessions/{id}/next?rater= -- the "item" payload.
export type RaterItem = {
  item_id: string;
  buggy_source: string;
  compiler_message: string;
  fixed_source: string;
  compile_status: string;
  diagnostics: Diagnostic[];
  position: number;
  total: number;
};

export type NextResponse =
  | { done: false; item: RaterItem }
  | { done: true; annotated: number; total: number };

// POST /sessions/{id}/annotations acknowledgement.
export type AnnotationAck = {
  status: string;
  session_id: string;
  item_id: string;
  rater_id: string;
  category: VerdictCategory;
  submitted_at: string;
};

export type ProgressResponse = {
  session_id: string;
  status: string;
  total_items: number;
  raters: Record<string, number>;
  complete: boolean;
};

export type ExportedRecord = {
  session_id: string;
  item_id: string;
  rater_id: string;
  category: VerdictCategory;
  submitted_at: string;
};

export type ExportResponse = {
  session_id: string;
  items: string[];
  raters: string[];
  records: ExportedRecord[];
};

// POST /sessions request body (used by session setup tooling and tests).
export type NewSessionRequest = {
  session_id?: string;
  raters: string[];
  items: Array<{
    item_id: string;
    task: { record_id: string; buggy_source: string; compiler_message?: string };
    patch: { task_id?: string; fixed_source: string; actor_id?: string };
    compile_outcome?: {
      status?: string;
      raw_stderr?: string;
      diagnostics?: Diagnostic[];
    };
    machine_verdict?: {
      category: VerdictCategory;
      rationale?: string;
      judge_id?: string;
    } | null;
  }>;
};

export type NewSessionResponse = {
  session_id: string;
  status: string;
  n_items: number;
  raters: string[];
};
