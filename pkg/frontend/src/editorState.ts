/** In-memory model of the rule editor.
 *
 * Invariants enforced here rather than in the DOM layer:
 *  - a preview is only "fresh" when its request matched the current
 *    editor content hash; any edit marks it stale until then;
 *  - unsaved edits keep the dirty flag set until a successful save.
 */

import type { PreviewResponse } from "./types.js";

export interface RuleRow {
  pattern: string;
  prio: string;
  values: Record<string, string>;
}

export interface RowError {
  row: number;
  message: string;
}

export const REGEX_PREFIX = "REGEX:::";

/** Stable content hash (FNV-1a) of the serialized editor content. */
export function contentHash(text: string): string {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return (hash >>> 0).toString(16).padStart(8, "0");
}

function csvCell(value: string): string {
  return /[",\n]/.test(value) ? `"${value.replace(/"/g, '""')}"` : value;
}

export function serializeRules(tags: string[], rows: RuleRow[]): string {
  const lines = [["rule", "prio", ...tags].join(",")];
  for (const row of rows) {
    lines.push(
      [csvCell(row.pattern), row.prio, ...tags.map((t) => row.values[t] ?? "")].join(","),
    );
  }
  return lines.join("\n") + "\n";
}

/** Per-row validation mirroring the server's rule file checks, so most
 * errors surface before a preview round-trip. Rows with errors do not
 * block validation of the others. */
export function validateRows(tags: string[], rows: RuleRow[]): RowError[] {
  const errors: RowError[] = [];
  const seen = new Map<string, number>();
  rows.forEach((row, i) => {
    if (!row.pattern.trim()) {
      errors.push({ row: i, message: "empty rule pattern" });
      return;
    }
    if (row.pattern.startsWith(REGEX_PREFIX)) {
      try {
        new RegExp(row.pattern.slice(REGEX_PREFIX.length));
      } catch {
        errors.push({ row: i, message: "invalid regular expression" });
      }
    }
    if (!/^\d+$/.test(row.prio.trim())) {
      errors.push({ row: i, message: "priority must be a non-negative integer" });
    }
    for (const tag of tags) {
      const cell = (row.values[tag] ?? "").trim();
      if (cell !== "0" && cell !== "1") {
        errors.push({ row: i, message: `tag ${tag} must be 0 or 1` });
      }
    }
    const previous = seen.get(row.pattern);
    if (previous !== undefined) {
      errors.push({ row: i, message: `duplicate of row ${previous + 1}` });
    } else {
      seen.set(row.pattern, i);
    }
  });
  return errors;
}

export class RuleEditorState {
  rows: RuleRow[] = [];
  selectedRow: number | null = null;
  dirty = false;
  preview: PreviewResponse | null = null;
  private previewHash: string | null = null;

  constructor(public readonly tags: string[]) {}

  serialized(): string {
    return serializeRules(this.tags, this.rows);
  }

  hash(): string {
    return contentHash(this.serialized());
  }

  errors(): RowError[] {
    return validateRows(this.tags, this.rows);
  }

  /** True when the shown preview corresponds to the current content. */
  previewFresh(): boolean {
    return this.preview !== null && this.previewHash === this.hash();
  }

  setRows(rows: RuleRow[]): void {
    this.rows = rows;
    this.dirty = true;
  }

  updateRow(index: number, patch: Partial<RuleRow>): void {
    const row = this.rows[index];
    if (!row) return;
    this.rows[index] = {
      ...row,
      ...patch,
      values: { ...row.values, ...(patch.values ?? {}) },
    };
    this.dirty = true;
  }

  addRow(pattern = "", prio = "0"): number {
    const values: Record<string, string> = {};
    for (const tag of this.tags) values[tag] = "0";
    this.rows.push({ pattern, prio, values });
    this.dirty = true;
    return this.rows.length - 1;
  }

  removeRow(index: number): void {
    this.rows.splice(index, 1);
    if (this.selectedRow !== null && this.selectedRow >= this.rows.length) {
      this.selectedRow = this.rows.length ? this.rows.length - 1 : null;
    }
    this.dirty = true;
  }

  /** Record a preview response; ignored (still stale) unless it was
   * requested for the current content. */
  acceptPreview(requestHash: string, response: PreviewResponse): boolean {
    if (requestHash !== this.hash()) return false;
    this.preview = response;
    this.previewHash = requestHash;
    return true;
  }

  markSaved(): void {
    this.dirty = false;
  }

  /** Rules whose every shown example is won by a different rule: a
   * higher-priority rule shadows them on all visible evidence. */
  shadowedRules(): string[] {
    if (!this.preview) return [];
    return this.preview.rules
      .filter(
        (r) =>
          r.examples.length > 0 &&
          r.examples.every((e) => e.winning_rule !== r.rule),
      )
      .map((r) => r.rule);
  }
}
