import { describe, expect, it } from "vitest";

import {
  RuleEditorState,
  contentHash,
  serializeRules,
  validateRows,
} from "../src/editorState.js";
import type { PreviewResponse } from "../src/types.js";

const TAGS = ["nopoach"];

function row(pattern: string, prio = "0", value = "0") {
  return { pattern, prio, values: { nopoach: value } };
}

const PREVIEW: PreviewResponse = {
  tags: TAGS,
  chunks_scanned: 10,
  unmatched_chunks: 2,
  rules: [],
};

describe("serialization", () => {
  it("writes the rule file header and quotes commas", () => {
    const csv = serializeRules(TAGS, [row("hire"), row("a, b", "1", "1")]);
    expect(csv).toBe('rule,prio,nopoach\nhire,0,0\n"a, b",1,1\n');
  });

  it("hashes are stable and content-sensitive", () => {
    const a = contentHash("rule,prio,nopoach\nhire,0,0\n");
    expect(a).toBe(contentHash("rule,prio,nopoach\nhire,0,0\n"));
    expect(a).not.toBe(contentHash("rule,prio,nopoach\nhire,0,1\n"));
  });
});

describe("row validation", () => {
  it("accepts a valid table", () => {
    expect(validateRows(TAGS, [row("hire"), row("shall not hire", "1", "1")])).toEqual([]);
  });

  it("flags rows independently without blocking the others", () => {
    const errors = validateRows(TAGS, [
      row(""),
      row("ok"),
      row("REGEX:::([bad", "1", "1"),
      row("neg prio", "-1"),
      row("bad value", "0", "2"),
    ]);
    const byRow = new Map(errors.map((e) => [e.row, e.message]));
    expect(byRow.get(0)).toMatch(/empty/);
    expect(byRow.has(1)).toBe(false);
    expect(byRow.get(2)).toMatch(/regular expression/);
    expect(byRow.get(3)).toMatch(/priority/);
    expect(byRow.get(4)).toMatch(/0 or 1/);
  });

  it("flags duplicate patterns", () => {
    const errors = validateRows(TAGS, [row("hire"), row("hire", "1", "1")]);
    expect(errors).toEqual([{ row: 1, message: "duplicate of row 1" }]);
  });
});

describe("RuleEditorState", () => {
  it("starts clean and turns dirty on edits until saved", () => {
    const state = new RuleEditorState(TAGS);
    expect(state.dirty).toBe(false);
    state.addRow("hire");
    expect(state.dirty).toBe(true);
    state.markSaved();
    expect(state.dirty).toBe(false);
    state.updateRow(0, { prio: "1" });
    expect(state.dirty).toBe(true);
  });

  it("preview is fresh only while content matches the request hash", () => {
    const state = new RuleEditorState(TAGS);
    state.addRow("hire");
    const hash = state.hash();
    expect(state.acceptPreview(hash, PREVIEW)).toBe(true);
    expect(state.previewFresh()).toBe(true);
    state.updateRow(0, { pattern: "hire staff" });
    expect(state.previewFresh()).toBe(false);
  });

  it("rejects a late preview for superseded content", () => {
    const state = new RuleEditorState(TAGS);
    state.addRow("hire");
    const staleHash = state.hash();
    state.updateRow(0, { pattern: "recruit" });
    expect(state.acceptPreview(staleHash, PREVIEW)).toBe(false);
    expect(state.previewFresh()).toBe(false);
  });

  it("reports rules shadowed on every shown example", () => {
    const state = new RuleEditorState(TAGS);
    state.addRow("hire");
    const preview: PreviewResponse = {
      ...PREVIEW,
      rules: [
        {
          rule: "hire",
          prio: 0,
          count: 2,
          examples: [
            { chunk: "shall not hire x", tags: { nopoach: 1 }, winning_rule: "shall not hire" },
            { chunk: "shall not hire y", tags: { nopoach: 1 }, winning_rule: "shall not hire" },
          ],
        },
        {
          rule: "shall not hire",
          prio: 1,
          count: 2,
          examples: [
            { chunk: "shall not hire x", tags: { nopoach: 1 }, winning_rule: "shall not hire" },
          ],
        },
      ],
    };
    state.acceptPreview(state.hash(), preview);
    expect(state.shadowedRules()).toEqual(["hire"]);
  });
});
