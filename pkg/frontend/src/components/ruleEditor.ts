/** Rule editor with debounced live preview.
 *
 * Every edit marks the preview stale and schedules a preview request
 * 400 ms later; responses are accepted only if they still match the
 * editor content (late responses for old content are dropped). Row
 * validation errors render as per-row badges without blocking preview
 * of the valid remainder.
 */

import { ApiError, type ApiClient } from "../api.js";
import { clear, el } from "../dom.js";
import { RuleEditorState, type RuleRow } from "../editorState.js";

export const PREVIEW_DEBOUNCE_MS = 400;

export class RuleEditor {
  readonly state: RuleEditorState;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private serverError: string | null = null;
  onSave: ((rulesCsv: string) => Promise<void>) | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly project: string,
    tags: string[],
  ) {
    this.state = new RuleEditorState(tags);
  }

  loadRows(rows: RuleRow[]): void {
    this.state.setRows(rows);
    this.state.markSaved();
    this.render();
    this.schedulePreview();
  }

  draftRule(phrase: string): void {
    this.state.selectedRow = this.state.addRow(phrase, "0");
    this.render();
    this.schedulePreview();
  }

  edit(index: number, patch: Partial<RuleRow>): void {
    this.state.updateRow(index, patch);
    this.render();
    this.schedulePreview();
  }

  removeRow(index: number): void {
    this.state.removeRow(index);
    this.render();
    this.schedulePreview();
  }

  private schedulePreview(): void {
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.requestPreview();
    }, PREVIEW_DEBOUNCE_MS);
  }

  async requestPreview(): Promise<void> {
    const requestHash = this.state.hash();
    this.serverError = null;
    try {
      const response = await this.api.previewRules(this.project, this.state.serialized());
      if (this.state.acceptPreview(requestHash, response)) this.render();
    } catch (err) {
      if (requestHash !== this.state.hash()) return; // stale failure
      this.serverError =
        err instanceof ApiError ? err.detail : err instanceof Error ? err.message : String(err);
      this.render();
    }
  }

  async save(): Promise<void> {
    if (!this.onSave) return;
    await this.onSave(this.state.serialized());
    this.state.markSaved();
    this.render();
  }

  render(): void {
    clear(this.container);
    const errorsByRow = new Map<number, string[]>();
    for (const e of this.state.errors()) {
      errorsByRow.set(e.row, [...(errorsByRow.get(e.row) ?? []), e.message]);
    }

    const header = el("tr", {}, [
      el("th", {}, ["Rule"]),
      el("th", {}, ["Priority"]),
      ...this.state.tags.map((t) => el("th", {}, [t])),
      el("th", {}, [""]),
    ]);
    const body = el("tbody");
    this.state.rows.forEach((row, i) => {
      const patternInput = el("input", {
        class: "pattern",
        value: row.pattern,
        "data-row": String(i),
      });
      patternInput.addEventListener("input", () =>
        this.edit(i, { pattern: patternInput.value }),
      );
      const prioInput = el("input", {
        class: "prio",
        value: row.prio,
        "data-row": String(i),
      });
      prioInput.addEventListener("input", () => this.edit(i, { prio: prioInput.value }));
      const tagCells = this.state.tags.map((tag) => {
        const input = el("input", { class: `tag-${tag}`, value: row.values[tag] ?? "" });
        input.addEventListener("input", () =>
          this.edit(i, { values: { [tag]: input.value } }),
        );
        return el("td", {}, [input]);
      });
      const remove = el("button", { class: "remove" }, ["✕"]);
      remove.addEventListener("click", () => this.removeRow(i));
      const rowErrors = errorsByRow.get(i) ?? [];
      const badge = rowErrors.length
        ? [el("span", { class: "error-badge", title: rowErrors.join("; ") }, ["!"])]
        : [];
      body.append(
        el("tr", { class: rowErrors.length ? "row-invalid" : "row-valid" }, [
          el("td", {}, [patternInput, ...badge]),
          el("td", {}, [prioInput]),
          ...tagCells,
          el("td", {}, [remove]),
        ]),
      );
    });

    const addButton = el("button", { class: "add-rule" }, ["Add rule"]);
    addButton.addEventListener("click", () => {
      this.state.selectedRow = this.state.addRow();
      this.render();
      this.schedulePreview();
    });
    const saveButton = el("button", { class: "save-rules" }, [
      this.state.dirty ? "Save (unsaved changes)" : "Saved",
    ]);
    if (!this.state.dirty) saveButton.setAttribute("disabled", "");
    saveButton.addEventListener("click", () => void this.save());

    this.container.append(
      el("div", { class: `editor ${this.state.dirty ? "dirty" : "clean"}` }, [
        el("table", { class: "rule-table" }, [el("thead", {}, [header]), body]),
        addButton,
        saveButton,
      ]),
      this.renderPreview(),
    );
  }

  private renderPreview(): HTMLElement {
    const stale = !this.state.previewFresh();
    const panel = el("div", {
      class: `preview ${stale ? "stale" : "fresh"}`,
      "data-stale": String(stale),
    });
    if (this.serverError) {
      panel.append(el("div", { class: "error-state" }, [this.serverError]));
      return panel;
    }
    const preview = this.state.preview;
    if (!preview) {
      panel.append(el("p", { class: "empty-state" }, ["No preview yet."]));
      return panel;
    }
    if (stale) {
      panel.append(el("p", { class: "stale-note" }, ["Preview out of date…"]));
    }
    panel.append(
      el("p", { class: "coverage" }, [
        `${preview.chunks_scanned} chunks scanned, ${preview.unmatched_chunks} unmatched`,
      ]),
    );
    const shadowed = new Set(this.state.shadowedRules());
    for (const rule of preview.rules) {
      const classes = ["preview-rule"];
      if (shadowed.has(rule.rule)) classes.push("shadowed");
      const block = el("div", { class: classes.join(" ") }, [
        el("h4", {}, [
          `${rule.rule} (prio ${rule.prio}) — ${rule.count} match(es)` +
            (shadowed.has(rule.rule) ? " — shadowed by higher priority" : ""),
        ]),
      ]);
      for (const example of rule.examples) {
        const tagText = preview.tags
          .map((t) => `${t}=${example.tags[t]}`)
          .join(" ");
        block.append(
          el("div", { class: "example" }, [
            el("span", { class: "chunk" }, [example.chunk]),
            el("span", { class: "tags" }, [` → ${tagText}`]),
            el("span", { class: "winner" }, [` (by: ${example.winning_rule})`]),
          ]),
        );
      }
      panel.append(block);
    }
    return panel;
  }
}
