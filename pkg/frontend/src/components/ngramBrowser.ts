/** Sortable n-gram frequency table with drill-through to the rule
 * editor: clicking a phrase pre-fills a draft rule with it. Sorting is
 * purely client-side; only the load button refetches. */

import type { ApiClient } from "../api.js";
import { clear, el } from "../dom.js";
import type { NgramReport, NgramRow } from "../types.js";

type SortKey = "count" | "ngram";

export class NgramBrowser {
  private report: NgramReport | null = null;
  private sortKey: SortKey = "count";
  private sortAsc = false;
  private error: string | null = null;
  private n = 3;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly project: string,
    private readonly onDraftRule: (phrase: string) => void,
  ) {}

  async load(n = this.n, center = "keyword", limit = 200): Promise<void> {
    this.n = n;
    this.error = null;
    try {
      this.report = await this.api.ngrams(this.project, n, center, limit);
    } catch (err) {
      this.report = null;
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  toggleSort(key: SortKey): void {
    if (this.sortKey === key) {
      this.sortAsc = !this.sortAsc;
    } else {
      this.sortKey = key;
      this.sortAsc = key === "ngram";
    }
    this.render();
  }

  private sortedRows(): NgramRow[] {
    if (!this.report) return [];
    const rows = [...this.report.rows];
    rows.sort((a, b) => {
      const cmp =
        this.sortKey === "count" ? a.count - b.count : a.ngram.localeCompare(b.ngram);
      return this.sortAsc ? cmp : -cmp;
    });
    return rows;
  }

  render(): void {
    clear(this.container);
    if (this.error) {
      this.container.append(
        el("div", { class: "error-state", role: "alert" }, [
          `Failed to load n-grams: ${this.error} `,
          el("button", { class: "retry" }, ["Retry"]),
        ]),
      );
      this.container
        .querySelector("button.retry")!
        .addEventListener("click", () => void this.load());
      return;
    }
    if (!this.report) {
      this.container.append(el("p", { class: "empty-state" }, ["No report loaded yet."]));
      return;
    }
    if (this.report.rows.length === 0) {
      this.container.append(
        el("p", { class: "empty-state" }, ["No phrases found for these settings."]),
      );
      return;
    }
    const header = el("tr", {}, [
      this.headerCell("ngram", "Phrase"),
      this.headerCell("count", "Count"),
    ]);
    const body = el("tbody");
    for (const row of this.sortedRows()) {
      const phraseCell = el("td", {}, [
        el("button", { class: "phrase", title: "Draft a rule with this phrase" }, [
          row.ngram,
        ]),
      ]);
      phraseCell
        .querySelector("button")!
        .addEventListener("click", () => this.onDraftRule(row.ngram));
      body.append(el("tr", {}, [phraseCell, el("td", { class: "count" }, [String(row.count)])]));
    }
    this.container.append(
      el("p", { class: "summary" }, [
        `${this.report.total_phrases} distinct ${this.report.n}-gram phrases`,
      ]),
      el("table", { class: "ngram-table" }, [el("thead", {}, [header]), body]),
    );
  }

  private headerCell(key: SortKey, label: string): HTMLElement {
    const arrow =
      this.sortKey === key ? (this.sortAsc ? " ▲" : " ▼") : "";
    const cell = el("th", { class: `sort-${key}` }, [
      el("button", {}, [label + arrow]),
    ]);
    cell.querySelector("button")!.addEventListener("click", () => this.toggleSort(key));
    return cell;
  }
}
