/** Blind validation coder and agreement report.
 *
 * During an open session the DOM shows only the current chunk, its
 * position, and the 0/1 choices — never rule text or machine tags.
 * Keyboard shortcuts: 0/1 to code, arrows to revisit. After submit the
 * component renders the server's agreement report, including the
 * disagreement worklist; clicking a disagreement hands its catching
 * rule to the rule editor for repair.
 */

import type { ApiClient } from "../api.js";
import { CodingSession, type StorageLike } from "../codingSession.js";
import { clear, el, formatPct } from "../dom.js";
import type { ScoreReport } from "../types.js";

export class ValidationCoder {
  session: CodingSession | null = null;
  report: ScoreReport | null = null;
  private error: string | null = null;
  onOpenRule: ((rule: string) => void) | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly project: string,
    private readonly storage: StorageLike | null = null,
  ) {}

  async start(tag: string, perRule: number, seed: number): Promise<void> {
    this.report = null;
    this.error = null;
    try {
      const exported = await this.api.exportValidation(this.project, perRule, seed);
      const restored = this.storage
        ? CodingSession.restore(tag, exported.rows, this.storage)
        : null;
      this.session = restored ?? new CodingSession(tag, exported.rows, this.storage);
    } catch (err) {
      this.session = null;
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  handleKey(key: string): void {
    if (!this.session || this.report) return;
    if (key === "0" || key === "1") {
      this.session.choose(key === "1" ? 1 : 0);
    } else if (key === "ArrowLeft") {
      this.session.goto(this.session.cursor - 1);
    } else if (key === "ArrowRight") {
      this.session.goto(this.session.cursor + 1);
    } else {
      return;
    }
    this.render();
  }

  async submit(): Promise<void> {
    if (!this.session || !this.session.complete()) return;
    this.error = null;
    try {
      this.report = await this.api.scoreValidation(this.project, this.session.submission());
      this.session.clearPersisted();
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  render(): void {
    clear(this.container);
    if (this.error) {
      this.container.append(el("div", { class: "error-state", role: "alert" }, [this.error]));
    }
    if (this.report) {
      this.container.append(this.renderReport(this.report));
      return;
    }
    if (!this.session) {
      if (!this.error) {
        this.container.append(el("p", { class: "empty-state" }, ["No coding session."]));
      }
      return;
    }
    this.container.append(this.renderSession(this.session));
  }

  private renderSession(session: CodingSession): HTMLElement {
    const panel = el("div", { class: "coding-session" });
    panel.append(
      el("p", { class: "progress" }, [
        `Coded ${session.answered()} of ${session.rows.length}`,
      ]),
    );
    const row = session.current;
    if (row) {
      panel.append(
        el("blockquote", { class: "chunk", "data-sample": row.sampleId }, [row.chunk]),
      );
      const no = el("button", { class: "choose-0" }, ["0 — no"]);
      no.addEventListener("click", () => this.handleKey("0"));
      const yes = el("button", { class: "choose-1" }, ["1 — yes"]);
      yes.addEventListener("click", () => this.handleKey("1"));
      panel.append(el("div", { class: "choices" }, [no, yes]));
      if (row.choice !== null) {
        panel.append(
          el("p", { class: "current-choice" }, [`Current answer: ${row.choice}`]),
        );
      }
    }
    const submit = el("button", { class: "submit" }, ["Submit for scoring"]);
    if (!session.complete()) submit.setAttribute("disabled", "");
    submit.addEventListener("click", () => void this.submit());
    panel.append(submit);
    return panel;
  }

  private renderReport(report: ScoreReport): HTMLElement {
    const panel = el("div", { class: "agreement-report" });
    panel.append(
      el("h3", {}, ["Agreement report"]),
      el("p", { class: "chunk-agreement" }, [
        `Chunk agreement: ${formatPct(report.chunk_agreement)}`,
      ]),
      el("p", { class: "rule-agreement" }, [
        `Rule-level agreement: ${formatPct(report.rule_agreement)}`,
      ]),
    );
    for (const [tag, stats] of Object.entries(report.per_tag)) {
      panel.append(
        el("p", { class: `tag-${tag}` }, [
          `${tag}: agreement ${formatPct(stats.agreement)}, kappa ` +
            (stats.kappa_degenerate ? `${stats.kappa.toFixed(3)} (degenerate)` : stats.kappa.toFixed(3)),
        ]),
      );
    }
    if (report.disagreements.length) {
      const list = el("ul", { class: "disagreements" });
      for (const d of report.disagreements) {
        const link = el("button", { class: "open-rule", "data-rule": d.rule }, [
          `${d.sample_id}: coded ${d.coded}, rules say ${d.expected} (rule: ${d.rule})`,
        ]);
        link.addEventListener("click", () => this.onOpenRule?.(d.rule));
        list.append(el("li", {}, [link]));
      }
      panel.append(el("h4", {}, ["Disagreements"]), list);
    } else {
      panel.append(el("p", { class: "empty-state" }, ["No disagreements."]));
    }
    return panel;
  }
}
