/** Per-tag model metrics table plus a yearly prevalence chart. The
 * table sorts by any column (F1 by default); every number shown is an
 * API response field, never re-derived in the browser. */

import type { ApiClient } from "../api.js";
import { renderPrevalenceChart, type Series } from "../chart.js";
import { clear, el } from "../dom.js";
import type { MetricsResponse, ModelInfo } from "../types.js";

type MetricKey = "accuracy" | "precision" | "recall" | "f1";

export class MetricsDashboard {
  private data: MetricsResponse | null = null;
  private error: string | null = null;
  private sortKey: MetricKey = "f1";
  private sortAsc = false;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly project: string,
  ) {}

  async load(): Promise<void> {
    this.error = null;
    try {
      this.data = await this.api.metrics(this.project);
    } catch (err) {
      this.data = null;
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  toggleSort(key: MetricKey): void {
    if (this.sortKey === key) this.sortAsc = !this.sortAsc;
    else {
      this.sortKey = key;
      this.sortAsc = false;
    }
    this.render();
  }

  private sortedModels(): ModelInfo[] {
    if (!this.data) return [];
    const models = [...this.data.models];
    models.sort((a, b) => {
      const av = a.metrics?.[this.sortKey] ?? -1;
      const bv = b.metrics?.[this.sortKey] ?? -1;
      return this.sortAsc ? av - bv : bv - av;
    });
    return models;
  }

  render(): void {
    clear(this.container);
    if (this.error) {
      this.container.append(
        el("div", { class: "error-state", role: "alert" }, [this.error]),
      );
      return;
    }
    if (!this.data || (this.data.models.length === 0 && Object.keys(this.data.prevalence).length === 0)) {
      this.container.append(
        el("p", { class: "empty-state" }, ["No metrics yet — train a model first."]),
      );
      return;
    }
    this.container.append(this.renderTable(), this.renderChart());
  }

  private renderTable(): HTMLElement {
    const keys: MetricKey[] = ["accuracy", "precision", "recall", "f1"];
    const header = el("tr", {}, [
      el("th", {}, ["Tag"]),
      el("th", {}, ["Family"]),
      el("th", {}, ["Purified"]),
      ...keys.map((k) => {
        const arrow = this.sortKey === k ? (this.sortAsc ? " ▲" : " ▼") : "";
        const button = el("button", { class: `sort-${k}` }, [k + arrow]);
        button.addEventListener("click", () => this.toggleSort(k));
        return el("th", {}, [button]);
      }),
    ]);
    const body = el("tbody");
    for (const model of this.sortedModels()) {
      body.append(
        el("tr", { "data-file": model.file }, [
          el("td", {}, [model.tag]),
          el("td", {}, [model.family]),
          el("td", {}, [model.purified ? "yes" : "no"]),
          ...keys.map((k) =>
            el("td", { class: k }, [
              model.metrics ? model.metrics[k].toFixed(3) : "—",
            ]),
          ),
        ]),
      );
    }
    return el("table", { class: "metrics-table" }, [el("thead", {}, [header]), body]);
  }

  private renderChart(): HTMLElement {
    const wrapper = el("div", { class: "prevalence" });
    const series: Series[] = Object.entries(this.data!.prevalence).map(
      ([name, points]) => ({
        label: name.replace(/^prevalence_/, ""),
        points: points.map((p) => ({ year: Number(p.year), pct: Number(p.pct) })),
      }),
    );
    if (series.every((s) => s.points.length === 0)) {
      wrapper.append(el("p", { class: "empty-state" }, ["No prevalence series."]));
      return wrapper;
    }
    wrapper.append(el("h3", {}, ["Prevalence by year"]), renderPrevalenceChart(series));
    return wrapper;
  }
}
