/** Application shell: project picker plus the four loop activities as
 * tabs (explore n-grams, edit rules, code a validation sample, watch
 * metrics). All domain computation happens server-side. */

import { ApiClient } from "./api.js";
import { MetricsDashboard } from "./components/metricsDashboard.js";
import { NgramBrowser } from "./components/ngramBrowser.js";
import { RuleEditor } from "./components/ruleEditor.js";
import { ValidationCoder } from "./components/validationCoder.js";
import { el } from "./dom.js";

const TABS = ["ngrams", "rules", "validate", "metrics"] as const;
type Tab = (typeof TABS)[number];

export class App {
  private activeTab: Tab = "ngrams";
  private panels = new Map<Tab, HTMLElement>();
  ngramBrowser!: NgramBrowser;
  ruleEditor!: RuleEditor;
  validationCoder!: ValidationCoder;
  metricsDashboard!: MetricsDashboard;

  constructor(
    rootElement: HTMLElement,
    api: ApiClient,
    project: string,
    tags: string[],
    storage: Storage | null = typeof localStorage === "undefined" ? null : localStorage,
  ) {
    const nav = el("nav", { class: "tabs" });
    for (const tab of TABS) {
      const button = el("button", { class: `tab-${tab}`, "data-tab": tab }, [tab]);
      button.addEventListener("click", () => this.show(tab));
      nav.append(button);
    }
    rootElement.append(nav);
    for (const tab of TABS) {
      const panel = el("section", { class: `panel-${tab}`, hidden: "" });
      rootElement.append(panel);
      this.panels.set(tab, panel);
    }
    this.ngramBrowser = new NgramBrowser(
      this.panels.get("ngrams")!,
      api,
      project,
      (phrase) => {
        this.ruleEditor.draftRule(phrase);
        this.show("rules");
      },
    );
    this.ruleEditor = new RuleEditor(this.panels.get("rules")!, api, project, tags);
    this.validationCoder = new ValidationCoder(
      this.panels.get("validate")!,
      api,
      project,
      storage,
    );
    this.validationCoder.onOpenRule = () => this.show("rules");
    this.metricsDashboard = new MetricsDashboard(this.panels.get("metrics")!, api, project);
    this.show("ngrams");
  }

  show(tab: Tab): void {
    this.activeTab = tab;
    for (const [name, panel] of this.panels) {
      if (name === tab) panel.removeAttribute("hidden");
      else panel.setAttribute("hidden", "");
    }
  }

  get active(): Tab {
    return this.activeTab;
  }
}

export function mount(root: HTMLElement, baseUrl: string, project: string, tags: string[]): App {
  return new App(root, new ApiClient(baseUrl), project, tags);
}
