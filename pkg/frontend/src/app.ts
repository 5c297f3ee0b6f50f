/** DOM wiring: request form, live trace view, chart, analytics. */

import { ApiClient } from "./api.js";
import { renderChartSvg } from "./chart.js";
import { RunPoller } from "./poll.js";
import type { IterationRecord, PriceCurveDoc, RunTraceDoc } from "./types.js";
import {
  EXAMPLE_GROUPS,
  UiRunView,
  analyticsRows,
  buildChartModel,
  buildRunView,
  formatVerdict,
} from "./view.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private prices: PriceCurveDoc | null = null;
  private verdictCard: HTMLElement;
  private retryBanner: HTMLElement;
  private statusLine: HTMLElement;
  private iterationList: HTMLElement;
  private summaryBox: HTMLElement;
  private chartBox: HTMLElement;
  private analyticsBox: HTMLElement;
  private runsBox: HTMLElement;
  private input: HTMLTextAreaElement;
  private stageSelect: HTMLSelectElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient = new ApiClient(),
    private readonly poller: RunPoller = new RunPoller(new ApiClient()),
  ) {
    this.verdictCard = el("div", "verdict-card hidden");
    this.retryBanner = el("div", "retry-banner hidden");
    this.statusLine = el("div", "status-line", "No run yet.");
    this.iterationList = el("ol", "iterations");
    this.summaryBox = el("div", "summary hidden");
    this.chartBox = el("div", "chart");
    this.analyticsBox = el("div", "analytics");
    this.runsBox = el("div", "runs");
    this.input = el("textarea");
    this.stageSelect = el("select");
  }

  mount(): void {
    this.root.append(
      this.buildRequestPanel(),
      this.verdictCard,
      this.retryBanner,
      this.buildSection("Run", [this.statusLine, this.iterationList, this.summaryBox]),
      this.buildSection("Prices & schedules", [this.chartBox]),
      this.buildSection("Analytics", [this.analyticsBox, this.runsBox]),
    );
    void this.refreshAnalytics();
  }

  private buildSection(title: string, children: HTMLElement[]): HTMLElement {
    const section = el("section");
    section.append(el("h2", undefined, title), ...children);
    return section;
  }

  private buildRequestPanel(): HTMLElement {
    const section = el("section", "request-panel");
    section.append(el("h2", undefined, "Request"));

    this.input.rows = 2;
    this.input.placeholder = "e.g. Schedule all flexible loads for tomorrow";

    for (const stage of ["explicit_workflow", "minimal_guidance", "baseline"]) {
      const option = el("option", undefined, stage);
      option.value = stage;
      this.stageSelect.append(option);
    }

    const submit = el("button", "submit", "Schedule");
    submit.addEventListener("click", () => void this.submit());

    const controls = el("div", "controls");
    controls.append(this.input, this.stageSelect, submit);
    section.append(controls);

    for (const group of EXAMPLE_GROUPS) {
      const box = el("div", "example-group");
      box.append(el("h3", undefined, group.title));
      for (const prompt of group.prompts) {
        const button = el("button", "example", prompt);
        button.addEventListener("click", () => {
          this.input.value = prompt;
        });
        box.append(button);
      }
      section.append(box);
    }
    return section;
  }

  async submit(): Promise<void> {
    const text = this.input.value.trim();
    if (!text) return;
    this.verdictCard.classList.add("hidden");
    this.retryBanner.classList.add("hidden");
    let result;
    try {
      result = await this.api.submitRequest(text, this.stageSelect.value);
    } catch (error) {
      this.showRetry(`Network failure while submitting: ${String(error)}`);
      return;
    }
    if (result.kind === "rejected") {
      this.verdictCard.classList.remove("hidden");
      this.verdictCard.replaceChildren(
        ...formatVerdict(result.verdict, result.status).map((line) =>
          el("div", undefined, line),
        ),
      );
      return;
    }
    this.watch(result.runId);
  }

  watch(runId: string): void {
    this.statusLine.textContent = `run ${runId}: submitted...`;
    this.iterationList.replaceChildren();
    this.summaryBox.classList.add("hidden");
    void this.poller.poll(runId, {
      onUpdate: (trace) => void this.renderTrace(trace),
      onComplete: () => void this.refreshAnalytics(),
      onError: (error, failures) =>
        this.showRetry(`Polling failed (attempt ${failures}), retrying: ${String(error)}`),
    });
  }

  private showRetry(message: string): void {
    this.retryBanner.textContent = message;
    this.retryBanner.classList.remove("hidden");
  }

  private async renderTrace(trace: RunTraceDoc): Promise<void> {
    this.retryBanner.classList.add("hidden");
    const view = buildRunView(trace);
    this.statusLine.textContent =
      `run ${view.runId} [${view.status}] - "${view.requestText}" - ` +
      `${view.iterations.length} iteration(s), ${view.totalTokens} tokens - ${view.costSummary}`;
    this.renderIterations(view.iterations);
    if (view.summary) {
      this.summaryBox.classList.remove("hidden");
      this.summaryBox.textContent = `Summary: ${view.summary}`;
    }
    await this.renderChart(view, trace);
  }

  private renderIterations(iterations: IterationRecord[]): void {
    while (this.iterationList.children.length > iterations.length) {
      this.iterationList.lastChild?.remove();
    }
    for (let i = this.iterationList.children.length; i < iterations.length; i += 1) {
      const record = iterations[i]!;
      const item = el("li", "iteration");
      item.append(
        el("div", "thought", record.thought ? `Thought: ${record.thought}` : ""),
        el(
          "div",
          "action",
          record.action_verb ? record.action_raw || `ACTION: ${record.action_verb}` : "(no action parsed)",
        ),
        el("div", "observation", record.observation),
      );
      this.iterationList.append(item);
    }
  }

  private async renderChart(view: UiRunView, trace: RunTraceDoc): Promise<void> {
    const marketDate = trace.market_date ?? trace.schedules[0]?.market_date;
    if (!marketDate) return;
    try {
      if (!this.prices || this.prices.market_date !== marketDate) {
        this.prices = await this.api.getPrices(marketDate);
      }
    } catch (error) {
      this.chartBox.textContent = `No prices available for ${marketDate}: ${String(error)}`;
      return;
    }
    const model = buildChartModel(this.prices.prices, trace.schedules);
    this.chartBox.innerHTML = renderChartSvg(model);
  }

  async refreshAnalytics(): Promise<void> {
    try {
      const doc = await this.api.getAnalytics();
      const table = el("table");
      for (const row of analyticsRows(doc)) {
        const tr = el("tr");
        tr.append(el("td", undefined, row.label), el("td", undefined, row.value));
        table.append(tr);
      }
      this.analyticsBox.replaceChildren(table);

      const listing = await this.api.listRuns(0, 20);
      const list = el("ul", "run-list");
      for (const run of listing.runs) {
        const item = el("li");
        const link = el("a", undefined, `${run.run_id} [${run.outcome}] ${run.iterations} it.`);
        link.href = "#";
        link.addEventListener("click", (event) => {
          event.preventDefault();
          this.watch(run.run_id);
        });
        item.append(link);
        list.append(item);
      }
      this.runsBox.replaceChildren(list);
    } catch {
      // analytics are best-effort; the run view stays usable without them
    }
  }
}
