import { ViewContext, RenderedView } from "../ctx.js";
import { el, clear } from "../dom.js";

// Counter values are rendered as the exact integers the service returned;
// no client-side aggregation or reformatting happens here.

export const COUNTER_FIELDS = [
  ["total_minted", "Issued certificates (tokens)"],
  ["total_certificates_uploaded", "Uploaded certificates"],
  ["duplicate_attempts", "Duplicate requests rejected"],
  ["open_primary", "Open primary listings"],
  ["open_secondary", "Open secondary listings"],
  ["total_trade_volume", "Trade volume (nanoUSD)"],
  ["as_of_height", "Chain height"],
] as const;

export const POLL_INTERVAL_MS = 2000;

export async function refreshDashboard(container: HTMLElement, ctx: ViewContext): Promise<void> {
  const { data, raw } = await ctx.session.api.analytics();
  const grid = el("div", { class: "counter-grid" });
  for (const [field, label] of COUNTER_FIELDS) {
    grid.append(
      el(
        "div",
        { class: "counter-tile" },
        el("div", { class: "counter-value", "data-field": field }, String(data[field])),
        el("div", { class: "counter-label" }, label),
      ),
    );
  }
  clear(container);
  container.append(
    el("h2", {}, "Dashboard"),
    grid,
    el(
      "details",
      { class: "raw-block" },
      el("summary", {}, "Raw analytics response"),
      el("pre", { "data-role": "raw-analytics" }, raw),
    ),
  );
}

export async function renderDashboard(
  container: HTMLElement,
  ctx: ViewContext,
): Promise<RenderedView> {
  await refreshDashboard(container, ctx);
  const timer = setInterval(() => {
    refreshDashboard(container, ctx).catch(ctx.notifyError);
  }, POLL_INTERVAL_MS);
  return { stop: () => clearInterval(timer) };
}
