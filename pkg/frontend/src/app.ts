import { ServiceError } from "./api.js";
import { ViewContext, RenderedView } from "./ctx.js";
import { el, clear } from "./dom.js";
import { Session, ViewName, visibleViews } from "./session.js";
import { renderDashboard } from "./views/dashboard.js";
import { renderMarket } from "./views/market.js";
import { renderMint } from "./views/mint.js";
import { renderToken } from "./views/token.js";
import { renderWallet } from "./views/wallet.js";

const VIEW_LABELS: Record<string, string> = {
  dashboard: "Dashboard",
  market: "Market",
  mint: "Mint",
  wallet: "Wallet",
};

export interface App {
  navigate: (view: ViewName, param?: number) => void;
  context: ViewContext;
  root: HTMLElement;
}

export function mountApp(root: HTMLElement, session: Session): App {
  clear(root);
  const errorBanner = el("div", { class: "error-banner hidden", "data-role": "error" });
  const viewContainer = el("main", { class: "view", "data-role": "view" });
  let active: RenderedView | undefined;

  const context: ViewContext = {
    session,
    navigate,
    notifyError(error: unknown) {
      // service errors surface verbatim: code and message as sent
      if (error instanceof ServiceError) {
        errorBanner.textContent = `${error.body.code}: ${error.body.message}`;
        errorBanner.setAttribute("data-code", error.body.code);
      } else {
        errorBanner.textContent = String(error);
        errorBanner.removeAttribute("data-code");
      }
      errorBanner.classList.remove("hidden");
    },
    clearError() {
      errorBanner.textContent = "";
      errorBanner.classList.add("hidden");
      errorBanner.removeAttribute("data-code");
    },
  };

  const nav = el("nav", { class: "topbar" });
  for (const view of visibleViews(session)) {
    nav.append(
      el(
        "button",
        { class: "nav-button", "data-view": view, onclick: () => navigate(view) },
        VIEW_LABELS[view] ?? view,
      ),
    );
  }
  nav.append(
    el(
      "span",
      { class: "whoami" },
      `${session.account.legal_name || session.account.account_id.slice(0, 12)} · ${session.account.role}`,
    ),
  );

  function navigate(view: ViewName, param?: number): void {
    active?.stop?.();
    active = undefined;
    context.clearError();
    for (const button of nav.querySelectorAll(".nav-button")) {
      button.classList.toggle("active", button.getAttribute("data-view") === view);
    }
    clear(viewContainer);
    viewContainer.setAttribute("data-active-view", view);
    const render =
      view === "dashboard" ? renderDashboard(viewContainer, context)
      : view === "market" ? renderMarket(viewContainer, context)
      : view === "mint" ? renderMint(viewContainer, context)
      : view === "wallet" ? renderWallet(viewContainer, context)
      : renderToken(viewContainer, context, param ?? 1);
    render.then((r) => (active = r)).catch(context.notifyError);
  }

  root.append(nav, errorBanner, viewContainer);
  navigate("dashboard");
  return { navigate, context, root };
}
