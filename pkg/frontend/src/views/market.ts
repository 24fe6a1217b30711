import { Listing, TokenInfo } from "../api.js";
import { ViewContext, RenderedView } from "../ctx.js";
import { el, clear } from "../dom.js";
import { formatNanoUsd, shortId } from "../format.js";
import { refreshAccount } from "../session.js";

export async function buyFromMarket(ctx: ViewContext, listingId: number) {
  const receipt = await ctx.session.api.buy(listingId);
  await refreshAccount(ctx.session);
  return receipt;
}

async function tokenNames(ctx: ViewContext, listings: Listing[]): Promise<Map<number, TokenInfo>> {
  const tokens = new Map<number, TokenInfo>();
  for (const listing of listings) {
    if (!tokens.has(listing.token_id)) {
      tokens.set(listing.token_id, await ctx.session.api.token(listing.token_id));
    }
  }
  return tokens;
}

export async function renderMarketTab(
  body: HTMLElement,
  ctx: ViewContext,
  tier: "primary" | "secondary",
): Promise<void> {
  const listings = await ctx.session.api.openListings(tier);
  const tokens = await tokenNames(ctx, listings);
  const me = ctx.session.account.account_id;
  clear(body);
  if (listings.length === 0) {
    body.append(el("p", { class: "empty" }, `No open ${tier} listings.`));
    return;
  }
  const table = el(
    "table",
    { class: "rows", "data-role": `market-${tier}` },
    el(
      "tr",
      {},
      el("th", {}, "Listing"),
      el("th", {}, "Token"),
      el("th", {}, "Price"),
      el("th", {}, "Seller"),
      el("th", {}, ""),
    ),
  );
  for (const listing of listings) {
    const token = tokens.get(listing.token_id);
    const action =
      listing.seller === me
        ? el("span", { class: "muted" }, "your listing")
        : el(
            "button",
            {
              "data-action": "buy",
              "data-listing": String(listing.listing_id),
              onclick: () => {
                ctx.clearError();
                buyFromMarket(ctx, listing.listing_id)
                  .then((receipt) => {
                    ctx.navigate("token", receipt.token_id);
                  })
                  .catch(ctx.notifyError);
              },
            },
            "Buy",
          );
    table.append(
      el(
        "tr",
        { "data-listing-row": String(listing.listing_id) },
        el("td", {}, `#${listing.listing_id}`),
        el(
          "td",
          {},
          el(
            "a",
            { href: "#", onclick: (e: Event) => { e.preventDefault(); ctx.navigate("token", listing.token_id); } },
            token ? `${token.name} (${token.symbol})` : `token ${listing.token_id}`,
          ),
        ),
        el("td", { "data-price": String(listing.price) }, formatNanoUsd(listing.price)),
        el("td", {}, shortId(listing.seller)),
        el("td", {}, action),
      ),
    );
  }
  body.append(table);
}

export async function renderMarket(container: HTMLElement, ctx: ViewContext): Promise<RenderedView> {
  clear(container);
  const body = el("div", { class: "tab-body" });
  let active: "primary" | "secondary" = "primary";

  const tabs = el("div", { class: "tabs" });
  const primaryTab = el("button", { class: "tab active", "data-tab": "primary" }, "Primary");
  const secondaryTab = el("button", { class: "tab", "data-tab": "secondary" }, "Secondary");

  async function select(tier: "primary" | "secondary") {
    active = tier;
    primaryTab.classList.toggle("active", tier === "primary");
    secondaryTab.classList.toggle("active", tier === "secondary");
    await renderMarketTab(body, ctx, tier);
  }

  primaryTab.addEventListener("click", () => void select("primary").catch(ctx.notifyError));
  secondaryTab.addEventListener("click", () => void select("secondary").catch(ctx.notifyError));
  tabs.append(primaryTab, secondaryTab);
  container.append(el("h2", {}, "Market"), tabs, body);
  await select(active);
  return {};
}
