import { Listing, TokenInfo } from "../api.js";
import { ViewContext, RenderedView } from "../ctx.js";
import { el, clear } from "../dom.js";
import { formatNanoUsd, shortId } from "../format.js";
import { refreshAccount } from "../session.js";

// Owned tokens are found by walking token ids 1..total_minted and filtering
// by owner; ids are sequential by construction, and this stays within the
// published endpoints.

export async function ownedTokens(ctx: ViewContext): Promise<TokenInfo[]> {
  const { data } = await ctx.session.api.analytics();
  const me = ctx.session.account.account_id;
  const owned: TokenInfo[] = [];
  for (let id = 1; id <= data.total_minted; id++) {
    const token = await ctx.session.api.token(id);
    if (token.owner === me) owned.push(token);
  }
  return owned;
}

export async function myOpenListings(ctx: ViewContext): Promise<Listing[]> {
  const listings = await ctx.session.api.openListings();
  return listings.filter((l) => l.seller === ctx.session.account.account_id);
}

export async function relistToken(ctx: ViewContext, tokenId: number, price: number) {
  return ctx.session.api.listForSale(tokenId, price);
}

export async function cancelListing(ctx: ViewContext, listingId: number) {
  return ctx.session.api.cancelListing(listingId);
}

export async function renderWallet(container: HTMLElement, ctx: ViewContext): Promise<RenderedView> {
  const account = await refreshAccount(ctx.session);
  const owned = await ownedTokens(ctx);
  const listings = await myOpenListings(ctx);
  const listedTokens = new Set(listings.map((l) => l.token_id));

  const holdings = el("table", { class: "rows", "data-role": "holdings" });
  holdings.append(
    el("tr", {}, el("th", {}, "Token"), el("th", {}, "Quantity"), el("th", {}, "Status"), el("th", {}, "")),
  );
  for (const token of owned) {
    const row = el(
      "tr",
      { "data-token-row": String(token.token_id) },
      el(
        "td",
        {},
        el(
          "a",
          { href: "#", onclick: (e: Event) => { e.preventDefault(); ctx.navigate("token", token.token_id); } },
          `${token.name} (${token.symbol})`,
        ),
      ),
      el("td", {}, `${token.quantity_tco2e} tCO2e`),
      el("td", {}, listedTokens.has(token.token_id) ? "listed" : "unlisted"),
    );
    if (!listedTokens.has(token.token_id)) {
      const priceInput = el("input", {
        type: "number", value: "0", class: "price-input",
        "data-role": `relist-price-${token.token_id}`,
      }) as HTMLInputElement;
      row.append(
        el(
          "td",
          {},
          priceInput,
          el(
            "button",
            {
              "data-action": "relist",
              "data-token": String(token.token_id),
              onclick: () => {
                ctx.clearError();
                relistToken(ctx, token.token_id, Number(priceInput.value))
                  .then(() => renderWallet(container, ctx))
                  .catch(ctx.notifyError);
              },
            },
            "List for sale",
          ),
        ),
      );
    } else {
      row.append(el("td", {}, ""));
    }
    holdings.append(row);
  }

  const myListings = el("table", { class: "rows", "data-role": "my-listings" });
  myListings.append(
    el("tr", {}, el("th", {}, "Listing"), el("th", {}, "Token"), el("th", {}, "Tier"),
        el("th", {}, "Price"), el("th", {}, "")),
  );
  for (const listing of listings) {
    myListings.append(
      el(
        "tr",
        {},
        el("td", {}, `#${listing.listing_id}`),
        el("td", {}, String(listing.token_id)),
        el("td", {}, listing.tier),
        el("td", {}, formatNanoUsd(listing.price)),
        el(
          "td",
          {},
          el(
            "button",
            {
              "data-action": "cancel",
              "data-listing": String(listing.listing_id),
              onclick: () => {
                ctx.clearError();
                cancelListing(ctx, listing.listing_id)
                  .then(() => renderWallet(container, ctx))
                  .catch(ctx.notifyError);
              },
            },
            "Cancel",
          ),
        ),
      ),
    );
  }

  clear(container);
  container.append(
    el("h2", {}, "Wallet"),
    el(
      "p",
      {},
      `Account ${shortId(account.account_id, 16)} · ${account.role} · balance `,
      el("strong", { "data-role": "balance" }, formatNanoUsd(account.balance)),
    ),
    el("h3", {}, `Holdings (${owned.length})`),
    owned.length ? holdings : el("p", { class: "empty" }, "No tokens owned."),
    el("h3", {}, `My open listings (${listings.length})`),
    listings.length ? myListings : el("p", { class: "empty" }, "No open listings."),
  );
  return {};
}
