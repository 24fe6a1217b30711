import { ViewContext, RenderedView } from "../ctx.js";
import { el, clear } from "../dom.js";
import { formatNanoUsd, formatTimestamp, shortId, sniffImageMime } from "../format.js";

async function certificatePreview(ctx: ViewContext, digest: string): Promise<HTMLElement> {
  const link = el(
    "a",
    { href: ctx.session.api.certificateUrl(digest), download: `certificate-${digest.slice(0, 12)}` },
    "download certificate",
  );
  try {
    const bytes = await ctx.session.api.fetchCertificate(digest);
    const mime = sniffImageMime(bytes);
    if (mime && typeof URL !== "undefined" && typeof URL.createObjectURL === "function") {
      const url = URL.createObjectURL(new Blob([bytes.buffer as ArrayBuffer], { type: mime }));
      return el(
        "div",
        { class: "certificate" },
        el("img", { src: url, alt: "certificate", class: "certificate-image" }),
        el("div", {}, link),
      );
    }
  } catch {
    // fall through to the plain link
  }
  return el("div", { class: "certificate" }, link);
}

export async function renderToken(
  container: HTMLElement,
  ctx: ViewContext,
  tokenId: number,
): Promise<RenderedView> {
  const api = ctx.session.api;
  const [token, provenance, trades] = await Promise.all([
    api.token(tokenId),
    api.provenance(tokenId),
    api.trades(tokenId),
  ]);

  const rows = el("table", { class: "kv" });
  const pairs: Array<[string, string]> = [
    ["Name", `${token.name} (${token.symbol})`],
    ["Project", token.project_id || "—"],
    ["Quantity", `${token.quantity_tco2e} tCO2e`],
    ["Vintage", String(token.vintage_year)],
    ["Certificate digest", token.certificate_hash],
    ["Owner", token.owner],
    ["Minted at height", String(token.minted_at)],
  ];
  for (const [key, value] of pairs) {
    rows.append(el("tr", {}, el("th", {}, key), el("td", {}, value)));
  }

  const provenanceTable = el(
    "table",
    { class: "rows", "data-role": "provenance" },
    el(
      "tr",
      {},
      el("th", {}, "Height"),
      el("th", {}, "Basis"),
      el("th", {}, "Owner"),
      el("th", {}, "Role"),
      el("th", {}, "Price"),
    ),
  );
  for (const entry of provenance.entries) {
    const ownerLabel = entry.legal_name ? `${shortId(entry.owner)} — ${entry.legal_name}` : shortId(entry.owner);
    provenanceTable.append(
      el(
        "tr",
        {},
        el("td", {}, String(entry.acquired_at)),
        el("td", {}, entry.basis),
        el("td", {}, ownerLabel),
        el("td", {}, entry.role ?? "?"),
        el("td", {}, entry.price === null ? "—" : formatNanoUsd(entry.price)),
      ),
    );
  }

  const tradesTable = el(
    "table",
    { class: "rows", "data-role": "trades" },
    el(
      "tr",
      {},
      el("th", {}, "Height"),
      el("th", {}, "Buyer"),
      el("th", {}, "Price"),
      el("th", {}, "Royalty"),
      el("th", {}, "Network fee"),
    ),
  );
  for (const receipt of trades) {
    tradesTable.append(
      el(
        "tr",
        {},
        el("td", {}, String(receipt.block_height)),
        el("td", {}, shortId(receipt.buyer)),
        el("td", {}, formatNanoUsd(receipt.price)),
        el("td", {}, formatNanoUsd(receipt.royalty)),
        el("td", {}, formatNanoUsd(receipt.network_fee)),
      ),
    );
  }

  clear(container);
  container.append(
    el("h2", {}, `Token ${token.token_id}`),
    rows,
    await certificatePreview(ctx, token.certificate_hash),
    el("h3", {}, "Provenance"),
    provenanceTable,
    el("h3", {}, "Trades"),
    trades.length ? tradesTable : el("p", { class: "empty" }, "No trades yet."),
  );
  return {};
}
