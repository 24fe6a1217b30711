import { MintRequest } from "../api.js";
import { ViewContext, RenderedView } from "../ctx.js";
import { el, clear } from "../dom.js";

// Upload first (drag-and-drop or file picker), then mint against the digest.
// The digest shown is exactly what the service returned for the bytes.

export async function uploadCertificateBytes(ctx: ViewContext, bytes: Uint8Array) {
  return ctx.session.api.uploadCertificate(bytes);
}

export async function submitMint(ctx: ViewContext, request: MintRequest) {
  return ctx.session.api.mint(request);
}

export async function renderMint(container: HTMLElement, ctx: ViewContext): Promise<RenderedView> {
  clear(container);
  const digestBox = el("code", { "data-role": "digest" }, "");
  const status = el("p", { class: "status", "data-role": "mint-status" }, "");

  async function handleFile(file: { arrayBuffer(): Promise<ArrayBuffer>; name?: string }) {
    ctx.clearError();
    try {
      const bytes = new Uint8Array(await file.arrayBuffer());
      const result = await uploadCertificateBytes(ctx, bytes);
      digestBox.textContent = result.digest;
      status.textContent = `Stored ${result.size} bytes.`;
    } catch (error) {
      ctx.notifyError(error);
    }
  }

  const fileInput = el("input", { type: "file", "data-role": "file-input" }) as HTMLInputElement;
  fileInput.addEventListener("change", () => {
    const file = fileInput.files && fileInput.files[0];
    if (file) void handleFile(file);
  });

  const dropZone = el(
    "div",
    {
      class: "drop-zone",
      "data-role": "drop-zone",
      ondragover: (event: Event) => {
        event.preventDefault();
        (dropZone as HTMLElement).classList.add("over");
      },
      ondragleave: () => (dropZone as HTMLElement).classList.remove("over"),
      ondrop: (event: Event) => {
        event.preventDefault();
        (dropZone as HTMLElement).classList.remove("over");
        const transfer = (event as DragEvent).dataTransfer;
        const file = transfer && transfer.files && transfer.files[0];
        if (file) void handleFile(file);
      },
    },
    el("p", {}, "Drop a certificate document here, or "),
    fileInput,
  );

  const fields: Record<string, HTMLInputElement> = {};
  const makeField = (name: string, label: string, value = "", type = "text") => {
    const input = el("input", { type, name, value }) as HTMLInputElement;
    fields[name] = input;
    return el("label", { class: "field" }, `${label} `, input);
  };

  const form = el(
    "form",
    {
      "data-role": "mint-form",
      onsubmit: (event: Event) => {
        event.preventDefault();
        ctx.clearError();
        if (!digestBox.textContent) {
          status.textContent = "Upload a certificate first.";
          return;
        }
        const request: MintRequest = {
          name: fields.name!.value,
          symbol: fields.symbol!.value,
          project_id: fields.project_id!.value,
          quantity_tco2e: fields.quantity_tco2e!.value,
          vintage_year: Number(fields.vintage_year!.value),
          metadata_uri: fields.metadata_uri!.value,
          certificate_digest: digestBox.textContent,
          primary_price: Number(fields.primary_price!.value),
        };
        submitMint(ctx, request)
          .then((result) => {
            status.textContent = `Minted token ${result.token_id}; primary listing ${result.listing_id}.`;
            status.setAttribute("data-token", String(result.token_id));
          })
          .catch(ctx.notifyError);
      },
    },
    makeField("name", "Name"),
    makeField("symbol", "Symbol"),
    makeField("project_id", "Project"),
    makeField("quantity_tco2e", "Quantity (tCO2e)", "1"),
    makeField("vintage_year", "Vintage year", "2024", "number"),
    makeField("metadata_uri", "Metadata URI"),
    makeField("primary_price", "Primary price (nanoUSD)", "0", "number"),
    el("button", { type: "submit" }, "Mint"),
  );

  container.append(
    el("h2", {}, "Mint a certificate token"),
    dropZone,
    el("p", {}, "Certificate digest: ", digestBox),
    status,
    form,
  );
  return {};
}
