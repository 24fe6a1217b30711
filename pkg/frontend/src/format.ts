// Pure display helpers. Dashboard counters are rendered as raw integers
// elsewhere; these formatters are for prices and ids in market views.

export function formatNanoUsd(nano: number): string {
  const usd = nano / 1e9;
  if (nano !== 0 && Math.abs(usd) < 0.01) return `$${usd.toFixed(9).replace(/0+$/, "")}`;
  return `$${usd.toLocaleString("en-US", { minimumFractionDigits: 2, maximumFractionDigits: 2 })}`;
}

export function shortId(id: string, length = 10): string {
  return id.length <= length ? id : `${id.slice(0, length)}…`;
}

export function formatTimestamp(ms: number): string {
  return new Date(ms).toISOString().replace("T", " ").replace(/\.\d+Z$/, "Z");
}

const IMAGE_MAGIC: Array<{ mime: string; bytes: number[] }> = [
  { mime: "image/png", bytes: [0x89, 0x50, 0x4e, 0x47] },
  { mime: "image/jpeg", bytes: [0xff, 0xd8, 0xff] },
  { mime: "image/gif", bytes: [0x47, 0x49, 0x46, 0x38] },
  { mime: "image/webp", bytes: [0x52, 0x49, 0x46, 0x46] },
];

/** Sniff a certificate payload; returns its image MIME type or null. */
export function sniffImageMime(data: Uint8Array): string | null {
  for (const { mime, bytes } of IMAGE_MAGIC) {
    if (data.length >= bytes.length && bytes.every((b, i) => data[i] === b)) return mime;
  }
  return null;
}
