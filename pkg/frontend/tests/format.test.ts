import { describe, expect, it } from "vitest";

import { formatNanoUsd, shortId, sniffImageMime } from "../src/format.js";

describe("formatNanoUsd", () => {
  it("formats whole dollars", () => {
    expect(formatNanoUsd(1_000_000_000)).toBe("$1.00");
    expect(formatNanoUsd(100_000_000)).toBe("$0.10");
    expect(formatNanoUsd(0)).toBe("$0.00");
  });

  it("keeps tiny network fees visible", () => {
    expect(formatNanoUsd(2_740)).toBe("$0.00000274");
    expect(formatNanoUsd(250_000)).toBe("$0.00025");
  });

  it("groups large amounts", () => {
    expect(formatNanoUsd(750_000_000_000)).toBe("$750.00");
    expect(formatNanoUsd(10_000_000_000_000)).toBe("$10,000.00");
  });
});

describe("shortId", () => {
  it("truncates long ids with an ellipsis", () => {
    expect(shortId("abcdef0123456789", 6)).toBe("abcdef…");
    expect(shortId("abc", 6)).toBe("abc");
  });
});

describe("sniffImageMime", () => {
  it("detects png and jpeg magic", () => {
    expect(sniffImageMime(new Uint8Array([0x89, 0x50, 0x4e, 0x47, 0x0d]))).toBe("image/png");
    expect(sniffImageMime(new Uint8Array([0xff, 0xd8, 0xff, 0xe0]))).toBe("image/jpeg");
  });

  it("returns null for other payloads", () => {
    expect(sniffImageMime(new TextEncoder().encode("%PDF-1.4"))).toBeNull();
    expect(sniffImageMime(new Uint8Array([]))).toBeNull();
  });
});
