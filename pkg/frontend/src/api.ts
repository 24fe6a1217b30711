// Typed client for the market service REST API. Every method maps 1:1 onto
// one endpoint; errors carry the service's {code, message, detail} verbatim.

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: string;
}

export class ServiceError extends Error {
  constructor(public status: number, public body: ApiErrorBody) {
    super(`${body.code}: ${body.message}`);
  }
}

export interface Identity {
  account_id: string;
  role: "IssuerAdmin" | "Trader";
  balance: number;
  legal_name: string;
  contact: string;
}

export interface Analytics {
  total_minted: number;
  total_certificates_uploaded: number;
  duplicate_attempts: number;
  open_primary: number;
  open_secondary: number;
  total_trade_volume: number;
  as_of_height: number;
}

export interface Listing {
  listing_id: number;
  token_id: number;
  seller: string;
  price: number;
  tier: "Primary" | "Secondary";
  status: "Open" | "Filled" | "Cancelled";
  created_at: number;
}

export interface TokenInfo {
  token_id: number;
  name: string;
  symbol: string;
  project_id: string;
  quantity_tco2e: string;
  vintage_year: number;
  metadata_uri: string;
  certificate_hash: string;
  issuer: string;
  minted_at: number;
  owner: string;
}

export interface ProvenanceEntry {
  owner: string;
  acquired_at: number;
  basis: "Minted" | "Purchased";
  price: number | null;
  role: string | null;
  legal_name?: string | null;
}

export interface Provenance {
  token_id: number;
  entries: ProvenanceEntry[];
}

export interface Receipt {
  listing_id: number;
  token_id: number;
  buyer: string;
  seller: string;
  price: number;
  royalty: number;
  seller_credit: number;
  network_fee: number;
  block_height: number;
}

export interface ChainHead {
  height: number;
  digest: string;
  timestamp: number;
  tx_count: number;
}

export interface MintRequest {
  name: string;
  symbol: string;
  project_id: string;
  quantity_tco2e: string;
  vintage_year: number;
  metadata_uri: string;
  certificate_digest: string;
  primary_price: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The full client surface; views depend on this so tests can inject fakes. */
export interface MarketApi {
  whoami(): Promise<Identity>;
  analytics(): Promise<{ data: Analytics; raw: string }>;
  openListings(tier?: "primary" | "secondary"): Promise<Listing[]>;
  token(tokenId: number): Promise<TokenInfo>;
  provenance(tokenId: number): Promise<Provenance>;
  trades(tokenId: number): Promise<Receipt[]>;
  uploadCertificate(data: Uint8Array): Promise<{ digest: string; size: number }>;
  fetchCertificate(digest: string): Promise<Uint8Array>;
  certificateUrl(digest: string): string;
  mint(request: MintRequest): Promise<{ token_id: number; listing_id: number }>;
  listForSale(tokenId: number, price: number): Promise<Listing>;
  cancelListing(listingId: number): Promise<Listing>;
  buy(listingId: number): Promise<Receipt>;
  chainHead(): Promise<ChainHead>;
}

export class ApiClient implements MarketApi {
  constructor(
    private baseUrl: string,
    private credential: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.credential) headers["Authorization"] = `Bearer ${this.credential}`;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: this.headers() };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    if (!response.ok) throw new ServiceError(response.status, JSON.parse(text) as ApiErrorBody);
    return JSON.parse(text) as T;
  }

  whoami(): Promise<Identity> {
    return this.request<Identity>("GET", "/accounts/me/identity");
  }

  // raw text kept alongside so the dashboard can prove byte-fidelity
  async analytics(): Promise<{ data: Analytics; raw: string }> {
    const response = await this.fetchFn(this.baseUrl + "/analytics", {
      headers: this.headers(),
    });
    const raw = await response.text();
    if (!response.ok) throw new ServiceError(response.status, JSON.parse(raw) as ApiErrorBody);
    return { data: JSON.parse(raw) as Analytics, raw };
  }

  openListings(tier?: "primary" | "secondary"): Promise<Listing[]> {
    const query = tier ? `?tier=${tier}` : "";
    return this.request<Listing[]>("GET", `/listings${query}`);
  }

  token(tokenId: number): Promise<TokenInfo> {
    return this.request<TokenInfo>("GET", `/tokens/${tokenId}`);
  }

  provenance(tokenId: number): Promise<Provenance> {
    return this.request<Provenance>("GET", `/tokens/${tokenId}/provenance`);
  }

  trades(tokenId: number): Promise<Receipt[]> {
    return this.request<Receipt[]>("GET", `/tokens/${tokenId}/trades`);
  }

  async uploadCertificate(data: Uint8Array): Promise<{ digest: string; size: number }> {
    const buffer = data.buffer.slice(
      data.byteOffset,
      data.byteOffset + data.byteLength,
    ) as ArrayBuffer;
    const response = await this.fetchFn(this.baseUrl + "/certificates", {
      method: "POST",
      headers: this.headers({ "Content-Type": "application/octet-stream" }),
      body: buffer,
    });
    const text = await response.text();
    if (!response.ok) throw new ServiceError(response.status, JSON.parse(text) as ApiErrorBody);
    return JSON.parse(text) as { digest: string; size: number };
  }

  async fetchCertificate(digest: string): Promise<Uint8Array> {
    const response = await this.fetchFn(this.baseUrl + `/certificates/${digest}`, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ServiceError(response.status, JSON.parse(await response.text()) as ApiErrorBody);
    }
    return new Uint8Array(await response.arrayBuffer());
  }

  certificateUrl(digest: string): string {
    return `${this.baseUrl}/certificates/${digest}`;
  }

  mint(request: MintRequest): Promise<{ token_id: number; listing_id: number }> {
    return this.request("POST", "/tokens", request);
  }

  listForSale(tokenId: number, price: number): Promise<Listing> {
    return this.request("POST", "/listings", { token_id: tokenId, price });
  }

  cancelListing(listingId: number): Promise<Listing> {
    return this.request("POST", `/listings/${listingId}/cancel`, {});
  }

  buy(listingId: number): Promise<Receipt> {
    return this.request("POST", `/listings/${listingId}/buy`, {});
  }

  chainHead(): Promise<ChainHead> {
    return this.request<ChainHead>("GET", "/chain/head");
  }
}
