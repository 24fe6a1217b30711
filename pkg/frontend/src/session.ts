import { ApiClient, FetchLike, Identity, MarketApi } from "./api.js";

// The session holds only what the server said about this credential; views
// re-resolve it after actions rather than updating balances optimistically.

export interface Session {
  baseUrl: string;
  credential: string;
  account: Identity;
  api: MarketApi;
}

export async function connect(
  baseUrl: string,
  credential: string,
  fetchFn?: FetchLike,
): Promise<Session> {
  const api = new ApiClient(baseUrl, credential, fetchFn);
  const account = await api.whoami();
  return { baseUrl, credential, account, api };
}

export async function refreshAccount(session: Session): Promise<Identity> {
  session.account = await session.api.whoami();
  return session.account;
}

export function canMint(session: Session): boolean {
  return session.account.role === "IssuerAdmin";
}

export type ViewName = "dashboard" | "market" | "mint" | "wallet" | "token";

export function visibleViews(session: Session): ViewName[] {
  const views: ViewName[] = ["dashboard", "market"];
  if (canMint(session)) views.push("mint");
  views.push("wallet");
  return views;
}
