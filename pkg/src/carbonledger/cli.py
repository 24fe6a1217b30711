"""Operator and demo command line.

Thin mapping onto the REST endpoints: in ``--output json`` mode each command
prints the exact response body the service returned, so scripted use sees the
identical canonical JSON the API emits. ``init`` and ``serve`` are the only
commands that run without a reachable service.
"""

from __future__ import annotations

import json
import secrets
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import httpx

from .canonical import canonical_bytes
from .service import ServiceConfig, load_config

DEFAULT_URL = "http://127.0.0.1:8547"


@dataclass
class CliProfile:
    url: str
    credential: str
    output: str  # "human" | "json"

    def headers(self) -> dict:
        return {"Authorization": f"Bearer {self.credential}"} if self.credential else {}


def _request(profile: CliProfile, method: str, path: str, **kwargs) -> httpx.Response:
    headers = {**profile.headers(), **kwargs.pop("headers", {})}
    try:
        return httpx.request(
            method, profile.url.rstrip("/") + path, headers=headers, timeout=60.0, **kwargs
        )
    except httpx.HTTPError as exc:
        click.echo(f"cannot reach service at {profile.url}: {exc}", err=True)
        sys.exit(2)


def _emit(profile: CliProfile, resp: httpx.Response, human: str | None = None) -> dict:
    """Print the response and exit nonzero on service errors."""
    ok = resp.status_code < 400
    if profile.output == "json":
        sys.stdout.buffer.write(resp.content + b"\n")
    else:
        if ok:
            click.echo(human if human is not None else resp.text)
        else:
            body = resp.json()
            click.echo(f"error {body.get('code')}: {body.get('message')}", err=True)
    if not ok:
        sys.exit(1)
    return resp.json() if resp.headers.get("content-type", "").startswith("application/json") else {}


@click.group()
@click.option("--url", envvar="CARBONLEDGER_URL", default=DEFAULT_URL, show_default=True)
@click.option("--credential", envvar="CARBONLEDGER_CREDENTIAL", default="")
@click.option(
    "--output", type=click.Choice(["human", "json"]), envvar="CARBONLEDGER_OUTPUT", default="human"
)
@click.pass_context
def main(ctx, url, credential, output):
    """Carbon-credit market service client and operator tool."""
    ctx.obj = CliProfile(url=url, credential=credential, output=output)


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Where to write the config file [default: DATA_DIR/config.json]")
@click.option("--profile", "platform_profile", default="solana", show_default=True)
@click.option("--block-interval", "block_interval_s", type=float, default=1.0, show_default=True)
@click.option("--royalty-bps", type=int, default=500, show_default=True)
@click.option("--listen", "listen_address", default="127.0.0.1:8547", show_default=True)
@click.option("--issuer-name", default="Deployment Issuer", show_default=True)
@click.option("--issuer-contact", default="")
@click.option("--hash-function", default="sha256", show_default=True)
def init(data_dir, config_path, platform_profile, block_interval_s, royalty_bps,
         listen_address, issuer_name, issuer_contact, hash_function):
    """Write a service config file and create the data directory."""
    config = ServiceConfig(
        data_dir=data_dir,
        platform_profile=platform_profile,
        block_interval_s=block_interval_s,
        royalty_bps=royalty_bps,
        listen_address=listen_address,
        issuer_name=issuer_name,
        issuer_contact=issuer_contact,
        hash_function=hash_function,
    ).validate()
    Path(data_dir).mkdir(parents=True, exist_ok=True)
    path = Path(config_path) if config_path else Path(data_dir) / "config.json"
    path.write_bytes(canonical_bytes(config.to_json()) + b"\n")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              envvar="CARBONLEDGER_CONFIG")
@click.option("--data-dir", default=None)
@click.option("--listen", "listen_address", default=None)
@click.option("--ui-dir", default=None, help="Serve a built web UI from this directory at /ui")
def serve(config_path, data_dir, listen_address, ui_dir):
    """Run the market service (creates genesis on first start)."""
    import uvicorn

    from .http import create_app
    from .service import MarketService

    config = load_config(config_path, data_dir=data_dir, listen_address=listen_address)
    service = MarketService(config)
    service.start()
    if service.issuer_id:
        click.echo(f"issuer account: {service.issuer_id}")
        click.echo(f"issuer credential: {Path(config.data_dir) / 'issuer_credential'}")
    host, _, port = config.listen_address.rpartition(":")
    app = create_app(service, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    finally:
        service.stop()


@main.group()
def account():
    """Account management (issuer only)."""


@account.command("register")
@click.option("--name", "legal_name", required=True)
@click.option("--contact", default="")
@click.option("--role", default="Trader", type=click.Choice(["Trader", "IssuerAdmin"]))
@click.pass_obj
def account_register(profile, legal_name, contact, role):
    resp = _request(profile, "POST", "/accounts",
                    json={"legal_name": legal_name, "contact": contact, "role": role})
    body = resp.json() if resp.status_code < 500 else {}
    _emit(profile, resp,
          human=f"account {body.get('account_id')}\ncredential {body.get('credential')}")


@main.command()
@click.option("--account", "account_id", required=True)
@click.option("--amount", type=int, required=True, help="nanoUSD")
@click.pass_obj
def deposit(profile, account_id, amount):
    """Credit an account (issuer only)."""
    resp = _request(profile, "POST", "/deposits",
                    json={"account_id": account_id, "amount": amount})
    body = resp.json()
    _emit(profile, resp, human=f"balance {body.get('balance')}")


@main.group()
def cert():
    """Certificate document management."""


@cert.command("upload")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def cert_upload(profile, file):
    data = Path(file).read_bytes()
    resp = _request(profile, "POST", "/certificates", content=data,
                    headers={**profile.headers(), "Content-Type": "application/octet-stream"})
    body = resp.json()
    _emit(profile, resp, human=f"digest {body.get('digest')}")


@main.command()
@click.option("--cert", "certificate_digest", required=True)
@click.option("--name", required=True)
@click.option("--symbol", required=True)
@click.option("--project", "project_id", default="")
@click.option("--quantity", "quantity_tco2e", default="1", help="tonnes CO2e")
@click.option("--vintage", "vintage_year", type=int, default=2024)
@click.option("--uri", "metadata_uri", default="")
@click.option("--price", "primary_price", type=int, required=True, help="nanoUSD")
@click.pass_obj
def mint(profile, certificate_digest, name, symbol, project_id, quantity_tco2e,
         vintage_year, metadata_uri, primary_price):
    """Mint a certificate token and list it on the primary market (issuer only)."""
    resp = _request(profile, "POST", "/tokens", json={
        "name": name, "symbol": symbol, "project_id": project_id,
        "quantity_tco2e": quantity_tco2e, "vintage_year": vintage_year,
        "metadata_uri": metadata_uri, "certificate_digest": certificate_digest,
        "primary_price": primary_price,
    })
    body = resp.json()
    _emit(profile, resp,
          human=f"token {body.get('token_id')} listed (listing {body.get('listing_id')})")


@main.command()
@click.option("--tier", type=click.Choice(["primary", "secondary"]), default=None)
@click.pass_obj
def listings(profile, tier):
    """Show open listings."""
    path = "/listings" + (f"?tier={tier}" if tier else "")
    resp = _request(profile, "GET", path)
    rows = resp.json() if resp.status_code < 400 else []
    text = "\n".join(
        f"listing {l['listing_id']}  token {l['token_id']}  {l['tier']:<9} "
        f"price {l['price']}  seller {l['seller'][:12]}…"
        for l in rows
    ) or "no open listings"
    _emit(profile, resp, human=text)


@main.command()
@click.option("--token", "token_id", type=int, required=True)
@click.option("--price", type=int, required=True, help="nanoUSD")
@click.pass_obj
def sell(profile, token_id, price):
    """List an owned token for sale."""
    resp = _request(profile, "POST", "/listings", json={"token_id": token_id, "price": price})
    body = resp.json()
    _emit(profile, resp,
          human=f"listing {body.get('listing_id')} ({body.get('tier')}) at {body.get('price')}")


@main.command()
@click.option("--listing", "listing_id", type=int, required=True)
@click.pass_obj
def buy(profile, listing_id):
    """Buy an open listing."""
    resp = _request(profile, "POST", f"/listings/{listing_id}/buy", json={})
    body = resp.json()
    _emit(profile, resp, human=(
        f"bought token {body.get('token_id')} for {body.get('price')} "
        f"(royalty {body.get('royalty')}, fee {body.get('network_fee')})"
    ))


@main.command()
@click.option("--listing", "listing_id", type=int, required=True)
@click.pass_obj
def cancel(profile, listing_id):
    """Cancel an own open listing."""
    resp = _request(profile, "POST", f"/listings/{listing_id}/cancel", json={})
    _emit(profile, resp, human=f"listing {listing_id} cancelled")


@main.command()
@click.option("--token", "token_id", type=int, required=True)
@click.pass_obj
def provenance(profile, token_id):
    """Show a token's full owner history."""
    resp = _request(profile, "GET", f"/tokens/{token_id}/provenance")
    body = resp.json()
    rows = body.get("entries", []) if resp.status_code < 400 else []
    text = "\n".join(
        f"height {e['acquired_at']:>4}  {e['basis']:<9} "
        f"{e['owner'][:16]}… {'' if e['price'] is None else e['price']}"
        for e in rows
    )
    _emit(profile, resp, human=text)


@main.command()
@click.pass_obj
def stats(profile):
    """Dashboard counters."""
    resp = _request(profile, "GET", "/analytics")
    body = resp.json()
    text = "\n".join(f"{key} {value}" for key, value in sorted(body.items()))
    _emit(profile, resp, human=text)


@main.group()
def chain():
    """Chain inspection."""


@chain.command("verify")
@click.pass_obj
def chain_verify(profile):
    """Verify the full stored chain; exit 0 iff it is intact."""
    resp = _request(profile, "GET", "/chain/verify")
    report = resp.json()
    if profile.output == "json":
        sys.stdout.buffer.write(resp.content + b"\n")
    else:
        if report.get("ok"):
            click.echo("chain ok")
        else:
            click.echo(
                f"chain INVALID at height {report.get('height')}: "
                f"{report.get('rule')} ({report.get('detail')})", err=True,
            )
    sys.exit(0 if report.get("ok") else 1)


@chain.command("export")
@click.option("--out", type=click.Path(), default=None, help="write to file instead of stdout")
@click.pass_obj
def chain_export(profile, out):
    """Dump the block log, one canonical-JSON block per line."""
    head = _request(profile, "GET", "/chain/head").json()
    sink = open(out, "wb") if out else sys.stdout.buffer
    try:
        for height in range(head["height"] + 1):
            resp = _request(profile, "GET", f"/chain/blocks/{height}")
            if resp.status_code >= 400:
                click.echo(f"export failed at height {height}", err=True)
                sys.exit(1)
            sink.write(resp.content + b"\n")
    finally:
        if out:
            sink.close()


@main.group()
def demo():
    """Demo fixtures."""


@demo.command("seed")
@click.pass_obj
def demo_seed(profile):
    """Seed a fresh deployment: 3 traders, 3 certificates, 1 duplicate attempt, 4 trades.

    Requires the issuer credential. Leaves one open secondary listing so the
    market views have content.
    """

    def must(resp: httpx.Response) -> dict:
        if resp.status_code >= 400:
            body = resp.json()
            click.echo(f"demo seed failed: {body.get('code')}: {body.get('message')}", err=True)
            sys.exit(1)
        return resp.json()

    def as_user(credential, method, path, **kwargs):
        return _request(CliProfile(profile.url, credential, profile.output),
                        method, path, **kwargs)

    salt = secrets.token_hex(4)
    traders = {}
    for name, contact in [
        ("Aurora Timber Cooperative", "ops@aurora-timber.example"),
        ("Borealis Steel Works", "esg@borealis-steel.example"),
        ("Cedarline Logistics", "green@cedarline.example"),
    ]:
        traders[name] = must(_request(profile, "POST", "/accounts",
                                      json={"legal_name": name, "contact": contact, "role": "Trader"}))
        must(_request(profile, "POST", "/deposits",
                      json={"account_id": traders[name]["account_id"], "amount": 10_000_000_000}))

    certificates = []
    tokens = []
    for index, (project, quantity) in enumerate(
        [("Riverside Afforestation", "120.5"), ("Gulf Mangrove Restoration", "75"),
         ("Highlands Wind Offset", "300")]
    ):
        data = f"CARBON CREDIT CERTIFICATE\nproject: {project}\nseries: {salt}-{index}\n".encode()
        upload = must(_request(profile, "POST", "/certificates", content=data,
                               headers={"Content-Type": "application/octet-stream"}))
        certificates.append(upload["digest"])
        tokens.append(must(_request(profile, "POST", "/tokens", json={
            "name": f"{project} Credit", "symbol": f"CC{index + 1}", "project_id": project,
            "quantity_tco2e": quantity, "vintage_year": 2023, "metadata_uri": "",
            "certificate_digest": upload["digest"], "primary_price": (index + 1) * 100_000_000,
        })))

    # one rejected duplicate mint, for the dashboard counter
    dup = _request(profile, "POST", "/tokens", json={
        "name": "Duplicate Attempt", "symbol": "DUP", "project_id": "",
        "quantity_tco2e": "1", "vintage_year": 2023, "metadata_uri": "",
        "certificate_digest": certificates[0], "primary_price": 1,
    })
    duplicate_rejected = dup.status_code == 409

    names = list(traders)
    cred_a = traders[names[0]]["credential"]
    cred_b = traders[names[1]]["credential"]
    cred_c = traders[names[2]]["credential"]

    # trades: two primary buys, one secondary resale, one more primary buy
    must(as_user(cred_a, "POST", f"/listings/{tokens[0]['listing_id']}/buy", json={}))
    must(as_user(cred_b, "POST", f"/listings/{tokens[1]['listing_id']}/buy", json={}))
    relist = must(as_user(cred_a, "POST", "/listings",
                          json={"token_id": tokens[0]["token_id"], "price": 150_000_000}))
    must(as_user(cred_b, "POST", f"/listings/{relist['listing_id']}/buy", json={}))
    must(as_user(cred_c, "POST", f"/listings/{tokens[2]['listing_id']}/buy", json={}))
    # leave an open secondary listing
    open_secondary = must(as_user(cred_b, "POST", "/listings",
                                  json={"token_id": tokens[0]["token_id"], "price": 180_000_000}))

    summary = {
        "traders": [
            {"legal_name": name, "account_id": t["account_id"], "credential": t["credential"]}
            for name, t in traders.items()
        ],
        "certificates": certificates,
        "tokens": [t["token_id"] for t in tokens],
        "duplicate_rejected": duplicate_rejected,
        "open_secondary_listing": open_secondary["listing_id"],
    }
    if profile.output == "json":
        sys.stdout.buffer.write(canonical_bytes(summary) + b"\n")
    else:
        click.echo(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
