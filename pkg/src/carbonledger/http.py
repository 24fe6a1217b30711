"""REST surface over the market service.

All request and response bodies are canonical JSON (sorted keys, no
whitespace); errors are ``{code, message, detail}``. Chain, market, token,
and analytics reads are public; commands and identity lookups require a
bearer credential.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from functools import partial
from pathlib import Path

import anyio
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .canonical import Digest, canonical_bytes
from .errors import MarketError, NotFound, Unauthorized
from .service import CommandEnvelope, MarketService

_STATUS_BY_CODE = {
    "Unauthorized": 401,
    "InsufficientFunds": 402,
    "Forbidden": 403,
    "NotIssuer": 403,
    "NotOwner": 403,
    "NotSeller": 403,
    "NotFound": 404,
    "UnknownAccount": 404,
    "UnknownCertificate": 404,
    "UnknownToken": 404,
    "UnknownListing": 404,
    "DuplicateCertificate": 409,
    "DuplicateIssuer": 409,
    "AlreadyListed": 409,
    "ListingClosed": 409,
    "SelfTrade": 409,
    "PayloadTooLarge": 413,
}


class CanonicalJSONResponse(JSONResponse):
    def render(self, content) -> bytes:
        return canonical_bytes(content)


class RegisterBody(BaseModel):
    legal_name: str
    contact: str = ""
    role: str = "Trader"
    idempotency_key: str | None = None


class DepositBody(BaseModel):
    account_id: str
    amount: int
    idempotency_key: str | None = None


class MintBody(BaseModel):
    name: str
    symbol: str
    project_id: str = ""
    quantity_tco2e: str | int | float
    vintage_year: int
    metadata_uri: str = ""
    certificate_digest: str
    primary_price: int
    idempotency_key: str | None = None


class ListBody(BaseModel):
    token_id: int
    price: int
    idempotency_key: str | None = None


class ActionBody(BaseModel):
    idempotency_key: str | None = None


def _credential(request: Request) -> str:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return ""


def create_app(service: MarketService, ui_dir: str | Path | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app):
        # Blocking command handlers hold a worker thread until their block
        # commits; keep headroom for bursts of concurrent clients.
        anyio.to_thread.current_default_thread_limiter().total_tokens = 128
        yield

    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None, lifespan=lifespan)

    from starlette.middleware.cors import CORSMiddleware

    # the console may be hosted on another origin; all auth is bearer-header
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(MarketError)
    async def market_error_handler(_req, exc: MarketError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return CanonicalJSONResponse(exc.to_body(), status_code=status)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req, exc: RequestValidationError):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        body = {"code": "ValidationError", "message": "invalid request body", "detail": detail}
        return CanonicalJSONResponse(body, status_code=400)

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(_req, exc: StarletteHTTPException):
        body = {"code": "NotFound" if exc.status_code == 404 else "HttpError",
                "message": str(exc.detail), "detail": ""}
        return CanonicalJSONResponse(body, status_code=exc.status_code)

    async def run_command(request: Request, command: str, params: dict,
                          idempotency_key: str | None) -> dict:
        envelope = CommandEnvelope(
            credential=_credential(request),
            command=command,
            params=params,
            idempotency_key=idempotency_key,
        )
        return await anyio.to_thread.run_sync(partial(service.submit, envelope))

    def require_actor(request: Request) -> str:
        actor = service.resolve_credential(_credential(request))
        if actor is None:
            raise Unauthorized("unknown or missing credential")
        return actor

    # --- accounts ---

    @app.post("/accounts")
    async def register_account(request: Request, body: RegisterBody):
        params = {"legal_name": body.legal_name, "contact": body.contact, "role": body.role}
        result = await run_command(request, "register_account", params, body.idempotency_key)
        return CanonicalJSONResponse(result, status_code=201)

    @app.get("/accounts/{account_id}/identity")
    def identity(request: Request, account_id: str):
        actor = require_actor(request)
        target = actor if account_id == "me" else account_id
        return CanonicalJSONResponse(service.engine.identity_info(actor, target))

    @app.post("/deposits")
    async def deposit(request: Request, body: DepositBody):
        params = {"account_id": body.account_id, "amount": body.amount}
        result = await run_command(request, "deposit", params, body.idempotency_key)
        return CanonicalJSONResponse(result)

    # --- certificates ---

    @app.post("/certificates")
    async def upload_certificate(request: Request):
        data = await request.body()
        result = await run_command(request, "upload_certificate", {"data": data}, None)
        return CanonicalJSONResponse(result, status_code=201)

    @app.get("/certificates/{digest}")
    def get_certificate(digest: str):
        try:
            parsed = Digest.from_hex(digest)
        except ValueError:
            raise NotFound(f"malformed digest {digest!r}")
        data = service.store.get(parsed)
        return Response(content=data, media_type="application/octet-stream")

    # --- tokens ---

    @app.post("/tokens")
    async def mint(request: Request, body: MintBody):
        params = {
            "name": body.name,
            "symbol": body.symbol,
            "project_id": body.project_id,
            "quantity_tco2e": body.quantity_tco2e,
            "vintage_year": body.vintage_year,
            "metadata_uri": body.metadata_uri,
            "certificate_digest": body.certificate_digest,
            "primary_price": body.primary_price,
        }
        result = await run_command(request, "mint", params, body.idempotency_key)
        return CanonicalJSONResponse(result, status_code=201)

    @app.get("/tokens/{token_id}")
    def token_info(token_id: int):
        return CanonicalJSONResponse(service.engine.token_info(token_id))

    @app.get("/tokens/{token_id}/provenance")
    def provenance(request: Request, token_id: int):
        actor = service.resolve_credential(_credential(request))
        include_identities = actor is not None and actor == service.issuer_id
        return CanonicalJSONResponse(
            service.engine.provenance_report(token_id, include_identities)
        )

    @app.get("/tokens/{token_id}/trades")
    def trades(token_id: int):
        return CanonicalJSONResponse(service.engine.trade_history(token_id))

    # --- listings ---

    @app.post("/listings")
    async def create_listing(request: Request, body: ListBody):
        params = {"token_id": body.token_id, "price": body.price}
        result = await run_command(request, "list_for_sale", params, body.idempotency_key)
        return CanonicalJSONResponse(result, status_code=201)

    @app.post("/listings/{listing_id}/cancel")
    async def cancel_listing(request: Request, listing_id: int, body: ActionBody | None = None):
        key = body.idempotency_key if body else None
        result = await run_command(request, "cancel", {"listing_id": listing_id}, key)
        return CanonicalJSONResponse(result)

    @app.post("/listings/{listing_id}/buy")
    async def buy_listing(request: Request, listing_id: int, body: ActionBody | None = None):
        key = body.idempotency_key if body else None
        result = await run_command(request, "buy", {"listing_id": listing_id}, key)
        return CanonicalJSONResponse(result)

    @app.get("/listings")
    def open_listings(tier: str | None = None):
        if tier is not None and tier.lower() not in ("primary", "secondary"):
            body = {"code": "ValidationError", "message": "tier must be primary or secondary",
                    "detail": f"got {tier!r}"}
            return CanonicalJSONResponse(body, status_code=400)
        return CanonicalJSONResponse(service.engine.open_listings(tier))

    # --- analytics & chain ---

    @app.get("/analytics")
    def analytics():
        return CanonicalJSONResponse(service.engine.snapshot().to_json())

    @app.get("/chain/head")
    def chain_head():
        return CanonicalJSONResponse(service.engine.head())

    @app.get("/chain/blocks/{height}")
    def chain_block(height: int):
        line = service.engine.block_line(height)
        return Response(content=line, media_type="application/json")

    @app.get("/chain/verify")
    def chain_verify():
        report = service.verify_stored_chain()
        return CanonicalJSONResponse(report.to_json())

    if ui_dir is not None and Path(ui_dir).is_dir():
        from starlette.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
