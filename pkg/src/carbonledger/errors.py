"""Error hierarchy shared by every layer.

Each error carries a stable machine-readable ``code`` (the class name) that the
HTTP layer serializes as ``{code, message, detail}`` and the CLI passes through.
"""

from __future__ import annotations


class MarketError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str = "", detail: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.detail = detail

    @property
    def code(self) -> str:
        return self.__class__.__name__

    def to_body(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


# ledger
class EmptyLeafSet(MarketError): ...
class EmptyBatch(MarketError): ...
class InvalidTransactionId(MarketError): ...
class IndexOutOfRange(MarketError): ...


# content store
class EmptyPayload(MarketError): ...
class PayloadTooLarge(MarketError): ...
class NotFound(MarketError): ...


# registry
class NotIssuer(MarketError): ...
class DuplicateIssuer(MarketError): ...
class Forbidden(MarketError): ...
class UnknownAccount(MarketError): ...
class UnknownCertificate(MarketError): ...
class DuplicateCertificate(MarketError): ...
class UnknownToken(MarketError): ...
class NotOwner(MarketError): ...
class InvalidContext(MarketError): ...


# marketplace
class AlreadyListed(MarketError): ...
class NotSeller(MarketError): ...
class ListingClosed(MarketError): ...
class SelfTrade(MarketError): ...
class InsufficientFunds(MarketError): ...
class UnknownListing(MarketError): ...
class InvalidAmount(MarketError): ...


# service
class Unauthorized(MarketError): ...
class ConfigInvalid(MarketError): ...
class CorruptLog(MarketError):
    def __init__(self, message: str = "", detail: str = "", height: int | None = None):
        super().__init__(message, detail)
        self.height = height
