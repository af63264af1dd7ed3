"""Provider price catalogs and the conversion of usage quantities to money.

Catalogs are strict JSON with all prices written as decimal strings.
Tiered rates are marginal (graduated): each tier charges only the portion
of the quantity falling inside it. Missing rates are hard errors; a
decision-support tool must never silently price a resource at zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN
from typing import Any

from .errors import CatalogError, MissingRateError
from .money import MONEY_EXP, as_decimal
from .months import Month, SimulationWindow

VM_HOURS = "vm_hours"
STORAGE_GB_MONTH = "storage_gb_month"
IO_IN_REQUESTS = "io_in_requests"
IO_OUT_REQUESTS = "io_out_requests"
IO_GB = "io_gb"
DATA_IN_GB = "data_in_gb"
DATA_OUT_GB = "data_out_gb"
DIMENSIONS = (VM_HOURS, STORAGE_GB_MONTH, IO_IN_REQUESTS, IO_OUT_REQUESTS,
              IO_GB, DATA_IN_GB, DATA_OUT_GB)

TRANSFER_DIMENSIONS = (DATA_IN_GB, DATA_OUT_GB)

INTERNET = "internet"
INTRA_REGION = "intra_region"
INTER_REGION = "inter_region"
SCOPES = (INTERNET, INTRA_REGION, INTER_REGION)

ON_DEMAND = "on_demand"
RESERVED = "reserved"


@dataclass(frozen=True)
class Tier:
    """One pricing tier; upper_bound None means unbounded (the last tier)."""

    upper_bound: Decimal | None
    unit_price: Decimal


@dataclass(frozen=True)
class RateEntry:
    provider: str
    region: str
    dimension: str
    sku: str | None = None
    scope: str | None = None
    flat_price: Decimal | None = None
    tiers: tuple[Tier, ...] = ()

    @property
    def key(self) -> tuple:
        return (self.provider, self.region, self.dimension, self.sku, self.scope)


@dataclass(frozen=True)
class PurchaseOption:
    kind: str  # on_demand or reserved
    hourly_rate: Decimal
    term_months: int | None = None
    upfront_fee: Decimal | None = None


@dataclass(frozen=True)
class InstanceSku:
    provider: str
    region: str
    name: str
    purchase_options: tuple[PurchaseOption, ...]

    def on_demand_rate(self) -> Decimal:
        return min(o.hourly_rate for o in self.purchase_options if o.kind == ON_DEMAND)

    def reserved_option(self, term_months: int | None) -> PurchaseOption | None:
        candidates = [o for o in self.purchase_options if o.kind == RESERVED]
        if term_months is not None:
            candidates = [o for o in candidates if o.term_months == term_months]
        if len(candidates) == 1:
            return candidates[0]
        return None


class PriceCatalog:
    """Validated, immutable rate lookup for one currency."""

    def __init__(self, currency: str, entries: tuple[RateEntry, ...],
                 skus: tuple[InstanceSku, ...], warnings: tuple[str, ...] = ()):
        self.currency = currency
        self.entries = entries
        self.skus = skus
        self.warnings = warnings
        self._rates = {entry.key: entry for entry in entries}
        self._skus = {(sku.provider, sku.region, sku.name): sku for sku in skus}

    def lookup(self, provider: str, region: str, dimension: str,
               sku: str | None = None, scope: str | None = None) -> RateEntry:
        entry = self._rates.get((provider, region, dimension, sku, scope))
        if entry is None:
            raise MissingRateError(f"no rate for {_key_text(provider, region, dimension, sku, scope)}",
                                   _key_text(provider, region, dimension, sku, scope))
        return entry

    def find_sku(self, provider: str, region: str, name: str) -> InstanceSku | None:
        return self._skus.get((provider, region, name))


def _key_text(provider: str, region: str, dimension: str,
              sku: str | None, scope: str | None) -> str:
    parts = [provider, region, dimension]
    if sku is not None:
        parts.append(sku)
    if scope is not None:
        parts.append(scope)
    return "/".join(parts)


# --- loading -----------------------------------------------------------------

def _price_at(obj: dict, key: str, path: str) -> Decimal:
    value = obj[key]
    if not isinstance(value, str):
        raise CatalogError(f"{path}.{key}: prices must be decimal strings, got {value!r}")
    try:
        price = Decimal(value)
    except InvalidOperation as exc:
        raise CatalogError(f"{path}.{key}: invalid decimal {value!r}") from exc
    if not price.is_finite():
        raise CatalogError(f"{path}.{key}: price must be finite")
    return price


def _bound_at(value: Any, path: str) -> Decimal | None:
    if value is None:
        return None
    if isinstance(value, bool) or isinstance(value, float):
        raise CatalogError(f"{path}: tier bounds must be integers, strings or null")
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, str):
        try:
            return Decimal(value)
        except InvalidOperation as exc:
            raise CatalogError(f"{path}: invalid decimal {value!r}") from exc
    raise CatalogError(f"{path}: tier bounds must be integers, strings or null")


def _strict_keys(obj: Any, path: str, required: tuple[str, ...],
                 optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(obj, dict):
        raise CatalogError(f"{path}: expected an object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise CatalogError(f"{path}: unknown key(s): {', '.join(unknown)}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise CatalogError(f"{path}: missing required key(s): {', '.join(missing)}")
    return obj


def _parse_entry(value: Any, path: str) -> RateEntry:
    obj = _strict_keys(value, path, ("provider", "region", "dimension", "pricing"),
                       ("sku", "scope"))
    dimension = obj["dimension"]
    if dimension not in DIMENSIONS:
        raise CatalogError(f"{path}.dimension: unknown dimension {dimension!r}")
    scope = obj.get("scope")
    if dimension in TRANSFER_DIMENSIONS:
        if scope not in SCOPES:
            raise CatalogError(f"{path}.scope: transfer entries need a scope "
                               f"(internet, intra_region or inter_region), got {scope!r}")
    elif scope is not None:
        raise CatalogError(f"{path}.scope: scope is only valid on transfer dimensions")
    pricing = _strict_keys(obj["pricing"], f"{path}.pricing", (), ("flat", "tiers"))
    flat = None
    tiers: tuple[Tier, ...] = ()
    if ("flat" in pricing) == ("tiers" in pricing):
        raise CatalogError(f"{path}.pricing: exactly one of 'flat' or 'tiers' is required")
    if "flat" in pricing:
        flat = _price_at(pricing, "flat", f"{path}.pricing")
        if flat < 0:
            raise CatalogError(f"{path}.pricing.flat: negative price")
    else:
        raw_tiers = pricing["tiers"]
        if not isinstance(raw_tiers, list) or not raw_tiers:
            raise CatalogError(f"{path}.pricing.tiers: expected a non-empty array")
        parsed = []
        for i, raw in enumerate(raw_tiers):
            tobj = _strict_keys(raw, f"{path}.pricing.tiers[{i}]",
                                ("upper_bound", "unit_price"))
            bound = _bound_at(tobj["upper_bound"], f"{path}.pricing.tiers[{i}].upper_bound")
            price = _price_at(tobj, "unit_price", f"{path}.pricing.tiers[{i}]")
            if price < 0:
                raise CatalogError(f"{path}.pricing.tiers[{i}].unit_price: negative price")
            if bound is not None and bound <= 0:
                raise CatalogError(f"{path}.pricing.tiers[{i}].upper_bound: must be positive")
            parsed.append(Tier(bound, price))
        for i in range(1, len(parsed)):
            prev, cur = parsed[i - 1].upper_bound, parsed[i].upper_bound
            if prev is None:
                raise CatalogError(f"{path}.pricing.tiers[{i}]: only the last tier may be unbounded")
            if cur is not None and cur <= prev:
                raise CatalogError(f"{path}.pricing.tiers[{i}]: bounds must be strictly increasing")
        if parsed[-1].upper_bound is not None:
            raise CatalogError(f"{path}.pricing.tiers: the last tier must be unbounded (null)")
        tiers = tuple(parsed)
    return RateEntry(
        provider=obj["provider"], region=obj["region"], dimension=dimension,
        sku=obj.get("sku"), scope=scope, flat_price=flat, tiers=tiers,
    )


def _parse_sku(value: Any, path: str, warnings: list[str]) -> InstanceSku:
    obj = _strict_keys(value, path, ("provider", "region", "name", "purchase_options"))
    raw_options = obj["purchase_options"]
    if not isinstance(raw_options, list) or not raw_options:
        raise CatalogError(f"{path}.purchase_options: expected a non-empty array")
    options = []
    for i, raw in enumerate(raw_options):
        opath = f"{path}.purchase_options[{i}]"
        oobj = _strict_keys(raw, opath, ("kind", "hourly_rate"),
                            ("term_months", "upfront_fee"))
        kind = oobj["kind"]
        rate = _price_at(oobj, "hourly_rate", opath)
        if rate < 0:
            raise CatalogError(f"{opath}.hourly_rate: negative price")
        if kind == ON_DEMAND:
            if "term_months" in oobj or "upfront_fee" in oobj:
                raise CatalogError(f"{opath}: on_demand options carry no term or upfront fee")
            options.append(PurchaseOption(ON_DEMAND, rate))
        elif kind == RESERVED:
            term = oobj.get("term_months")
            if not isinstance(term, int) or isinstance(term, bool) or term < 1:
                raise CatalogError(f"{opath}.term_months: reserved options need a positive term")
            if "upfront_fee" not in oobj:
                raise CatalogError(f"{opath}.upfront_fee: reserved options need an upfront fee")
            fee = _price_at(oobj, "upfront_fee", opath)
            if fee < 0:
                raise CatalogError(f"{opath}.upfront_fee: negative fee")
            options.append(PurchaseOption(RESERVED, rate, term, fee))
        else:
            raise CatalogError(f"{opath}.kind: unknown purchase option kind {kind!r}")
    sku = InstanceSku(obj["provider"], obj["region"], obj["name"], tuple(options))
    on_demand = [o for o in options if o.kind == ON_DEMAND]
    if not on_demand:
        raise CatalogError(f"{path}: at least one on_demand purchase option is required")
    cheapest = min(o.hourly_rate for o in on_demand)
    for option in options:
        if option.kind == RESERVED and option.hourly_rate > cheapest:
            warnings.append(
                f"{sku.provider}/{sku.region}/{sku.name}: reserved hourly rate "
                f"{option.hourly_rate} exceeds the on-demand rate {cheapest}")
    return sku


def load_catalog(text: str) -> PriceCatalog:
    """Parse and validate a catalog document; raises CatalogError on any defect."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    top = _strict_keys(data, "$", ("currency", "entries"), ("skus",))
    currency = top["currency"]
    if not isinstance(currency, str) or not currency:
        raise CatalogError("$.currency: expected a non-empty string")
    if not isinstance(top["entries"], list):
        raise CatalogError("$.entries: expected an array")
    warnings: list[str] = []
    entries = []
    seen_keys: set[tuple] = set()
    for i, raw in enumerate(top["entries"]):
        entry = _parse_entry(raw, f"entries[{i}]")
        if entry.key in seen_keys:
            raise CatalogError(f"entries[{i}]: duplicate rate key "
                               f"{_key_text(*entry.key)}")
        seen_keys.add(entry.key)
        entries.append(entry)
    skus = []
    seen_skus: set[tuple] = set()
    for i, raw in enumerate(top.get("skus", [])):
        sku = _parse_sku(raw, f"skus[{i}]", warnings)
        key = (sku.provider, sku.region, sku.name)
        if key in seen_skus:
            raise CatalogError(f"skus[{i}]: duplicate sku {'/'.join(key)}")
        seen_skus.add(key)
        skus.append(sku)
    return PriceCatalog(currency, tuple(entries), tuple(skus), tuple(warnings))


def load_catalog_file(path: str) -> PriceCatalog:
    with open(path, encoding="utf-8") as handle:
        return load_catalog(handle.read())


# --- pricing ------------------------------------------------------------------

def lookup_rate(catalog: PriceCatalog, provider: str, region: str, dimension: str,
                sku: str | None = None, scope: str | None = None) -> RateEntry:
    """The unique entry for the key; MissingRateError names the full key."""
    return catalog.lookup(provider, region, dimension, sku, scope)


def price_quantity(entry: RateEntry, quantity: float | int | Decimal) -> Decimal:
    """Money owed for a quantity: flat multiplication or marginal tiering."""
    cost, _ = price_breakdown(entry, quantity)
    return cost


def price_breakdown(entry: RateEntry, quantity: float | int | Decimal) -> tuple[Decimal, str]:
    """Cost plus a human-readable unit-cost basis (flat rate or tier split)."""
    q = as_decimal(quantity)
    if q < 0:
        raise ValueError(f"quantity must be >= 0, got {quantity}")
    if entry.flat_price is not None:
        cost = (q * entry.flat_price).quantize(MONEY_EXP, rounding=ROUND_HALF_EVEN)
        return cost, f"flat @ {entry.flat_price}"
    total = Decimal(0)
    pieces = []
    lower = Decimal(0)
    for tier in entry.tiers:
        if tier.upper_bound is None:
            portion = q - lower
        else:
            portion = min(q, tier.upper_bound) - lower
            lower = tier.upper_bound
        if portion <= 0:
            continue
        total += portion * tier.unit_price
        pieces.append(f"{portion}@{tier.unit_price}")
        if tier.upper_bound is not None and q <= tier.upper_bound:
            break
    cost = total.quantize(MONEY_EXP, rounding=ROUND_HALF_EVEN)
    return cost, "tiered " + " + ".join(pieces) if pieces else "tiered (no usage)"


def reservation_charges(option: PurchaseOption,
                        window: SimulationWindow) -> list[tuple[Month, Decimal]]:
    """Upfront fees inside the window: first month, then each term renewal."""
    if option.kind != RESERVED:
        raise ValueError("reservation charges apply to reserved options only")
    assert option.term_months is not None and option.upfront_fee is not None
    if option.upfront_fee == 0:
        return []
    charges = []
    month = window.start
    while month <= window.end:
        charges.append((month, option.upfront_fee.quantize(MONEY_EXP)))
        month = month.add(option.term_months)
    return charges
