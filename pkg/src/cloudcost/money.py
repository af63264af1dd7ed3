"""Exact decimal money helpers.

Amounts are fixed-point decimals carrying 6 fractional digits internally;
display rounds half-even to 2 digits. Unit prices stay unquantized so
sub-micro rates (per-request pricing) keep full precision.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal

MONEY_EXP = Decimal("0.000001")
CENT_EXP = Decimal("0.01")
ZERO = Decimal("0.000000")


def to_money(value: Decimal | int | float | str) -> Decimal:
    """Convert to a money amount at 6 fractional digits."""
    if isinstance(value, Decimal):
        d = value
    elif isinstance(value, float):
        # str() gives the shortest round-trip form, avoiding binary artifacts
        d = Decimal(str(value))
    else:
        d = Decimal(value)
    return d.quantize(MONEY_EXP, rounding=ROUND_HALF_EVEN)


def as_decimal(value: Decimal | int | float | str) -> Decimal:
    """Exact decimal view of a quantity, without money quantization."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(str(value))
    return Decimal(value)


def format_money(value: Decimal) -> str:
    """Render with exactly 2 decimals, rounding half-even."""
    return str(value.quantize(CENT_EXP, rounding=ROUND_HALF_EVEN))


def format_money_grouped(value: Decimal) -> str:
    """Render with 2 decimals and thousands separators for console tables."""
    return f"{value.quantize(CENT_EXP, rounding=ROUND_HALF_EVEN):,}"
