"""Small numeric helpers: big-integer text conversion and exact comparisons."""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction


def ceil_div(a: int, b: int) -> int:
    return (a + b - 1) // b


def int_str(n: int) -> str:
    # Decimal conversion is not subject to the interpreter's int/str digit limit.
    return format(Decimal(n), "f")


def parse_int(text) -> int:
    if isinstance(text, bool):
        raise ValueError(f"not an integer: {text!r}")
    if isinstance(text, int):
        return text
    s = str(text).strip()
    if not s or not s.lstrip("-").isdigit():
        raise ValueError(f"not an integer: {text!r}")
    return int(Decimal(s))


def frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return int_str(q.numerator)
    return f"{int_str(q.numerator)}/{int_str(q.denominator)}"


def digit_summary(n: int) -> dict:
    n = abs(n)
    return {"digits": len(int_str(n)), "bits": n.bit_length()}


def _log2_floor_approx(q: Fraction) -> int:
    # log2(q) lies strictly within one of this value
    return q.numerator.bit_length() - q.denominator.bit_length()


def cmp_scaled(a: Fraction, e1: int, b: Fraction, e2: int) -> int:
    """Sign of a*2**e1 - b*2**e2 for positive rationals a, b and any integer exponents.

    The exponents may be far too large to materialize the powers.
    """
    a, b = Fraction(a), Fraction(b)
    if a <= 0 or b <= 0:
        raise ValueError("cmp_scaled expects positive rationals")
    d = e1 - e2
    la, lb = _log2_floor_approx(a), _log2_floor_approx(b)
    if la + d - 1 >= lb + 1:
        return 1
    if la + d + 1 <= lb - 1:
        return -1
    lhs, rhs = (a * 2**d, b) if d >= 0 else (a, b * 2**-d)
    return (lhs > rhs) - (lhs < rhs)
