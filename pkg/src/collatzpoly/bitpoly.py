"""Unsigned big integers read as binary polynomials with x = 2.

A value n = sum c_mu 2^mu is stored as little-endian 64-bit limbs.  The
polynomial view (exponents of the set bits, degree, term count) is derived
on demand, so there is never an un-normalised coefficient list around:
carrying *is* the reduction rule 2 x^(t-1) = x^t.
"""

from __future__ import annotations

import re
from functools import total_ordering
from typing import Iterable, Union

WORD_BITS = 64
MASK = (1 << WORD_BITS) - 1

# largest power of ten below 2**64, used for decimal conversion
_DEC_CHUNK = 19
_DEC_BASE = 10**_DEC_CHUNK


class DomainError(ValueError):
    """Input outside the domain of an operation (zero degree, even step, ...)."""


class PolySyntaxError(ValueError):
    """Malformed polynomial or decimal text."""


class DuplicateExponentError(PolySyntaxError):
    pass


def _normalize(limbs) -> tuple:
    if not limbs or limbs[-1]:
        return tuple(limbs)
    limbs = list(limbs)
    while limbs and not limbs[-1]:
        limbs.pop()
    return tuple(limbs)


@total_ordering
class BitPoly:
    """Immutable non-negative integer on 64-bit limbs.

    ``BitPoly(int)`` converts from a Python integer; ``int(v)`` converts
    back.  Equality and hashing agree with the integer value, so BitPoly
    and int keys are interchangeable in dicts and sets.
    """

    __slots__ = ("limbs", "_hash")

    def __init__(self, value: Union[int, "BitPoly"] = 0):
        if isinstance(value, BitPoly):
            limbs = value.limbs
        else:
            value = int(value)
            if value < 0:
                raise DomainError("BitPoly holds non-negative values only")
            if value <= MASK:
                limbs = (value,) if value else ()
                object.__setattr__(self, "limbs", limbs)
                object.__setattr__(self, "_hash", None)
                return
            out = []
            while value:
                out.append(value & MASK)
                value >>= WORD_BITS
            limbs = tuple(out)
        object.__setattr__(self, "limbs", limbs)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def from_limbs(cls, limbs: Iterable[int]) -> "BitPoly":
        self = cls.__new__(cls)
        if not isinstance(limbs, (list, tuple)):
            limbs = list(limbs)
        object.__setattr__(self, "limbs", _normalize(limbs))
        object.__setattr__(self, "_hash", None)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("BitPoly is immutable")

    def __int__(self) -> int:
        acc = 0
        for limb in reversed(self.limbs):
            acc = (acc << WORD_BITS) | limb
        return acc

    __index__ = __int__

    def __bool__(self) -> bool:
        return bool(self.limbs)

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(int(self))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other) -> bool:
        if isinstance(other, BitPoly):
            return self.limbs == other.limbs
        if isinstance(other, int):
            return other >= 0 and self.limbs == BitPoly(other).limbs
        return NotImplemented

    def __lt__(self, other) -> bool:
        if isinstance(other, int):
            if other < 0:
                return False
            other = BitPoly(other)
        if not isinstance(other, BitPoly):
            return NotImplemented
        return _cmp(self.limbs, other.limbs) < 0

    def __repr__(self) -> str:
        return f"BitPoly({to_decimal_string(self)})"

    def __str__(self) -> str:
        return to_decimal_string(self)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return power(self, e)

    def __lshift__(self, k: int):
        return shl(self, k)

    def is_odd(self) -> bool:
        return bool(self.limbs) and bool(self.limbs[0] & 1)


Coercible = Union[int, BitPoly]


def as_bitpoly(v: Coercible) -> BitPoly:
    return v if isinstance(v, BitPoly) else BitPoly(v)


ZERO = BitPoly(0)
ONE = BitPoly(1)


def _cmp(a: tuple, b: tuple) -> int:
    if len(a) != len(b):
        return -1 if len(a) < len(b) else 1
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return -1 if x < y else 1
    return 0


# ---------------------------------------------------------------------------
# polynomial views
# ---------------------------------------------------------------------------

def from_exponents(exps: Iterable[int]) -> BitPoly:
    """Sum of 2**e over a set of exponents; duplicates are rejected."""
    limbs: list = []
    seen = set()
    for e in exps:
        e = int(e)
        if e < 0:
            raise DomainError(f"negative exponent {e}")
        if e in seen:
            raise DuplicateExponentError(f"exponent {e} given twice")
        seen.add(e)
        i, b = divmod(e, WORD_BITS)
        if i >= len(limbs):
            limbs.extend([0] * (i + 1 - len(limbs)))
        limbs[i] |= 1 << b
    return BitPoly.from_limbs(limbs)


def exponents(v: Coercible) -> list:
    """Set-bit exponents in ascending order."""
    out = []
    for i, limb in enumerate(as_bitpoly(v).limbs):
        base = i * WORD_BITS
        while limb:
            low = limb & -limb
            out.append(base + low.bit_length() - 1)
            limb ^= low
    return out


_TERM = re.compile(r"x\^(\d+)|x|1")


def parse_poly(text: str) -> BitPoly:
    """Parse ``x^K + ... + x + 1`` (any term order) into its value.

    ``"0"`` is accepted as the zero value so that formatting round-trips.
    """
    body = text.strip()
    if body == "0":
        return ZERO
    if not body:
        raise PolySyntaxError("empty polynomial")
    exps = []
    for raw in body.split("+"):
        term = raw.strip(" ")
        m = _TERM.fullmatch(term)
        if m is None:
            raise PolySyntaxError(f"bad term {raw!r} in {text!r}")
        if m.group(1) is not None:
            digits = m.group(1)
            if not digits.isascii():
                raise PolySyntaxError(f"bad exponent in {raw!r}")
            e = int(digits)
            if e < 2:
                raise PolySyntaxError(f"exponent in {raw!r} must be >= 2; write 'x' or '1'")
        else:
            e = 1 if term == "x" else 0
        exps.append(e)
    return from_exponents(exps)


def format_poly(v: Coercible) -> str:
    exps = exponents(v)
    if not exps:
        return "0"
    parts = []
    for e in reversed(exps):
        parts.append("1" if e == 0 else "x" if e == 1 else f"x^{e}")
    return "+".join(parts)


def degree(v: Coercible) -> int:
    limbs = as_bitpoly(v).limbs
    if not limbs:
        raise DomainError("degree of zero is undefined")
    return (len(limbs) - 1) * WORD_BITS + limbs[-1].bit_length() - 1


def term_count(v: Coercible) -> int:
    return sum(bin(limb).count("1") for limb in as_bitpoly(v).limbs)


def two_adic_valuation(v: Coercible) -> int:
    limbs = as_bitpoly(v).limbs
    if not limbs:
        raise DomainError("2-adic valuation of zero is undefined")
    for i, limb in enumerate(limbs):
        if limb:
            return i * WORD_BITS + (limb & -limb).bit_length() - 1
    raise AssertionError("unnormalized limbs")


# ---------------------------------------------------------------------------
# carried arithmetic
# ---------------------------------------------------------------------------

def add(a: Coercible, b: Coercible) -> BitPoly:
    x, y = as_bitpoly(a).limbs, as_bitpoly(b).limbs
    if len(x) < len(y):
        x, y = y, x
    out = []
    carry = 0
    for i, xi in enumerate(x):
        t = xi + (y[i] if i < len(y) else 0) + carry
        out.append(t & MASK)
        carry = t >> WORD_BITS
    if carry:
        out.append(carry)
    return BitPoly.from_limbs(out)


def sub(a: Coercible, b: Coercible) -> BitPoly:
    x, y = as_bitpoly(a).limbs, as_bitpoly(b).limbs
    if _cmp(x, y) < 0:
        raise DomainError("subtraction would go negative")
    out = []
    borrow = 0
    for i, xi in enumerate(x):
        t = xi - (y[i] if i < len(y) else 0) - borrow
        borrow = 1 if t < 0 else 0
        out.append(t & MASK)
    return BitPoly.from_limbs(out)


def mul(a: Coercible, b: Coercible) -> BitPoly:
    x, y = as_bitpoly(a).limbs, as_bitpoly(b).limbs
    if not x or not y:
        return ZERO
    if len(x) < len(y):
        x, y = y, x
    out = [0] * (len(x) + len(y))
    for j, yj in enumerate(y):
        if not yj:
            continue
        carry = 0
        k = j
        for xi in x:
            t = xi * yj + out[k] + carry
            out[k] = t & MASK
            carry = t >> WORD_BITS
            k += 1
        out[k] = carry
    return BitPoly.from_limbs(out)


def power(a: Coercible, e: int) -> BitPoly:
    if e < 0:
        raise DomainError("negative exponent")
    base = as_bitpoly(a)
    result = ONE
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def mul_small_add(a: Coercible, m: int, c: int = 0) -> BitPoly:
    """a*m + c for single-word m and c in one carry pass."""
    if not (0 <= m <= MASK and 0 <= c <= MASK):
        raise DomainError("multiplier and addend must fit in one word")
    out = []
    carry = c
    for limb in as_bitpoly(a).limbs:
        t = limb * m + carry
        out.append(t & MASK)
        carry = t >> WORD_BITS
    if carry:
        out.append(carry)
    return BitPoly.from_limbs(out)


def divmod_small(a: Coercible, d: int) -> tuple:
    """(a // d, a % d) for a single-word divisor d."""
    if not 0 < d <= MASK:
        raise DomainError("divisor must be a non-zero single word")
    limbs = as_bitpoly(a).limbs
    out = [0] * len(limbs)
    rem = 0
    for i in range(len(limbs) - 1, -1, -1):
        cur = (rem << WORD_BITS) | limbs[i]
        out[i], rem = divmod(cur, d)
    return BitPoly.from_limbs(out), rem


def shl(a: Coercible, k: int) -> BitPoly:
    if k < 0:
        raise DomainError("negative shift")
    limbs = as_bitpoly(a).limbs
    if not limbs:
        return ZERO
    words, bits = divmod(k, WORD_BITS)
    out = [0] * words
    if bits == 0:
        out.extend(limbs)
    else:
        carry = 0
        for limb in limbs:
            out.append(((limb << bits) & MASK) | carry)
            carry = limb >> (WORD_BITS - bits)
        out.append(carry)
    return BitPoly.from_limbs(out)


def shr_exact(a: Coercible, k: int) -> BitPoly:
    """a / 2**k; raises DomainError when 2**k does not divide a."""
    if k < 0:
        raise DomainError("negative shift")
    a = as_bitpoly(a)
    limbs = a.limbs
    if not limbs or k == 0:
        return a
    if two_adic_valuation(a) < k:
        raise DomainError(f"value is not divisible by 2^{k}")
    return _shift_right(limbs, k)


def _shift_right(limbs: tuple, k: int) -> BitPoly:
    """Drop the low k bits; callers guarantee they are zero."""
    words, bits = divmod(k, WORD_BITS)
    src = limbs[words:]
    if bits == 0:
        return BitPoly.from_limbs(src)
    out = []
    for i, limb in enumerate(src):
        hi = src[i + 1] if i + 1 < len(src) else 0
        out.append((limb >> bits) | ((hi << (WORD_BITS - bits)) & MASK))
    return BitPoly.from_limbs(out)


# ---------------------------------------------------------------------------
# decimal I/O
# ---------------------------------------------------------------------------

_DIGITS = re.compile(r"[0-9]+")


def from_decimal_string(s: str) -> BitPoly:
    if not _DIGITS.fullmatch(s):
        raise PolySyntaxError(f"not a decimal digit string: {s!r}")
    acc = ZERO
    head = len(s) % _DEC_CHUNK or _DEC_CHUNK
    acc = mul_small_add(acc, 10**head, int(s[:head]))
    for i in range(head, len(s), _DEC_CHUNK):
        acc = mul_small_add(acc, _DEC_BASE, int(s[i:i + _DEC_CHUNK]))
    return acc


def to_decimal_string(v: Coercible) -> str:
    v = as_bitpoly(v)
    if not v:
        return "0"
    chunks = []
    while v:
        v, rem = divmod_small(v, _DEC_BASE)
        chunks.append(rem)
    head = str(chunks[-1])
    return head + "".join(f"{c:0{_DEC_CHUNK}d}" for c in reversed(chunks[:-1]))
