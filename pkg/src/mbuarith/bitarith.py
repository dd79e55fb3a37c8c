"""Classical bit-string arithmetic used as the ground-truth oracle.

Bits are stored little-endian: index 0 is the least significant bit.
Textual rendering is MSB-first, matching the usual way numbers are written.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

MAX_WIDTH = 64


class WidthError(ValueError):
    """Raised when operand widths are invalid or do not match."""


_BIT_VALUES = frozenset((0, 1))


@dataclass(frozen=True)
class BitString:
    """Fixed-width little-endian bit vector."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(map(int, self.bits))
        if not 1 <= len(bits) <= MAX_WIDTH:
            raise WidthError(f"width must be in [1, {MAX_WIDTH}], got {len(bits)}")
        if not _BIT_VALUES.issuperset(bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def width(self) -> int:
        return len(self.bits)

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        if not 1 <= width <= MAX_WIDTH:
            raise WidthError(f"width must be in [1, {MAX_WIDTH}], got {width}")
        if not 0 <= value < (1 << width):
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls(tuple((value >> i) & 1 for i in range(width)))

    @classmethod
    def parse(cls, text: str, width: int | None = None) -> "BitString":
        """Parse MSB-first binary (``0b`` prefix optional) or, with ``width``, decimal."""
        s = text.strip().replace("_", "")
        if s.lower().startswith("0b"):
            digits = s[2:]
            if not digits or set(digits) - {"0", "1"}:
                raise ValueError(f"malformed binary literal {text!r}")
            w = width if width is not None else len(digits)
            return cls.from_int(int(digits, 2), w)
        if width is None:
            if not s or set(s) - {"0", "1"}:
                raise ValueError(f"malformed bit string {text!r}")
            return cls(tuple(int(ch) for ch in reversed(s)))
        return cls.from_int(int(s, 10), width)

    def to_int(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def __int__(self) -> int:
        return self.to_int()

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in reversed(self.bits))

    @property
    def msb(self) -> int:
        return self.bits[-1]


@dataclass(frozen=True)
class SignedValue:
    """Two's-complement signed integer of a fixed width."""

    value: int
    width: int

    def __post_init__(self) -> None:
        if not 1 <= self.width <= MAX_WIDTH:
            raise WidthError(f"width must be in [1, {MAX_WIDTH}]")
        lo, hi = -(1 << (self.width - 1)), (1 << (self.width - 1)) - 1
        if not lo <= self.value <= hi:
            raise ValueError(f"{self.value} outside [{lo}, {hi}]")

    def encode(self) -> BitString:
        return BitString.from_int(self.value % (1 << self.width), self.width)

    @classmethod
    def decode(cls, bits: BitString) -> "SignedValue":
        raw = bits.to_int()
        if bits.msb:
            raw -= 1 << bits.width
        return cls(raw, bits.width)


def _check_same(x: BitString, y: BitString) -> int:
    if x.width != y.width:
        raise WidthError(f"width mismatch: {x.width} vs {y.width}")
    return x.width


def maj(a: int, b: int, c: int) -> int:
    """Majority of three bits."""
    return (a & b) ^ (a & c) ^ (b & c)


def carries(x: BitString, y: BitString) -> list[int]:
    """Carry chain c_0..c_n of x + y."""
    n = _check_same(x, y)
    c = [0]
    for i in range(n):
        c.append(maj(x[i], y[i], c[i]))
    return c


def borrows(x: BitString, y: BitString) -> list[int]:
    """Borrow chain b_0..b_n of x - y."""
    n = _check_same(x, y)
    b = [0]
    for i in range(n):
        b.append(maj(1 - x[i], y[i], b[i]))
    return b


def add_bits(x: BitString, y: BitString) -> BitString:
    """(n+1)-bit sum via the carry recurrence."""
    n = _check_same(x, y)
    c = carries(x, y)
    return BitString(tuple(x[i] ^ y[i] ^ c[i] for i in range(n)) + (c[n],))


def ones_complement(x: BitString) -> BitString:
    return BitString(tuple(1 - b for b in x))


def twos_complement(x: BitString) -> BitString:
    """Flip then add one, truncated to the width of ``x``."""
    return BitString.from_int((ones_complement(x).to_int() + 1) % (1 << x.width), x.width)


def sub_bits(x: BitString, y: BitString) -> BitString:
    """(n+1)-bit difference via the borrow recurrence; bit n is the sign bit."""
    n = _check_same(x, y)
    b = borrows(x, y)
    return BitString(tuple(x[i] ^ y[i] ^ b[i] for i in range(n)) + (b[n],))


def extend(x: BitString, width: int) -> BitString:
    """Zero-extend to ``width``."""
    if width < x.width:
        raise WidthError("cannot extend to a smaller width")
    return BitString(x.bits + (0,) * (width - x.width))


def compare_bits(x: BitString, y: BitString) -> int:
    """1 iff unsigned x < y."""
    return sub_bits(x, y).msb


def hamming_weight(x: BitString | int) -> int:
    if isinstance(x, BitString):
        return sum(x.bits)
    if x < 0:
        raise ValueError("hamming weight of a negative integer")
    return bin(x).count("1")


def bits_of(value: int, width: int) -> list[int]:
    """Little-endian bit list of a nonnegative integer."""
    return [(value >> i) & 1 for i in range(width)]


def from_bits(bits: Iterable[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))
