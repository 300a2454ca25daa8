"""Prefix-free codes for naturals and rationals.

Every description length in this package is a sum of the code lengths
defined here. Naturals n >= 1 use the Elias delta code; a rational a/b
in lowest terms is coded as delta(a) followed by delta(b). Bit order
within a codeword is most-significant-bit first. `pack_bits` packs a
bit string big-endian into bytes, zero-padding the final byte; padding
is never decoded because lengths are always carried separately.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import DecodeError

__all__ = [
    "encode_nat",
    "decode_nat",
    "nat_code_len",
    "encode_rational",
    "decode_rational",
    "rational_code_len",
    "pack_bits",
    "unpack_bits",
]


def encode_nat(n: int) -> str:
    """Elias delta codeword of n >= 1 as a '0'/'1' string."""
    if n < 1:
        raise ValueError("encode_nat requires n >= 1 (shift inputs by +1 to code 0)")
    nb = n.bit_length()
    zeros = nb.bit_length() - 1
    return "0" * zeros + format(nb, "b") + format(n, "b")[1:]


def nat_code_len(n: int) -> int:
    """Length in bits of encode_nat(n), without building the codeword."""
    if n < 1:
        raise ValueError("nat_code_len requires n >= 1")
    nb = n.bit_length()
    return (nb - 1) + 2 * (nb.bit_length() - 1) + 1


def decode_nat(bits: str, start: int = 0) -> tuple[int, int]:
    """Decode one Elias delta codeword starting at `start`.

    Returns (value, consumed bits). Trailing bits beyond the codeword are
    ignored, which is what makes the code usable as a prefix in longer
    streams.
    """
    i = start
    end = len(bits)
    zeros = 0
    while i < end and bits[i] == "0":
        zeros += 1
        i += 1
    if i >= end:
        raise DecodeError("truncated delta code: no leading 1 found")
    i += 1  # the delimiter '1'
    if end - i < zeros:
        raise DecodeError("truncated delta code: length field cut short")
    nb = (1 << zeros) | (int(bits[i : i + zeros], 2) if zeros else 0)
    i += zeros
    rem = nb - 1
    if end - i < rem:
        raise DecodeError("truncated delta code: value field cut short")
    n = (1 << rem) | (int(bits[i : i + rem], 2) if rem else 0)
    i += rem
    return n, i - start


def encode_rational(r: Fraction | int) -> str:
    """Code a positive rational in lowest terms as delta(num) ++ delta(den)."""
    r = Fraction(r)
    if r.numerator < 1 or r.denominator < 1:
        raise ValueError("encode_rational requires a positive rational")
    return encode_nat(r.numerator) + encode_nat(r.denominator)


def rational_code_len(r: Fraction | int) -> int:
    r = Fraction(r)
    if r.numerator < 1:
        raise ValueError("rational_code_len requires a positive rational")
    return nat_code_len(r.numerator) + nat_code_len(r.denominator)


def decode_rational(bits: str, start: int = 0) -> tuple[Fraction, int]:
    """Inverse of encode_rational; rejects pairs not in lowest terms."""
    a, used_a = decode_nat(bits, start)
    b, used_b = decode_nat(bits, start + used_a)
    if gcd(a, b) != 1:
        raise DecodeError(f"rational {a}/{b} is not in lowest terms")
    return Fraction(a, b), used_a + used_b


def pack_bits(bits: str) -> bytes:
    """Pack a '0'/'1' string big-endian into bytes, zero-padding the tail."""
    if not bits:
        return b""
    padded = bits + "0" * (-len(bits) % 8)
    return int(padded, 2).to_bytes(len(padded) // 8, "big")


def unpack_bits(data: bytes, nbits: int) -> str:
    """Recover the first `nbits` bits of a big-endian packed byte string."""
    if nbits < 0 or nbits > 8 * len(data):
        raise ValueError("nbits out of range for the given data")
    if not data:
        return ""
    return format(int.from_bytes(data, "big"), f"0{8 * len(data)}b")[:nbits]
