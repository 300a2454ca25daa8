"""LZ78 incremental parsing and a faithful binary coder.

The parse scans left to right; each phrase is the longest prefix of the
remaining input that matches a dictionary phrase, extended by one symbol
while input remains. If the input runs out mid-match the final phrase is
the matched dictionary phrase with no extension bit, so the code-length
function is total on all finite strings.

Phrase j (1-based) is emitted as its parent index in ceil(log2 j) bits
followed by one literal bit; a final partial phrase after c complete
phrases is an index in ceil(log2 (c+1)) bits with no literal. `code_len`
is the phrase-stream length alone; `encode` prepends the Elias delta
code of the input length, which makes the full stream self-delimiting.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .codec import encode_nat, decode_nat
from .errors import DecodeError

__all__ = [
    "LZParse",
    "parse",
    "code_len",
    "phrase_stream",
    "encode",
    "decode",
    "code_length_counts",
    "iter_with_code_len",
    "kraft_sum",
]

sys.setrecursionlimit(100_000)


@dataclass(frozen=True)
class LZParse:
    """Parse result: (parent index, extension bit or None) per phrase."""

    phrases: tuple[tuple[int, str | None], ...]
    complete_count: int
    has_partial: bool

    def reconstruct(self) -> str:
        """Concatenate the phrases back into the parsed string."""
        strings = [""]
        out = []
        for parent, bit in self.phrases:
            if bit is None:
                out.append(strings[parent])
            else:
                s = strings[parent] + bit
                strings.append(s)
                out.append(s)
        return "".join(out)


def _check_input(x: str) -> None:
    if not x:
        raise ValueError("input string must be nonempty")
    if x.count("0") + x.count("1") != len(x):
        raise ValueError("input string must consist of '0'/'1' only")


def parse(x: str) -> LZParse:
    """Run the LZ78 parse of a nonempty binary string."""
    _check_input(x)
    trie: dict[int, int] = {}
    node = 0
    nxt = 1
    phrases: list[tuple[int, str | None]] = []
    for b in x.encode():
        key = (node << 1) | (b & 1)
        t = trie.get(key)
        if t is None:
            trie[key] = nxt
            phrases.append((node, chr(b)))
            nxt += 1
            node = 0
        else:
            node = t
    has_partial = node != 0
    if has_partial:
        phrases.append((node, None))
    return LZParse(tuple(phrases), nxt - 1, has_partial)


def code_len(x: str) -> int:
    """Phrase-stream length of the LZ78 code of x, in bits."""
    _check_input(x)
    trie: dict[int, int] = {}
    node = 0
    nxt = 1
    total = 0
    get = trie.get
    for b in x.encode():
        key = (node << 1) | (b & 1)
        t = get(key)
        if t is None:
            trie[key] = nxt
            total += (nxt - 1).bit_length() + 1
            nxt += 1
            node = 0
        else:
            node = t
    if node:
        total += (nxt - 1).bit_length()
    return total


def phrase_stream(x: str) -> str:
    """The raw phrase stream of x (exactly code_len(x) bits, no header)."""
    p = parse(x)
    parts: list[str] = []
    for j, (parent, bit) in enumerate(p.phrases, start=1):
        width = (j - 1).bit_length()
        if width:
            parts.append(format(parent, f"0{width}b"))
        if bit is not None:
            parts.append(bit)
    return "".join(parts)


def encode(x: str) -> str:
    """Self-delimiting code: delta(length) ++ phrase stream."""
    return encode_nat(len(x)) + phrase_stream(x)


def decode_phrases(bits: str, start: int, n: int) -> tuple[str, int]:
    """Decode a phrase stream producing exactly n symbols.

    Returns (string, consumed bits). A phrase whose dictionary string
    exactly fills the remaining length is the final partial phrase and
    carries no literal bit.
    """
    strings = [""]
    out: list[str] = []
    produced = 0
    i = start
    end = len(bits)
    j = 1
    while produced < n:
        width = (j - 1).bit_length()
        if i + width > end:
            raise DecodeError("truncated phrase stream: index field cut short")
        parent = int(bits[i : i + width], 2) if width else 0
        i += width
        if parent >= j:
            raise DecodeError(f"phrase index {parent} out of range for phrase {j}")
        base = strings[parent]
        remaining = n - produced
        if len(base) == remaining:
            out.append(base)
            produced = n
            break
        if len(base) > remaining:
            raise DecodeError("phrase overruns the declared length")
        if i >= end:
            raise DecodeError("truncated phrase stream: missing literal bit")
        s = base + bits[i]
        i += 1
        strings.append(s)
        out.append(s)
        produced += len(s)
        j += 1
    return "".join(out), i - start


def decode(bits: str) -> str:
    """Inverse of encode; rejects malformed or trailing data."""
    n, used = decode_nat(bits)
    x, used2 = decode_phrases(bits, used, n)
    if used + used2 != len(bits):
        raise DecodeError("trailing data after the phrase stream")
    return x


# --- exhaustive enumeration over {0,1}^n ---------------------------------
#
# A depth-first walk over the binary tree of depth n advances the parser
# by one symbol per edge and undoes it on backtrack, so visiting all 2^n
# strings costs about 2^(n+1) parser steps instead of n * 2^n.

_HIST_CACHE: dict[int, dict[int, int]] = {}


def code_length_counts(n: int) -> dict[int, int]:
    """Histogram {code_len: count} over all strings of length n (cached)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cached = _HIST_CACHE.get(n)
    if cached is not None:
        return cached
    hist: dict[int, int] = {}
    trie: dict[int, int] = {}

    def go(depth: int, node: int, nxt: int, total: int) -> None:
        if depth == n:
            t = total + ((nxt - 1).bit_length() if node else 0)
            hist[t] = hist.get(t, 0) + 1
            return
        for bit in (0, 1):
            key = (node << 1) | bit
            t = trie.get(key)
            if t is not None:
                go(depth + 1, t, nxt, total)
            else:
                trie[key] = nxt
                go(depth + 1, 0, nxt + 1, total + (nxt - 1).bit_length() + 1)
                del trie[key]

    go(0, 0, 1, 0)
    _HIST_CACHE[n] = hist
    return hist


def iter_with_code_len(n: int) -> Iterator[tuple[str, int]]:
    """Yield (x, code_len(x)) for every x in {0,1}^n in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    trie: dict[int, int] = {}
    path: list[str] = []

    def go(depth: int, node: int, nxt: int, total: int) -> Iterator[tuple[str, int]]:
        if depth == n:
            yield "".join(path), total + ((nxt - 1).bit_length() if node else 0)
            return
        for bit in (0, 1):
            key = (node << 1) | bit
            path.append("01"[bit])
            t = trie.get(key)
            if t is not None:
                yield from go(depth + 1, t, nxt, total)
            else:
                trie[key] = nxt
                yield from go(depth + 1, 0, nxt + 1, total + (nxt - 1).bit_length() + 1)
                del trie[key]
            path.pop()

    yield from go(0, 0, 1, 0)


def kraft_sum(n: int) -> Fraction:
    """Exact sum of 2^-code_len(x) over all x of length n."""
    return sum(
        (Fraction(count, 1 << length) for length, count in code_length_counts(n).items()),
        Fraction(0),
    )
