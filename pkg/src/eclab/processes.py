"""Stationary binary process models with exact probabilities and seeded samplers.

Models are Bernoulli(p), a two-state Markov chain started in its
stationary distribution, or a finite mixture of ergodic components.
Parameters are exact rationals, so block probabilities are exact.

Pseudorandomness is the SplitMix64 generator used in counter mode: the
k-th output of a generator with seed s is mix64(s + k*GAMMA). Sample
path i of a run with master seed s uses the per-path seed
mix64(s + (i+1)*GAMMA), so paths are independent of evaluation order
and safe to generate in parallel. A uniform u in [0, 2^64) realizes an
event of probability p via u < floor(p * 2^64).

Markov transitions use the flip rule: given the previous symbol b, the
next symbol is b XOR [u < flip_prob(b)]. For symmetric chains the flip
indicators do not depend on the state, which lets the sampler vectorize
the whole path as a cumulative XOR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

__all__ = [
    "Bernoulli",
    "Markov",
    "Mixture",
    "ProcessModel",
    "mix64",
    "sample",
    "sample_paths",
    "entropy_rate",
    "binary_entropy",
    "stationary_dist",
    "block_prob",
    "components",
    "parse_model_spec",
    "format_model",
]

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_U64_GAMMA = np.uint64(_GAMMA)


def mix64(z: int) -> int:
    """SplitMix64 output finalizer (scalar)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _stream(seed: int, count: int) -> np.ndarray:
    """Outputs 1..count of SplitMix64 with the given seed, as uint64."""
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        return _mix64_np(np.uint64(seed & _MASK64) + idx * _U64_GAMMA)


def _path_seed(seed: int, index: int) -> int:
    return mix64(seed + (index + 1) * _GAMMA)


def _threshold(p: Fraction) -> int:
    """floor(p * 2^64); u < threshold happens with probability ~p."""
    return (p.numerator << 64) // p.denominator


def _as_prob(value, name: str) -> Fraction:
    p = Fraction(value)
    if not 0 <= p <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class Bernoulli:
    """I.i.d. bits with P(1) = p."""

    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", _as_prob(self.p, "p"))


@dataclass(frozen=True)
class Markov:
    """Stationary two-state chain; a01 = P(1|0), a10 = P(0|1).

    Both flip probabilities must be positive so the chain is irreducible
    and the stationary distribution (the initial law) is unique.
    """

    a01: Fraction
    a10: Fraction

    def __post_init__(self):
        a01 = _as_prob(self.a01, "a01")
        a10 = _as_prob(self.a10, "a10")
        if a01 == 0 or a10 == 0:
            raise ValueError("Markov model requires irreducibility: a01 > 0 and a10 > 0")
        object.__setattr__(self, "a01", a01)
        object.__setattr__(self, "a10", a10)

    @property
    def pi1(self) -> Fraction:
        """Stationary probability of state 1."""
        return Fraction(self.a01, self.a01 + self.a10)

    @property
    def is_ergodic(self) -> bool:
        # irreducible by construction; aperiodic unless it is the strict flip-flop
        return not (self.a01 == 1 and self.a10 == 1)


@dataclass(frozen=True)
class Mixture:
    """Finite mixture of ergodic components; weights sum to one.

    Each sample path draws its component once and keeps it, so the
    process is stationary but in general not ergodic.
    """

    parts: tuple[tuple[Fraction, Union[Bernoulli, Markov]], ...]

    def __post_init__(self):
        parts = tuple((Fraction(w), c) for w, c in self.parts)
        if not parts:
            raise ValueError("mixture needs at least one component")
        for w, c in parts:
            if w <= 0:
                raise ValueError("mixture weights must be positive")
            if isinstance(c, Markov) and not c.is_ergodic:
                raise ValueError("mixture components must be ergodic (aperiodic chain)")
            if isinstance(c, Mixture):
                raise ValueError("mixtures may not be nested")
        if sum(w for w, _ in parts) != 1:
            raise ValueError("mixture weights must sum to 1")
        object.__setattr__(self, "parts", parts)


ProcessModel = Union[Bernoulli, Markov, Mixture]


def binary_entropy(p: float) -> float:
    """Shannon entropy in bits of a {p, 1-p} coin."""
    total = 0.0
    for v in (p, 1.0 - p):
        if 0.0 < v < 1.0:
            total -= v * math.log2(v)
    return total


def entropy_rate(model: ProcessModel) -> float:
    """Exact entropy rate in bits per symbol."""
    if isinstance(model, Bernoulli):
        return binary_entropy(float(model.p))
    if isinstance(model, Markov):
        pi1 = float(model.pi1)
        return (1.0 - pi1) * binary_entropy(float(model.a01)) + pi1 * binary_entropy(
            float(model.a10)
        )
    return sum(float(w) * entropy_rate(c) for w, c in model.parts)


def stationary_dist(matrix: Iterable[Iterable]) -> tuple[Fraction, Fraction]:
    """Stationary distribution of a 2x2 transition matrix, exact.

    Raises ValueError for a reducible chain, naming the absorbing state.
    """
    rows = [tuple(Fraction(v) for v in row) for row in matrix]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError("expected a 2x2 matrix")
    for i, row in enumerate(rows):
        if sum(row) != 1:
            raise ValueError(f"row {i} does not sum to 1")
        if any(v < 0 for v in row):
            raise ValueError(f"row {i} has a negative entry")
    a01, a10 = rows[0][1], rows[1][0]
    for state, leave in ((0, a01), (1, a10)):
        if leave == 0:
            raise ValueError(f"chain is reducible: state {state} is absorbing")
    pi1 = Fraction(a01, a01 + a10)
    return (1 - pi1, pi1)


def block_prob(model: ProcessModel, x: str) -> Fraction:
    """Exact probability of the length-n cylinder [x] under the model."""
    if not x:
        raise ValueError("block must be nonempty")
    if x.count("0") + x.count("1") != len(x):
        raise ValueError("block must consist of '0'/'1' only")
    if isinstance(model, Bernoulli):
        ones = x.count("1")
        return model.p**ones * (1 - model.p) ** (len(x) - ones)
    if isinstance(model, Markov):
        pi1 = model.pi1
        prob = pi1 if x[0] == "1" else 1 - pi1
        for prev, cur in zip(x, x[1:]):
            if prev == "0":
                prob *= model.a01 if cur == "1" else 1 - model.a01
            else:
                prob *= 1 - model.a10 if cur == "1" else model.a10
        return prob
    return sum((w * block_prob(c, x) for w, c in model.parts), Fraction(0))


def components(model: ProcessModel) -> list[tuple[Fraction, ProcessModel]]:
    """Ergodic decomposition: weight/component pairs summing to weight 1."""
    if isinstance(model, Mixture):
        return list(model.parts)
    return [(Fraction(1), model)]


def _bits_to_str(arr: np.ndarray) -> str:
    return (arr + np.uint8(48)).tobytes().decode("ascii")


def _sample_ergodic(model: Union[Bernoulli, Markov], path_seed: int, n: int) -> str:
    u = _stream(path_seed, n)
    if isinstance(model, Bernoulli):
        thr = np.uint64(min(_threshold(model.p), _MASK64)) if model.p < 1 else None
        if model.p == 1:
            bits = np.ones(n, dtype=np.uint8)
        elif model.p == 0:
            bits = np.zeros(n, dtype=np.uint8)
        else:
            bits = (u < thr).astype(np.uint8)
        return _bits_to_str(bits)
    init = bool(int(u[0]) < _threshold(model.pi1))
    out = np.empty(n, dtype=np.uint8)
    out[0] = init
    if n == 1:
        return _bits_to_str(out)
    if model.a01 == model.a10:
        flips = u[1:] < np.uint64(_threshold(model.a01))
        np.logical_xor.accumulate(flips, out=flips)
        out[1:] = np.uint8(init) ^ flips.view(np.uint8)
        return _bits_to_str(out)
    t0 = _threshold(model.a01)
    t1 = _threshold(model.a10)
    state = init
    rest = u[1:].tolist()
    for j, uv in enumerate(rest, start=1):
        state ^= uv < (t1 if state else t0)
        out[j] = state
    return _bits_to_str(out)


def _sample_one(model: ProcessModel, path_seed: int, n: int) -> tuple[str, int]:
    """One path plus the index of the ergodic component that produced it."""
    if isinstance(model, Mixture):
        u0 = int(_stream(path_seed, 1)[0])
        cum = Fraction(0)
        idx = len(model.parts) - 1
        for i, (w, _) in enumerate(model.parts):
            cum += w
            if u0 < _threshold(cum):
                idx = i
                break
        child_seed = mix64(path_seed + 2 * _GAMMA)
        return _sample_ergodic(model.parts[idx][1], child_seed, n), idx
    return _sample_ergodic(model, path_seed, n), 0


def sample_paths(
    model: ProcessModel, n: int, seed: int, count: int
) -> list[tuple[str, int]]:
    """`count` independent length-n paths; each is (bits, component index)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    return [_sample_one(model, _path_seed(seed, i), n) for i in range(count)]


def sample(model: ProcessModel, n: int, seed: int) -> str:
    """Deterministic length-n sample path for (model, n, seed)."""
    return sample_paths(model, n, seed, 1)[0][0]


# --- model specification text ---------------------------------------------

def _parse_fraction(text: str, what: str) -> Fraction:
    text = text.strip()
    if "." in text:
        raise ValueError(f"{what}: rationals must be written a/b, not decimals")
    try:
        if "/" in text:
            a, b = text.split("/")
            return Fraction(int(a), int(b))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{what}: cannot parse rational {text!r}") from exc


def _markov_from_rows(text: str) -> Markov:
    """Build a chain from "p00,p01;p10,p11" after validating row sums."""
    rows = [
        [_parse_fraction(v, "rows") for v in row.split(",")] for row in text.split(";")
    ]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError("rows: expected two rows of two entries")
    for i, row in enumerate(rows):
        if sum(row) != 1:
            raise ValueError(f"rows: row {i} does not sum to 1")
    return Markov(rows[0][1], rows[1][0])


def _markov_from_kv(kv: dict[str, str]) -> Markov:
    if "flip" in kv:
        f = _parse_fraction(kv.pop("flip"), "flip")
        return Markov(f, f)
    if "rows" in kv:
        return _markov_from_rows(kv.pop("rows"))
    return Markov(
        _parse_fraction(kv.pop("a01"), "a01"),
        _parse_fraction(kv.pop("a10"), "a10"),
    )


def _parse_compact(spec: str) -> ProcessModel:
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "bernoulli":
        kv = _kv_pairs(rest, "bernoulli")
        return Bernoulli(_parse_fraction(kv.pop("p"), "p"))
    if kind == "markov":
        kv = _kv_pairs(rest, "markov")
        model = _markov_from_kv(kv)
        if kv:
            raise ValueError(f"markov: unknown keys {sorted(kv)}")
        return model
    if kind == "mixture":
        parts = []
        for item in rest.split("+"):
            w_text, _, comp_text = item.partition("*")
            if not comp_text:
                raise ValueError("mixture components must look like w*model")
            comp = _parse_compact(comp_text.strip())
            parts.append((_parse_fraction(w_text, "weight"), comp))
        return Mixture(tuple(parts))
    raise ValueError(f"unknown model kind {kind!r}")


def _kv_pairs(text: str, what: str) -> dict[str, str]:
    kv: dict[str, str] = {}
    if text.strip():
        for item in text.split(","):
            k, sep, v = item.partition("=")
            if not sep:
                raise ValueError(f"{what}: expected key=value, got {item!r}")
            kv[k.strip()] = v.strip()
    return kv


def parse_model_spec(text: str) -> ProcessModel:
    """Parse a model from compact text or a key/value document.

    Compact: "bernoulli:p=1/2", "markov:flip=1/10", "markov:a01=1/5,a10=3/5",
    "mixture:1/2*bernoulli:p=1/10+1/2*bernoulli:p=1/2".

    Document form: one key per line, e.g. "variant=markov" then "flip=1/10";
    mixtures use repeated "component=WEIGHT SPEC" lines.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty model specification")
    if "\n" not in text and not text.startswith("variant"):
        return _parse_compact(text)
    kv: dict[str, str] = {}
    comps: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, sep, v = line.partition("=")
        if not sep:
            raise ValueError(f"model document: expected key=value, got {line!r}")
        k = k.strip()
        if k == "component":
            comps.append(v.strip())
        else:
            kv[k.strip()] = v.strip()
    variant = kv.pop("variant", "").lower()
    if variant == "bernoulli":
        return Bernoulli(_parse_fraction(kv["p"], "p"))
    if variant == "markov":
        return _markov_from_kv(kv)
    if variant == "mixture":
        parts = []
        for comp in comps:
            w_text, _, spec = comp.partition(" ")
            parts.append((_parse_fraction(w_text, "weight"), _parse_compact(spec.strip())))
        return Mixture(tuple(parts))
    raise ValueError(f"model document: unknown variant {variant!r}")


def format_model(model: ProcessModel) -> str:
    """Compact text form, inverse of parse_model_spec for round-trips."""
    if isinstance(model, Bernoulli):
        return f"bernoulli:p={model.p}"
    if isinstance(model, Markov):
        if model.a01 == model.a10:
            return f"markov:flip={model.a01}"
        return f"markov:a01={model.a01},a10={model.a10}"
    return "mixture:" + "+".join(f"{w}*{format_model(c)}" for w, c in model.parts)
