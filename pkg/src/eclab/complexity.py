"""Description-length complexity measures over the fixed ensemble family.

`khat` is the two-part-code minimum min_E [D(E) + ceil(-log2 E(x))] over
the finite candidate family F(x): both singleton tags for x, the uniform
distribution on {0,1}^n, uniform-typical ensembles for every grid rate r
with x a member, and all quantized i.i.d./Markov ensembles with m up to
m_max. `ec` minimizes D(E) over the candidates that are delta-typical
for x and whose total information stays within Delta of khat(x);
`coarse_ec` folds the budget into the objective 2 D(E) + H(E) - khat(x).

Exact mode (n <= n_max) evaluates every quantity exactly: code-length
ceilings use integer bit-length identities (the family's probabilities
are dyadic, so ceil(-log2 A/2^s) = s - bitlen(A) + 1) and typical-set
entropies use exhaustive cardinalities. Upper mode replaces the
uniform-typical entropy with the certified surrogate r*n >= log2 |T(r,n)|,
making every returned value a sound upper bound at any length.

Ties among minimizers break on (description length, total information,
lexicographic serialization). The searches walk per-tag candidate lists
presorted in exactly that order and merge the per-tag champions with the
same comparator, so results are deterministic and agree bit for bit with
a direct scan of the whole family.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import ensembles as ens
from . import lz78, typical_sets
from .codec import encode_rational, nat_code_len, rational_code_len
from .errors import ResourceLimitError
from .processes import ProcessModel, binary_entropy, components, entropy_rate, sample_paths

__all__ = [
    "FamilyConfig",
    "Constraint",
    "ComplexityQuery",
    "ComplexityReport",
    "DEFAULT_CONFIG",
    "StringStats",
    "string_stats",
    "khat",
    "khat_value",
    "ec",
    "coarse_ec",
    "max_coarse_scan",
    "ScanResult",
    "theorem1_sweep",
    "SweepRow",
    "sweep_scheme_constant",
    "coarse_scheme_constant",
    "budget_fits",
]

_FLOAT_GUARD = 1e-6  # floats this close to a decision boundary get an exact recheck
_BIG_N_FLOAT = 64  # above this length, grid log-likelihoods are evaluated in floats
_WALK_CHUNK = 512


@dataclass(frozen=True)
class FamilyConfig:
    """Candidate-family configuration, echoed into every report."""

    r_grid: tuple[Fraction, ...] = typical_sets.DEFAULT_R_GRID
    m_max: int = 6
    n_max: int = typical_sets.DEFAULT_N_MAX

    def echo(self) -> dict:
        return {
            "r_grid": ",".join(str(r) for r in self.r_grid),
            "m_max": self.m_max,
            "n_max": self.n_max,
        }


DEFAULT_CONFIG = FamilyConfig()


@dataclass(frozen=True)
class Constraint:
    """Restriction of the minimization domain by tag and parameter ranges."""

    tags: Optional[frozenset[str]] = None
    m_max: Optional[int] = None
    r_min: Optional[Fraction] = None
    r_max: Optional[Fraction] = None

    def allows_tag(self, tag: str) -> bool:
        return self.tags is None or tag in self.tags

    def allows_m(self, m: int) -> bool:
        return self.m_max is None or m <= self.m_max

    def allows_r(self, r: Fraction) -> bool:
        if self.r_min is not None and r < self.r_min:
            return False
        return self.r_max is None or r <= self.r_max

    @staticmethod
    def parse(text: str) -> "Constraint":
        """Parse "tags=a,b;mmax=3;rmin=1/4;rmax=1" (any subset of keys)."""
        tags = None
        m_max = None
        r_min = None
        r_max = None
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            key, sep, value = part.partition("=")
            if not sep:
                raise ValueError(f"constraint: expected key=value, got {part!r}")
            key = key.strip()
            if key == "tags":
                tags = frozenset(t.strip() for t in value.split(",") if t.strip())
                unknown = tags - set(ens.TAG_NAMES.values())
                if unknown:
                    raise ValueError(f"constraint: unknown tags {sorted(unknown)}")
            elif key == "mmax":
                m_max = int(value)
            elif key == "rmin":
                r_min = Fraction(value)
            elif key == "rmax":
                r_max = Fraction(value)
            else:
                raise ValueError(f"constraint: unknown key {key!r}")
        return Constraint(tags, m_max, r_min, r_max)


@dataclass(frozen=True)
class ComplexityQuery:
    """Parameters of one effective-complexity minimization."""

    delta: Fraction = Fraction(0)
    Delta: Optional[Fraction] = None
    eps: Optional[Fraction] = None  # alternative budget rule Delta = eps * n
    mode: str = "exact"
    constraint: Optional[Constraint] = None

    def resolve_Delta(self, n: int) -> Fraction:
        if (self.Delta is None) == (self.eps is None):
            raise ValueError("exactly one of Delta and eps must be given")
        if self.Delta is not None:
            if self.Delta < 0:
                raise ValueError("Delta must be >= 0")
            return Fraction(self.Delta)
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        return Fraction(self.eps) * n


@dataclass
class ComplexityReport:
    """Per-string results plus the configuration that produced them."""

    n: int
    lz_len: int
    khat: int
    ec: Optional[int] = None
    ec_empty: bool = False
    ec_is_upper_bound: bool = False
    coarse_ec: Optional[float] = None
    witness: Optional[ens.Ensemble] = None
    delta_text: str = ""
    Delta_text: str = ""
    mode: str = "exact"
    config: dict = field(default_factory=dict)


# --- string statistics ------------------------------------------------------

@dataclass(frozen=True)
class StringStats:
    """Sufficient statistics of x for every quantized tag, plus its LZ length."""

    n: int
    first: int
    ones: int
    n00: int
    n01: int
    n10: int
    n11: int
    lz_len: int

    @property
    def key(self) -> tuple:
        return (self.n, self.first, self.ones, self.n00, self.n01, self.n10, self.n11, self.lz_len)


def string_stats(x: str, lz_len: Optional[int] = None) -> StringStats:
    n = len(x)
    if n < 1:
        raise ValueError("x must be nonempty")
    v = int(x, 2)
    ones = v.bit_count()
    if n > 1:
        mask = (1 << (n - 1)) - 1
        n11 = ((v >> 1) & v & mask).bit_count()
        n01 = (~(v >> 1) & v & mask).bit_count()
        n10 = ((v >> 1) & ~v & mask).bit_count()
        n00 = (n - 1) - n01 - n10 - n11
    else:
        n00 = n01 = n10 = n11 = 0
    if lz_len is None:
        lz_len = lz78.code_len(x)
    return StringStats(n, (v >> (n - 1)) & 1, ones, n00, n01, n10, n11, lz_len)


# --- scheme constants -------------------------------------------------------

def sweep_scheme_constant(cfg: FamilyConfig = DEFAULT_CONFIG) -> int:
    """Constant C with D(uniform-typical(r, n)) <= log2 n + 2 log2 log2 n + C.

    The description is 3 tag bits + delta(n) + the rational code of a
    grid rate; delta(n) exceeds log2 n + 2 log2 log2 n by less than 3
    bits for every n >= 2, so C = 3 + 3 + max_grid |code(r)|.
    """
    return 6 + max(rational_code_len(r) for r in cfg.r_grid)


def coarse_scheme_constant(scan_n_max: int = 16) -> int:
    """Constant c with max_x coarse_ec(x) <= n/2 + log2 n + c for n <= scan_n_max.

    Every khat is at least 3 + |delta(n)| (each description starts with
    the tag and delta(n)), and 3 + |delta(n)| >= n/2 holds up to n = 24,
    so the always-typical uniform-all candidate gives
    coarse_ec <= 2(3 + |delta(n)|) + n - khat <= n/2 + (2(3 + |delta(n)|) - log2 n).
    """
    best = 0
    for n in range(1, scan_n_max + 1):
        base = 3 + nat_code_len(n)
        assert 2 * base >= n, "derivation requires 3 + |delta(n)| >= n/2"
        bound = 2 * base - math.log2(n) if n > 1 else 2 * base
        best = max(best, math.ceil(bound))
    return best


# --- quantized-grid tables --------------------------------------------------

class _MarkovGrid:
    """Flat arrays over all (m, a0, a1, ai) combinations, m <= m_max.

    Per-parameter log and entropy tables come from scalar math calls and
    are gathered into arrays, so table-based likelihoods are bit-identical
    to the scalar ones in ensembles.neg_log2_prob and ensembles.entropy.
    """

    def __init__(self, m_max: int):
        ms, a0s, a1s, ais = [], [], [], []
        for m in range(1, m_max + 1):
            k = (1 << m) - 1
            vals = np.arange(1, k + 1, dtype=np.int64)
            ms.append(np.full(k * k * k, m, dtype=np.int64))
            a0s.append(np.repeat(vals, k * k))
            a1s.append(np.tile(np.repeat(vals, k), k))
            ais.append(np.tile(vals, k * k))
        self.m = np.concatenate(ms)
        self.a0 = np.concatenate(a0s)
        self.a1 = np.concatenate(a1s)
        self.ai = np.concatenate(ais)
        self.size = len(self.m)
        self.descbase = np.array(
            [nat_code_len(m) + 3 * m for m in self.m.tolist()], dtype=np.int64
        )
        log1 = {}  # (m, a) -> m - log2(a)      = -log2(a / 2^m)
        log0 = {}  # (m, a) -> m - log2(2^m - a) = -log2(1 - a / 2^m)
        hof = {}  # (m, a) -> binary entropy of a / 2^m
        for m in range(1, m_max + 1):
            for a in range(1, 1 << m):
                log1[(m, a)] = m - math.log2(a)
                log0[(m, a)] = m - math.log2((1 << m) - a)
                hof[(m, a)] = binary_entropy(a / (1 << m))
        pairs0 = list(zip(self.m.tolist(), self.a0.tolist()))
        pairs1 = list(zip(self.m.tolist(), self.a1.tolist()))
        pairsi = list(zip(self.m.tolist(), self.ai.tolist()))
        self.c01 = np.array([log1[p] for p in pairs0])
        self.c00 = np.array([log0[p] for p in pairs0])
        self.c10 = np.array([log1[p] for p in pairs1])
        self.c11 = np.array([log0[p] for p in pairs1])
        self.li1 = np.array([log1[p] for p in pairsi])
        self.li0 = np.array([log0[p] for p in pairsi])
        self.h0 = np.array([hof[p] for p in pairs0])
        self.h1 = np.array([hof[p] for p in pairs1])
        self.hinit = np.array([hof[p] for p in pairsi])
        self.q0 = np.array([a / (1 << m) for m, a in pairs0])
        self.q1 = np.array([a / (1 << m) for m, a in pairs1])
        self.pinit = np.array([a / (1 << m) for m, a in pairsi])
        self.m_slices: dict[int, slice] = {}
        start = 0
        for m in range(1, m_max + 1):
            k = ((1 << m) - 1) ** 3
            self.m_slices[m] = slice(start, start + k)
            start += k

    def entropies(self, n: int) -> np.ndarray:
        """H over the grid by the same forward recursion as ensembles.entropy."""
        p1 = self.pinit.copy()
        total = self.hinit.copy()
        for _ in range(n - 1):
            p0 = 1.0 - p1
            total = total + (p0 * self.h0 + p1 * self.h1)
            p1 = p0 * self.q0 + p1 * (1.0 - self.q1)
        return total

    def entropies_closed(self, n: int) -> np.ndarray:
        """Closed form of the same chain-rule sum, for large-n prefiltering."""
        q0, q1 = self.q0, self.q1
        pi1 = q0 / (q0 + q1)
        lam = 1.0 - q0 - q1
        d1 = self.pinit - pi1
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = np.where(lam == 1.0, float(n - 1), (1.0 - lam ** (n - 1)) / (1.0 - lam))
        sum_p1 = (n - 1) * pi1 + d1 * geo
        return self.hinit + self.h0 * ((n - 1) - sum_p1) + self.h1 * sum_p1


class _IIDEntry:
    __slots__ = ("m", "a", "descbase", "c1", "c0", "h")

    def __init__(self, m: int, a: int):
        self.m = m
        self.a = a
        self.descbase = nat_code_len(m) + m
        self.c1 = m - math.log2(a)
        self.c0 = m - math.log2((1 << m) - a)
        self.h = binary_entropy(a / (1 << m))


_MARKOV_GRIDS: dict[int, _MarkovGrid] = {}
_IID_GRIDS: dict[int, list[_IIDEntry]] = {}
_MARKOV_PER_N: dict[tuple[int, int], dict] = {}
_IID_PER_N: dict[tuple[int, int], dict] = {}
_UT_PER_N: dict[tuple, dict] = {}


def _markov_grid(m_max: int) -> _MarkovGrid:
    grid = _MARKOV_GRIDS.get(m_max)
    if grid is None:
        grid = _MARKOV_GRIDS[m_max] = _MarkovGrid(m_max)
    return grid


def _iid_grid(m_max: int) -> list[_IIDEntry]:
    grid = _IID_GRIDS.get(m_max)
    if grid is None:
        grid = _IID_GRIDS[m_max] = [
            _IIDEntry(m, a) for m in range(1, m_max + 1) for a in range(1, 1 << m)
        ]
    return grid


def _markov_tables(m_max: int, n: int) -> dict:
    """Per-length Markov arrays: entropies plus canonical walk orders.

    The sort keys replicate the tie-break comparator: description length,
    then total information desc + H, then parameter order (equal desc
    forces equal m within the tag, where serialization order is just the
    numeric order of (a0, a1, ai))."""
    key = (m_max, n)
    cached = _MARKOV_PER_N.get(key)
    if cached is not None:
        return cached
    grid = _markov_grid(m_max)
    H = grid.entropies(n)
    base = 3 + nat_code_len(n)
    desc = base + grid.descbase
    sig = H + desc  # same expression as ensembles.total_info: entropy + desc_len
    obj = 2 * desc + H
    ec_order = np.lexsort((grid.ai, grid.a1, grid.a0, sig, desc))
    coarse_order = np.lexsort((grid.ai, grid.a1, grid.a0, sig, desc, obj))
    tables = {
        "H": H,
        "desc": desc,
        "sig": sig,
        "obj": obj,
        "ec_order": ec_order,
        "coarse_order": coarse_order,
    }
    _MARKOV_PER_N[key] = tables
    return tables


def _iid_tables(m_max: int, n: int) -> dict:
    """Per-length i.i.d. candidate lists in canonical ec and coarse orders."""
    key = (m_max, n)
    cached = _IID_PER_N.get(key)
    if cached is not None:
        return cached
    base = 3 + nat_code_len(n)
    rows = []
    for e in _iid_grid(m_max):
        desc = base + e.descbase
        H = n * e.h
        sig = H + desc
        rows.append((desc, H, sig, 2 * desc + H, e))
    ec_rows = sorted(rows, key=lambda t: (t[0], t[2], t[4].a))
    coarse_rows = sorted(rows, key=lambda t: (t[3], t[0], t[2], t[4].a))
    tables = {"ec": ec_rows, "coarse": coarse_rows}
    _IID_PER_N[key] = tables
    return tables


def _ut_tables(cfg: FamilyConfig, n: int, exact: bool) -> dict:
    """Uniform-typical candidates with canonical orders.

    Entries are (desc, H_or_surrogate, sig, obj, r, member threshold,
    serialization payload); exact entries exist only for nonempty sets.
    """
    key = (cfg.r_grid, cfg.n_max, n, exact)
    cached = _UT_PER_N.get(key)
    if cached is not None:
        return cached
    base = 3 + nat_code_len(n)
    rows = []
    for r in cfg.r_grid:
        desc = base + rational_code_len(r)
        thresh = r.numerator * n
        payload = encode_rational(r)
        if exact:
            card = typical_sets.cardinality(typical_sets.TypicalSetSpec(r, n), cfg.n_max)
            if card == 0:
                continue
            H = math.log2(card)
            rows.append((desc, H, H + desc, 2 * desc + H, r, thresh, payload))
        else:
            rn = Fraction(thresh, r.denominator)
            rows.append((desc, rn, desc + rn, 2 * desc + rn, r, thresh, payload))
    tables = {
        "ec": sorted(rows, key=lambda t: (t[0], t[2], t[6])),
        "coarse": sorted(rows, key=lambda t: (t[3], t[0], t[2], t[6])),
    }
    _UT_PER_N[key] = tables
    return tables


# --- exact two-part code lengths -------------------------------------------

_POW_CACHE: dict[tuple[int, int], int] = {}


def _ipow(base: int, exp: int) -> int:
    key = (base, exp)
    v = _POW_CACHE.get(key)
    if v is None:
        v = _POW_CACHE[key] = base**exp
        if len(_POW_CACHE) > 300_000:
            _POW_CACHE.clear()
    return v


def _best_factor_exact(m: int, e1: int, e0: int) -> int:
    """max over 0 < a < 2^m of a^e1 * (2^m - a)^e0 (exact integer)."""
    top = 1 << m
    best = 0
    for a in range(1, top):
        v = _ipow(a, e1) * _ipow(top - a, e0)
        if v > best:
            best = v
    return best


def _best_factor_log(m: int, e1: int, e0: int) -> tuple[int, float]:
    """(argmax a, max) of e1*log2(a) + e0*log2(2^m - a)."""
    top = 1 << m
    best_a = 1
    best_v = e0 * math.log2(top - 1)
    for a in range(2, top):
        v = e1 * math.log2(a) + e0 * math.log2(top - a)
        if v > best_v:
            best_v = v
            best_a = a
    return best_a, best_v


def _floor_log2_guarded(lg: float, exact_value: Callable[[], int]) -> int:
    """floor of a log2 evaluated in floats, with an exact integer fallback."""
    f = math.floor(lg)
    if min(lg - f, f + 1 - lg) < _FLOAT_GUARD:
        return exact_value().bit_length() - 1
    return f


def _resolve_mode(mode: str, n: int, cfg: FamilyConfig) -> str:
    if mode == "auto":
        return "exact" if n <= cfg.n_max else "upper"
    if mode not in ("exact", "upper"):
        raise ValueError(f"mode must be exact|upper|auto, got {mode!r}")
    if mode == "exact" and n > cfg.n_max:
        raise ResourceLimitError(f"exact mode requires n <= {cfg.n_max}, got {n}")
    return mode


def khat_value(stats: StringStats, cfg: FamilyConfig = DEFAULT_CONFIG, mode: str = "auto") -> int:
    """The two-part-code minimum from sufficient statistics alone (no witness)."""
    n = stats.n
    mode = _resolve_mode(mode, n, cfg)
    base = 3 + nat_code_len(n)
    best = base + n  # uniform-all and singleton-raw both reach this value
    cand = base + stats.lz_len  # singleton-lz
    if cand < best:
        best = cand
    # the exact log-cardinality term is used whenever it is computable; the
    # ceil(r n) surrogate enters only beyond the enumeration bound, so both
    # modes see the same khat for any n the exact mode can handle
    exact = n <= cfg.n_max
    for desc, H, _sig, _obj, r, thresh, _payload in _ut_tables(cfg, n, exact)["ec"]:
        if stats.lz_len * r.denominator < thresh:
            if exact:
                card = typical_sets.cardinality(typical_sets.TypicalSetSpec(r, n), cfg.n_max)
                term = (card - 1).bit_length()
            else:
                term = -((-thresh) // r.denominator)  # ceil(r n)
            v = desc + term
            if v < best:
                best = v
    ones, zeros = stats.ones, n - stats.ones
    exact_ints = n <= _BIG_N_FLOAT
    for m in range(1, cfg.m_max + 1):
        desc_iid = base + nat_code_len(m) + m
        if desc_iid < best:
            if exact_ints:
                bl = _best_factor_exact(m, ones, zeros).bit_length() - 1
            else:
                a_star, lg = _best_factor_log(m, ones, zeros)
                bl = _floor_log2_guarded(
                    lg, lambda a=a_star, mm=m: _ipow(a, ones) * _ipow((1 << mm) - a, zeros)
                )
            cand = desc_iid + m * n - bl
            if cand < best:
                best = cand
        desc_mk = base + nat_code_len(m) + 3 * m
        if desc_mk < best:
            top = 1 << m
            if exact_ints:
                v = (
                    (top - 1)
                    * _best_factor_exact(m, stats.n01, stats.n00)
                    * _best_factor_exact(m, stats.n10, stats.n11)
                )
                bl = v.bit_length() - 1
            else:
                a0s, lg0 = _best_factor_log(m, stats.n01, stats.n00)
                a1s, lg1 = _best_factor_log(m, stats.n10, stats.n11)
                lg = math.log2(top - 1) + lg0 + lg1

                def exact_num(a0=a0s, a1=a1s, mm=m):
                    t = 1 << mm
                    return (
                        (t - 1)
                        * _ipow(a0, stats.n01)
                        * _ipow(t - a0, stats.n00)
                        * _ipow(a1, stats.n10)
                        * _ipow(t - a1, stats.n11)
                    )

                bl = _floor_log2_guarded(lg, exact_num)
            cand = desc_mk + m * n - bl
            if cand < best:
                best = cand
    return best


def khat(
    x: str, cfg: FamilyConfig = DEFAULT_CONFIG, mode: str = "auto"
) -> tuple[int, ens.Ensemble]:
    """Two-part-code minimum together with its canonical witness ensemble."""
    stats = string_stats(x)
    n = stats.n
    mode = _resolve_mode(mode, n, cfg)
    base = 3 + nat_code_len(n)
    finalists: list[tuple[int, int, float, ens.Ensemble]] = [
        (base + n, base, float(n) + base, ens.UniformAll(n)),
        (base + n, base + n, 0.0 + (base + n), ens.SingletonRaw(x)),
        (base + stats.lz_len, base + stats.lz_len, 0.0 + (base + stats.lz_len), ens.SingletonLZ(x)),
    ]
    exact = n <= cfg.n_max  # same convention as khat_value
    for desc, H, sig, _obj, r, thresh, _payload in _ut_tables(cfg, n, exact)["ec"]:
        if stats.lz_len * r.denominator < thresh:
            if exact:
                card = typical_sets.cardinality(typical_sets.TypicalSetSpec(r, n), cfg.n_max)
                term = (card - 1).bit_length()
            else:
                term = -((-thresh) // r.denominator)
            finalists.append((desc + term, desc, sig, ens.UniformTypical(r, n)))
    ones, zeros = stats.ones, n - stats.ones
    exact_ints = n <= _BIG_N_FLOAT
    for desc, H, sig, _obj, e in _iid_tables(cfg.m_max, n)["ec"]:
        if exact_ints:
            bl = (_ipow(e.a, ones) * _ipow((1 << e.m) - e.a, zeros)).bit_length() - 1
        else:
            lg = ones * math.log2(e.a) + zeros * math.log2((1 << e.m) - e.a)
            bl = _floor_log2_guarded(
                lg, lambda aa=e.a, mm=e.m: _ipow(aa, ones) * _ipow((1 << mm) - aa, zeros)
            )
        finalists.append((desc + e.m * n - bl, desc, sig, ens.IIDQuantized(n, e.m, e.a)))
    best_cut = min(f[0] for f in finalists)
    mk = _khat_markov_champion(stats, cfg, best_cut)
    if mk is not None:
        finalists.append(mk)
    return _pick_canonical_khat(finalists)


def _khat_markov_champion(
    stats: StringStats, cfg: FamilyConfig, best_cut: int
) -> Optional[tuple[int, int, float, ens.Ensemble]]:
    """Canonical best Markov candidate, or None when it cannot reach best_cut."""
    n = stats.n
    grid = _markov_grid(cfg.m_max)
    base = 3 + nat_code_len(n)
    small = n <= _BIG_N_FLOAT
    H = _markov_tables(cfg.m_max, n)["H"] if small else None
    best: Optional[tuple[int, int, float, tuple[int, int, int, int]]] = None
    for m in range(1, cfg.m_max + 1):
        desc = base + nat_code_len(m) + 3 * m
        sl = grid.m_slices[m]
        li = grid.li1[sl] if stats.first else grid.li0[sl]
        v = (
            li
            + stats.n00 * grid.c00[sl]
            + stats.n01 * grid.c01[sl]
            + stats.n10 * grid.c10[sl]
            + stats.n11 * grid.c11[sl]
        )
        lg = m * n - v  # log2 of the integer numerator, per combo of this m
        lgmax = float(lg.max())
        cand_value = desc + m * n - math.floor(lgmax) - 1
        if cand_value - 1 > best_cut and (best is None or cand_value - 1 > best[0]):
            continue
        # equal two-part values mean equal numerator bit lengths, so at small n
        # the tie band is the whole top unit interval (minus one for float safety)
        band = (math.floor(lgmax) - 1 - _FLOAT_GUARD) if small else (lgmax - 1e-9)
        near = np.flatnonzero(lg >= band)
        best_bl = -1
        tied: list[int] = []
        top = 1 << m
        for idx in near.tolist():
            j = sl.start + idx
            num = (
                (int(grid.ai[j]) if stats.first else top - int(grid.ai[j]))
                * _ipow(int(grid.a0[j]), stats.n01)
                * _ipow(top - int(grid.a0[j]), stats.n00)
                * _ipow(int(grid.a1[j]), stats.n10)
                * _ipow(top - int(grid.a1[j]), stats.n11)
            )
            bl = num.bit_length()
            if bl > best_bl:
                best_bl = bl
                tied = [j]
            elif bl == best_bl:
                tied.append(j)
        value = desc + m * n - best_bl + 1
        if H is not None:
            # compare by total information H + desc (not bare H): adding desc
            # in floats can merge neighboring H values, and serialization
            # order must break exactly those ties
            tied.sort(
                key=lambda j: (
                    float(H[j]) + desc,
                    int(grid.a0[j]),
                    int(grid.a1[j]),
                    int(grid.ai[j]),
                )
            )
        else:
            tied.sort(key=lambda j: (int(grid.a0[j]), int(grid.a1[j]), int(grid.ai[j])))
        j = tied[0]
        params = (m, int(grid.a0[j]), int(grid.a1[j]), int(grid.ai[j]))
        if H is not None:
            sigma = float(H[j]) + desc
        else:
            sigma = ens.entropy(ens.MarkovQuantized(n, *params)) + desc
        cand = (value, desc, sigma, params)
        if best is None or (cand[0], cand[1], cand[2], cand[3][1:]) < (
            best[0],
            best[1],
            best[2],
            best[3][1:],
        ):
            best = cand
    if best is None:
        return None
    value, desc, sigma, params = best
    return value, desc, sigma, ens.MarkovQuantized(n, *params)


def _pick_canonical_khat(
    finalists: list[tuple[int, int, float, ens.Ensemble]]
) -> tuple[int, ens.Ensemble]:
    best = None
    best_serial = None
    for value, desc, sigma, e in finalists:
        if best is None:
            best = (value, desc, sigma, e)
            continue
        key_new = (value, desc, sigma)
        key_old = (best[0], best[1], best[2])
        if key_new < key_old:
            best = (value, desc, sigma, e)
            best_serial = None
        elif key_new == key_old:
            if best_serial is None:
                best_serial = ens.serialize(best[3])
            s = ens.serialize(e)
            if s < best_serial:
                best = (value, desc, sigma, e)
                best_serial = s
    return best[0], best[3]


# --- feasibility predicates ---------------------------------------------------

def budget_fits(sigma, T: Fraction) -> bool:
    """Total-information budget test Sigma(E) <= khat + Delta.

    Exact when sigma is an int or Fraction; double precision otherwise.
    """
    if isinstance(sigma, float):
        return sigma <= float(T)
    return sigma <= T


def _typical_fast(neglogp: float, H: float, delta_f: float) -> bool:
    return neglogp <= H * (1.0 + delta_f) + ens.TYPICALITY_SLACK


# --- candidate walks -----------------------------------------------------------

class _Candidate:
    __slots__ = ("objective", "desc", "sigma", "ensemble")

    def __init__(self, objective, desc, sigma, ensemble):
        self.objective = objective
        self.desc = desc
        self.sigma = sigma
        self.ensemble = ensemble


def _pick_canonical(cands: list[Optional[_Candidate]]) -> Optional[_Candidate]:
    """Minimum by (objective, desc, sigma, serialization)."""
    best = None
    best_serial = None
    for c in cands:
        if c is None:
            continue
        if best is None:
            best = c
            continue
        key_new = (c.objective, c.desc, c.sigma)
        key_old = (best.objective, best.desc, best.sigma)
        if key_new < key_old:
            best, best_serial = c, None
        elif key_new == key_old:
            if best_serial is None:
                best_serial = ens.serialize(best.ensemble)
            s = ens.serialize(c.ensemble)
            if s < best_serial:
                best, best_serial = c, s
    return best


def _ec_candidates(
    x: str,
    stats: StringStats,
    delta_f: float,
    T: Fraction,
    mode: str,
    constraint: Optional[Constraint],
    cfg: FamilyConfig,
) -> list[Optional[_Candidate]]:
    """Per-tag first-feasible candidates for the budgeted minimization."""
    n = stats.n
    base = 3 + nat_code_len(n)
    allow = constraint.allows_tag if constraint else (lambda _t: True)
    out: list[Optional[_Candidate]] = []

    if allow("uniform-all") and budget_fits(base + n, T):
        out.append(_Candidate(base, base, float(n) + base, ens.UniformAll(n)))
    if allow("singleton-raw") and budget_fits(base + n, T):
        out.append(_Candidate(base + n, base + n, 0.0 + (base + n), ens.SingletonRaw(x)))
    d_sl = base + stats.lz_len
    if allow("singleton-lz") and budget_fits(d_sl, T):
        out.append(_Candidate(d_sl, d_sl, 0.0 + d_sl, ens.SingletonLZ(x)))

    if allow("uniform-typ"):
        for desc, H, sig, _obj, r, thresh, _payload in _ut_tables(cfg, n, mode == "exact")["ec"]:
            if desc > T:
                break
            if constraint and not constraint.allows_r(r):
                continue
            if stats.lz_len * r.denominator >= thresh:
                continue
            if budget_fits(sig, T):
                out.append(_Candidate(desc, desc, sig, ens.UniformTypical(r, n)))
                break

    ones, zeros = stats.ones, n - stats.ones
    if allow("iid"):
        for desc, H, sig, _obj, e in _iid_tables(cfg.m_max, n)["ec"]:
            if desc > T:
                break
            if constraint and not constraint.allows_m(e.m):
                continue
            if not budget_fits(sig, T):
                continue
            neglogp = ones * e.c1 + zeros * e.c0
            if _typical_fast(neglogp, H, delta_f):
                out.append(_Candidate(desc, desc, sig, ens.IIDQuantized(n, e.m, e.a)))
                break

    if allow("markov-q"):
        out.append(
            _walk_markov_ec(stats, delta_f, T, constraint, cfg)
            if n <= cfg.n_max
            else _walk_markov_ec_big(stats, delta_f, T, constraint, cfg)
        )
    return out


def _walk_markov_ec(
    stats: StringStats,
    delta_f: float,
    T: Fraction,
    constraint: Optional[Constraint],
    cfg: FamilyConfig,
) -> Optional[_Candidate]:
    n = stats.n
    grid = _markov_grid(cfg.m_max)
    tables = _markov_tables(cfg.m_max, n)
    H, desc_arr, sig_arr, order = tables["H"], tables["desc"], tables["sig"], tables["ec_order"]
    li = grid.li1 if stats.first else grid.li0
    n00, n01, n10, n11 = stats.n00, stats.n01, stats.n10, stats.n11
    c00, c01, c10, c11 = grid.c00, grid.c01, grid.c10, grid.c11
    T_f = float(T)
    for start in range(0, grid.size, _WALK_CHUNK):
        chunk = order[start : start + _WALK_CHUNK].tolist()
        for j in chunk:
            desc = int(desc_arr[j])
            if desc > T:
                return None
            if constraint and not constraint.allows_m(int(grid.m[j])):
                continue
            sigma = float(sig_arr[j])
            if sigma > T_f:
                continue
            neglogp = li[j] + n00 * c00[j] + n01 * c01[j] + n10 * c10[j] + n11 * c11[j]
            if _typical_fast(neglogp, float(H[j]), delta_f):
                e = ens.MarkovQuantized(
                    n, int(grid.m[j]), int(grid.a0[j]), int(grid.a1[j]), int(grid.ai[j])
                )
                return _Candidate(desc, desc, sigma, e)
    return None


def _walk_markov_ec_big(
    stats: StringStats,
    delta_f: float,
    T: Fraction,
    constraint: Optional[Constraint],
    cfg: FamilyConfig,
) -> Optional[_Candidate]:
    """Desc-ordered Markov feasibility for n beyond the exact bound.

    Entropies come from the closed form of the chain-rule sum; entries
    near a feasibility boundary are confirmed with the defining forward
    recursion before being accepted.
    """
    n = stats.n
    grid = _markov_grid(cfg.m_max)
    base = 3 + nat_code_len(n)
    margin = 1e-6 + 1e-12 * n
    T_f = float(T)
    Hcf_all = grid.entropies_closed(n)
    for m in range(1, cfg.m_max + 1):
        if constraint and not constraint.allows_m(m):
            continue
        desc = base + nat_code_len(m) + 3 * m
        if desc > T:
            break
        sl = grid.m_slices[m]
        Hcf = Hcf_all[sl]
        li = (grid.li1 if stats.first else grid.li0)[sl]
        v = (
            li
            + stats.n00 * grid.c00[sl]
            + stats.n01 * grid.c01[sl]
            + stats.n10 * grid.c10[sl]
            + stats.n11 * grid.c11[sl]
        )
        fits = (desc + Hcf) <= T_f + margin
        typ = v <= Hcf * (1.0 + delta_f) + ens.TYPICALITY_SLACK + margin
        idxs = np.flatnonzero(fits & typ)
        if idxs.size == 0:
            continue
        sub = sorted(
            idxs.tolist(),
            key=lambda i: (
                Hcf[i],
                int(grid.a0[sl.start + i]),
                int(grid.a1[sl.start + i]),
                int(grid.ai[sl.start + i]),
            ),
        )
        # every returned candidate is confirmed with the defining recursion;
        # the cap only bounds how many boundary stragglers get retried
        for i in sub[:256]:
            j = sl.start + i
            e = ens.MarkovQuantized(n, m, int(grid.a0[j]), int(grid.a1[j]), int(grid.ai[j]))
            Hj = ens.entropy(e)
            sigma = Hj + desc
            if sigma <= T_f and _typical_fast(float(v[i]), Hj, delta_f):
                return _Candidate(desc, desc, sigma, e)
    return None


def ec(
    x: str,
    query: ComplexityQuery,
    cfg: FamilyConfig = DEFAULT_CONFIG,
) -> ComplexityReport:
    """Budgeted effective complexity of x under the family scheme."""
    stats = string_stats(x)
    n = stats.n
    mode = _resolve_mode(query.mode, n, cfg)
    delta_f = float(query.delta)
    if delta_f < 0:
        raise ValueError("delta must be >= 0")
    Delta = query.resolve_Delta(n)
    khv = khat_value(stats, cfg, mode)
    T = khv + Delta
    cands = _ec_candidates(x, stats, delta_f, T, mode, query.constraint, cfg)
    best = _pick_canonical(cands)
    report = ComplexityReport(
        n=n,
        lz_len=stats.lz_len,
        khat=khv,
        mode=mode,
        ec_is_upper_bound=(mode == "upper"),
        delta_text=str(Fraction(query.delta)),
        Delta_text=str(Delta),
        config=cfg.echo(),
    )
    if best is None:
        report.ec_empty = True
    else:
        report.ec = best.objective
        report.witness = best.ensemble
    return report


# --- coarse effective complexity -----------------------------------------------

def _coarse_candidates(
    x: str,
    stats: StringStats,
    delta_f: float,
    mode: str,
    constraint: Optional[Constraint],
    cfg: FamilyConfig,
) -> list[Optional[_Candidate]]:
    """Per-tag first-typical candidates for the objective 2 D(E) + H(E)."""
    n = stats.n
    base = 3 + nat_code_len(n)
    allow = constraint.allows_tag if constraint else (lambda _t: True)
    out: list[Optional[_Candidate]] = []
    if allow("uniform-all"):
        out.append(_Candidate(2 * base + float(n), base, float(n) + base, ens.UniformAll(n)))
    if allow("singleton-raw"):
        d = base + n
        out.append(_Candidate(2 * d + 0.0, d, 0.0 + d, ens.SingletonRaw(x)))
    if allow("singleton-lz"):
        d = base + stats.lz_len
        out.append(_Candidate(2 * d + 0.0, d, 0.0 + d, ens.SingletonLZ(x)))
    if allow("uniform-typ"):
        for desc, H, sig, obj, r, thresh, _payload in _ut_tables(cfg, n, mode == "exact")["coarse"]:
            if constraint and not constraint.allows_r(r):
                continue
            if stats.lz_len * r.denominator >= thresh:
                continue
            out.append(_Candidate(obj, desc, sig, ens.UniformTypical(r, n)))
            break
    ones, zeros = stats.ones, n - stats.ones
    if allow("iid"):
        for desc, H, sig, obj, e in _iid_tables(cfg.m_max, n)["coarse"]:
            if constraint and not constraint.allows_m(e.m):
                continue
            neglogp = ones * e.c1 + zeros * e.c0
            if _typical_fast(neglogp, H, delta_f):
                out.append(_Candidate(obj, desc, sig, ens.IIDQuantized(n, e.m, e.a)))
                break
    if allow("markov-q"):
        out.append(
            _walk_markov_coarse(stats, delta_f, constraint, cfg)
            if n <= cfg.n_max
            else _walk_markov_coarse_big(stats, delta_f, constraint, cfg)
        )
    return out


def _walk_markov_coarse(
    stats: StringStats, delta_f: float, constraint: Optional[Constraint], cfg: FamilyConfig
) -> Optional[_Candidate]:
    n = stats.n
    grid = _markov_grid(cfg.m_max)
    tables = _markov_tables(cfg.m_max, n)
    H, desc_arr, sig_arr, obj_arr = tables["H"], tables["desc"], tables["sig"], tables["obj"]
    order = tables["coarse_order"]
    li = grid.li1 if stats.first else grid.li0
    n00, n01, n10, n11 = stats.n00, stats.n01, stats.n10, stats.n11
    c00, c01, c10, c11 = grid.c00, grid.c01, grid.c10, grid.c11
    for start in range(0, grid.size, _WALK_CHUNK):
        chunk = order[start : start + _WALK_CHUNK].tolist()
        for j in chunk:
            if constraint and not constraint.allows_m(int(grid.m[j])):
                continue
            neglogp = li[j] + n00 * c00[j] + n01 * c01[j] + n10 * c10[j] + n11 * c11[j]
            if _typical_fast(neglogp, float(H[j]), delta_f):
                e = ens.MarkovQuantized(
                    n, int(grid.m[j]), int(grid.a0[j]), int(grid.a1[j]), int(grid.ai[j])
                )
                return _Candidate(float(obj_arr[j]), int(desc_arr[j]), float(sig_arr[j]), e)
    return None


def _walk_markov_coarse_big(
    stats: StringStats, delta_f: float, constraint: Optional[Constraint], cfg: FamilyConfig
) -> Optional[_Candidate]:
    n = stats.n
    grid = _markov_grid(cfg.m_max)
    base = 3 + nat_code_len(n)
    margin = 1e-6 + 1e-12 * n
    best: Optional[_Candidate] = None
    Hcf_all = grid.entropies_closed(n)
    for m in range(1, cfg.m_max + 1):
        if constraint and not constraint.allows_m(m):
            continue
        desc = base + nat_code_len(m) + 3 * m
        if best is not None and 2 * desc > best.objective:
            continue
        sl = grid.m_slices[m]
        Hcf = Hcf_all[sl]
        li = (grid.li1 if stats.first else grid.li0)[sl]
        v = (
            li
            + stats.n00 * grid.c00[sl]
            + stats.n01 * grid.c01[sl]
            + stats.n10 * grid.c10[sl]
            + stats.n11 * grid.c11[sl]
        )
        typ = v <= Hcf * (1.0 + delta_f) + ens.TYPICALITY_SLACK + margin
        idxs = np.flatnonzero(typ)
        if idxs.size == 0:
            continue
        sub = sorted(
            idxs.tolist(),
            key=lambda i: (
                Hcf[i],
                int(grid.a0[sl.start + i]),
                int(grid.a1[sl.start + i]),
                int(grid.ai[sl.start + i]),
            ),
        )
        for i in sub[:256]:
            j = sl.start + i
            e = ens.MarkovQuantized(n, m, int(grid.a0[j]), int(grid.a1[j]), int(grid.ai[j]))
            Hj = ens.entropy(e)
            if _typical_fast(float(v[i]), Hj, delta_f):
                cand = _Candidate(2 * desc + Hj, desc, Hj + desc, e)
                if best is None or (cand.objective, cand.desc, cand.sigma) < (
                    best.objective,
                    best.desc,
                    best.sigma,
                ):
                    best = cand
                break
    return best


def coarse_ec(
    x: str,
    delta,
    mode: str = "exact",
    cfg: FamilyConfig = DEFAULT_CONFIG,
    constraint: Optional[Constraint] = None,
) -> ComplexityReport:
    """Coarse effective complexity min_typical [2 D(E) + H(E)] - khat(x)."""
    stats = string_stats(x)
    n = stats.n
    mode = _resolve_mode(mode, n, cfg)
    delta_f = float(delta)
    if delta_f < 0:
        raise ValueError("delta must be >= 0")
    khv = khat_value(stats, cfg, mode)
    cands = _coarse_candidates(x, stats, delta_f, mode, constraint, cfg)
    best = _pick_canonical(cands)
    value = float(best.objective) - khv
    return ComplexityReport(
        n=n,
        lz_len=stats.lz_len,
        khat=khv,
        mode=mode,
        ec_is_upper_bound=(mode == "upper"),
        coarse_ec=value,
        witness=best.ensemble,
        delta_text=str(Fraction(delta)),
        config=cfg.echo(),
    )


# --- exhaustive scan -------------------------------------------------------------

@dataclass
class ScanResult:
    n: int
    delta_text: str
    max_value: float
    argmax: str
    histogram: list[tuple[float, int]]  # sorted by value


def max_coarse_scan(n: int, delta, cfg: FamilyConfig = DEFAULT_CONFIG) -> ScanResult:
    """Exhaustive exact coarse_ec over {0,1}^n: max, lex-first argmax, histogram."""
    if n > 16:
        raise ResourceLimitError(f"max_coarse_scan requires n <= 16, got {n}")
    delta_f = float(delta)
    if delta_f < 0:
        raise ValueError("delta must be >= 0")
    hist: dict[float, int] = {}
    best_val = -math.inf
    best_x = None
    value_cache: dict[tuple, float] = {}
    for x, lz_len in lz78.iter_with_code_len(n):
        stats = string_stats(x, lz_len)
        key = stats.key
        val = value_cache.get(key)
        if val is None:
            khv = khat_value(stats, cfg, "exact")
            best = _pick_canonical(_coarse_candidates(x, stats, delta_f, "exact", None, cfg))
            val = float(best.objective) - khv
            value_cache[key] = val
        hist[val] = hist.get(val, 0) + 1
        if val > best_val:
            best_val = val
            best_x = x
    return ScanResult(
        n=n,
        delta_text=str(Fraction(delta)),
        max_value=best_val,
        argmax=best_x,
        histogram=sorted(hist.items()),
    )


# --- stationary-process sweep -------------------------------------------------------

@dataclass
class SweepRow:
    n: int
    samples: int
    seed: int
    eps: Fraction
    delta: Fraction
    fraction_budget_satisfied: Fraction
    median_ec_upper: Optional[float]
    n_empty: int
    reference_bits: int
    c_scheme: int


def _grid_rate_above(h: float, cfg: FamilyConfig) -> Fraction:
    for r in cfg.r_grid:
        if float(r) > h:
            return r
    return cfg.r_grid[-1]


def theorem1_sweep(
    model: ProcessModel,
    eps: Fraction,
    delta: Fraction,
    n_list: list[int],
    samples: int,
    seed: int,
    cfg: FamilyConfig = DEFAULT_CONFIG,
    threads: int | None = None,
) -> list[SweepRow]:
    """Budget check and certified upper bounds along growing block lengths.

    For each sampled path the budget test asks whether the total
    information surrogate D + r*n of the uniform-typical ensemble at the
    grid rate r just above the generating component's entropy rate stays
    within khat + eps*n (evaluated exactly in rational arithmetic). Rows
    aggregate per n: the satisfaction fraction, the median certified
    effective-complexity upper bound with Delta = eps*n, and the
    reference curve |delta(n)| + |code(r)| + 3, the description length
    the uniform-typical construction predicts for the witness.
    """
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if sorted(n_list) != list(n_list):
        raise ValueError("n_list must be ascending")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    eps = Fraction(eps)
    delta = Fraction(delta)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    comps = components(model)
    r_by_comp = [_grid_rate_above(entropy_rate(c), cfg) for _, c in comps]
    r_ref = max(r_by_comp)
    c_scheme = sweep_scheme_constant(cfg)
    delta_f = float(delta)
    rows: list[SweepRow] = []

    def run_sample(args) -> tuple[bool, Optional[int]]:
        n, bits, comp_idx = args
        stats = string_stats(bits)
        khv = khat_value(stats, cfg, "upper")
        r_star = r_by_comp[comp_idx]
        sigma_hat = (3 + nat_code_len(n) + rational_code_len(r_star)) + r_star * n
        ok = sigma_hat <= khv + eps * n
        T = khv + eps * n
        best = _pick_canonical(_ec_candidates(bits, stats, delta_f, T, "upper", None, cfg))
        return ok, (best.objective if best is not None else None)

    for idx_n, n in enumerate(n_list):
        paths = sample_paths(model, n, seed + idx_n, samples)
        tasks = [(n, bits, comp) for bits, comp in paths]
        if threads and threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run_sample, tasks))
        else:
            results = [run_sample(t) for t in tasks]
        oks = sum(1 for ok, _ in results if ok)
        values = [v for _, v in results if v is not None]
        rows.append(
            SweepRow(
                n=n,
                samples=samples,
                seed=seed,
                eps=eps,
                delta=delta,
                fraction_budget_satisfied=Fraction(oks, samples),
                median_ec_upper=float(statistics.median(values)) if values else None,
                n_empty=samples - len(values),
                reference_bits=nat_code_len(n) + rational_code_len(r_ref) + 3,
                c_scheme=c_scheme,
            )
        )
    return rows
