"""Discrete logarithms mod a prime via exactly simulated two-register sampling.

Registers run over ``Z_{p-1}``; the measured third register ``g^k`` leaves the
preimage set ``{(a, b) : g^a x^(-b) == g^k}``, i.e. ``a == k + r b``. The
registers are either transformed at size ``p - 1`` (easy case) or zero-padded
to a power of two ``q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import numtheory as nt
from .bounds import BoundReport, QaupV2Input, qaup_v2_bound
from .errors import PreconditionError, SizeLimitError
from .sampling import (
    MAX_DISTRIBUTION_SIZE,
    Distribution,
    MultiDimInstance,
    full_distribution,
    make_rng,
    sample,
)

DEFAULT_S_MIN = 10.0
# A round succeeds only on an exact floor image, roughly 1/s^2 of the mass per
# good pair, so desk-scale runs need hundreds of rounds on average.
DEFAULT_MAX_REPETITIONS = 5000


def is_generator(g: int, p: int) -> bool:
    """Brute-force check that ``g`` generates ``(Z/pZ)^*``."""
    if not nt.is_probable_prime(p) or g % p == 0:
        return False
    return nt.multiplicative_order(g % p, p) == p - 1


def discrete_log_oracle(g: int, x: int, p: int) -> int:
    """Least ``r >= 0`` with ``g^r == x mod p``, by brute force."""
    value = 1
    for r in range(p - 1):
        if value == x % p:
            return r
        value = value * g % p
    raise ValueError(f"{x} is not a power of {g} mod {p}")


def _check_group(p: int, g: int, x: int) -> None:
    if not nt.is_probable_prime(p) or p < 3:
        raise ValueError(f"p={p} must be an odd prime")
    if p >= nt.MAX_MODULUS:
        raise SizeLimitError(f"p must be below {nt.MAX_MODULUS}")
    if not is_generator(g, p):
        raise ValueError(f"g={g} does not generate the multiplicative group mod {p}")
    if not 1 <= x < p:
        raise ValueError(f"x={x} must lie in [1, p)")


def dlog_preimage_set(p: int, g: int, x: int, k: int) -> tuple[tuple[int, int], ...]:
    """All ``(a, b)`` in ``Z_{p-1}^2`` with ``g^a x^(-b) == g^k mod p``."""
    n = p - 1
    if not 0 <= k < n:
        raise ValueError(f"k={k} outside [0, {n})")
    target = nt.mod_pow(g, k, p)
    log_table = {}
    value = 1
    for a in range(n):
        log_table[value] = a
        value = value * g % p
    out = []
    xb = 1
    for b in range(n):
        # g^a x^(-b) = g^k  <=>  g^a = g^k x^b
        a = log_table.get(target * xb % p)
        if a is not None:
            out.append((a, b))
        xb = xb * x % p
    return tuple(sorted(out))


def _instance(p: int, q: int, B) -> MultiDimInstance:
    return MultiDimInstance(((p - 1, q), (p - 1, q)), B)


def target_pairs(p: int, r: int) -> list[tuple[int, int]]:
    """``{(c, -r c mod (p-1)) : gcd(c, p-1) = 1}``."""
    n = p - 1
    return [(c, (-r * c) % n) for c in range(n) if math.gcd(c, n) == 1]


@dataclass
class EasyDlogReport:
    p: int
    r: int
    k: int
    good_pair_probabilities: list
    max_off_line: float
    prob_target: float
    expected_target: float
    total: float
    holds: bool


def easy_case_dlog_check(p: int, g: int, x: int, k: int = 0, tol: float = 1e-10) -> EasyDlogReport:
    _check_group(p, g, x)
    n = p - 1
    r = discrete_log_oracle(g, x, p)
    dist = full_distribution(_instance(p, n, dlog_preimage_set(p, g, x, k)))
    probs = dist.as_dense()
    on_line = np.zeros_like(probs, dtype=bool)
    for c in range(n):
        on_line[c, (-r * c) % n] = True
    good = probs[on_line]
    off = float(np.max(probs[~on_line])) if (~on_line).any() else 0.0
    prob_t = dist.mass(target_pairs(p, r))
    expected = nt.euler_phi(n) / n
    holds = (
        float(np.max(np.abs(good - 1 / n))) <= tol
        and off <= tol
        and abs(prob_t - expected) <= tol
    )
    return EasyDlogReport(p, r, k, [float(v) for v in good], off, prob_t, expected, dist.total(), holds)


def choose_q(p: int, s_min: float = DEFAULT_S_MIN) -> int:
    """Least power of two with ``q/(p-1) > max(s_min, 3 pi)``."""
    threshold = max(s_min, 3 * math.pi)
    q = nt.next_power_of_two_at_least(p - 1)
    while q / (p - 1) <= threshold:
        q *= 2
    return q


def padded_dlog_distribution(p: int, g: int, x: int, q: int, k: int = 0) -> Distribution:
    _check_group(p, g, x)
    if q < p - 1:
        raise ValueError("q must be at least p - 1")
    if q * q > MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError(f"q^2 = {q * q} outcomes exceeds the limit")
    return full_distribution(_instance(p, q, dlog_preimage_set(p, g, x, k)))


def eq8_bound(p: int, s: float) -> float:
    """Per-pair lower bound ``(1/(s^2 (p-1))) (1 - 3 pi / s)^2``."""
    if s <= 3 * math.pi:
        raise PreconditionError("need s > 3 pi")
    return (1 - 3 * math.pi / s) ** 2 / (s * s * (p - 1))


def eq8_aggregate_bound(p: int, s: float) -> float:
    return nt.euler_phi(p - 1) * eq8_bound(p, s)


def padded_target_pairs(p: int, r: int, q: int) -> list[tuple[int, int]]:
    n = p - 1
    return [((q * c) // n, (q * d) // n) for c, d in target_pairs(p, r)]


def qaup_v2_report(p: int, g: int, x: int, q: int, k: int, pair: tuple[int, int]) -> BoundReport:
    """Version-2 bound for one good pair, with ``delta = 3 (p-1)^2 / (2q)``."""
    n = p - 1
    c, d = pair
    B = dlog_preimage_set(p, g, x, k)
    inp = QaupV2Input(
        dims=((n, q), (n, q)),
        k=(c, d),
        k_prime=((q * c) // n, (q * d) // n),
        B=B,
        delta=Fraction(3 * n * n, 2 * q),
    )
    return qaup_v2_bound(inp)


def invert_rounding(c_prime: int, d_prime: int, q: int, p: int) -> Optional[tuple[int, int]]:
    """``(c, d)`` with ``c' = floor(q c/(p-1))`` and ``d' = floor(q d/(p-1))``, if any."""
    n = p - 1

    def one(v: int) -> Optional[int]:
        u = -(-v * n // q)
        if 0 <= u < n and (q * u) // n == v:
            return u
        return None

    c, d = one(c_prime), one(d_prime)
    if c is None or d is None:
        return None
    return c, d


def recover_r(c: int, d: int, p: int, g: Optional[int] = None, x: Optional[int] = None) -> Optional[int]:
    """``r = -d c^(-1) mod (p-1)`` when ``gcd(c, p-1) = 1``; checked against
    ``g^r == x`` when ``g`` and ``x`` are given."""
    n = p - 1
    if math.gcd(c, n) != 1:
        return None
    r = (-d * nt.mod_inverse(c, n)) % n
    if g is not None and x is not None and nt.mod_pow(g, r, p) != x % p:
        return None
    return r


@dataclass(frozen=True)
class DlogConfig:
    p: int
    g: int
    x: int
    seed: int = 2024
    s_min: float = DEFAULT_S_MIN
    max_repetitions: int = DEFAULT_MAX_REPETITIONS

    def __post_init__(self):
        _check_group(self.p, self.g, self.x)
        if self.s_min <= 3 * math.pi:
            raise ValueError("s_min must exceed 3 pi")
        if self.max_repetitions < 1:
            raise ValueError("max_repetitions must be positive")


@dataclass
class DlogTranscript:
    p: int
    g: int
    x: int
    seed: int
    q: int
    s: float
    measurements: list = field(default_factory=list)
    inverted: list = field(default_factory=list)
    third_register: list = field(default_factory=list)
    r: Optional[int] = None
    success: bool = False
    repetitions: int = 0
    bounds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def run_dlog(config: DlogConfig) -> DlogTranscript:
    p, g, x = config.p, config.g, config.x
    q = choose_q(p, config.s_min)
    if q * q > MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError(f"q^2 = {q * q} outcomes exceeds the limit")
    s = q / (p - 1)
    rng = make_rng(config.seed)
    tr = DlogTranscript(p=p, g=g, x=x, seed=config.seed, q=q, s=s)
    tr.bounds = {"per_pair": eq8_bound(p, s), "aggregate": eq8_aggregate_bound(p, s)}
    cache: dict[int, Distribution] = {}
    while tr.repetitions < config.max_repetitions:
        tr.repetitions += 1
        k = int(rng.integers(0, p - 1))
        if k not in cache:
            cache[k] = full_distribution(_instance(p, q, dlog_preimage_set(p, g, x, k)))
        c_prime, d_prime = sample(cache[k], rng)
        tr.third_register.append(k)
        tr.measurements.append([c_prime, d_prime])
        pair = invert_rounding(c_prime, d_prime, q, p)
        tr.inverted.append(list(pair) if pair else None)
        if pair is None:
            continue
        r = recover_r(pair[0], pair[1], p, g, x)
        if r is not None:
            tr.r, tr.success = r, True
            break
    return tr
