"""Order finding and factoring with exactly simulated Fourier sampling.

The multiplicative order ``r`` computed by brute force (``r_oracle``) is only
ever used to validate parameters and to evaluate certificates; the pipeline
recovers ``r`` from sampled measurements and continued fractions.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Literal, Optional

import numpy as np

from . import numtheory as nt
from .errors import PreconditionError, SizeLimitError
from .finite_fourier import IndexSet
from .sampling import (
    MAX_DISTRIBUTION_SIZE,
    SamplingInstance,
    full_distribution,
    make_rng,
    prob_points,
    prob_set,
    sample,
)

Shape = Literal["t", "t+1"]
DEFAULT_S_MIN = 2 * math.pi


@dataclass(frozen=True)
class ReductionOutcome:
    kind: Literal["factor", "retry", "order"]
    factor: Optional[int] = None
    reason: str = ""


def classical_reduction_step(N: int, x: int, r: Optional[int] = None) -> ReductionOutcome:
    """Classical steps around order finding.

    Without ``r`` this is the gcd shortcut, answering ``order`` when the
    order is needed. With ``r`` it applies the odd-order and
    ``x^(r/2) == -1`` retries and otherwise returns ``gcd(x^(r/2) - 1, N)``.
    """
    if not 1 < x < N:
        raise ValueError(f"x must satisfy 1 < x < N, got x={x}, N={N}")
    g = math.gcd(x, N)
    if g != 1:
        return ReductionOutcome("factor", g, "gcd(x, N) > 1")
    if r is None:
        return ReductionOutcome("order")
    if r % 2:
        return ReductionOutcome("retry", reason="order is odd")
    half = nt.mod_pow(x, r // 2, N)
    if (half + 1) % N == 0:
        return ReductionOutcome("retry", reason="x^(r/2) == -1 mod N")
    f = math.gcd(half - 1, N)
    if not 1 < f < N:
        # only reachable when r is a multiple of the true order
        return ReductionOutcome("retry", reason="gcd(x^(r/2) - 1, N) is trivial")
    return ReductionOutcome("factor", f, "gcd(x^(r/2) - 1, N)")


def easy_case_target_set(r: int, t: int) -> IndexSet:
    """``{j t : 0 <= j < r, gcd(j, r) = 1}`` inside ``Z_{rt}``."""
    return IndexSet(r * t, tuple(j * t for j in range(r) if math.gcd(j, r) == 1))


def phi_ratio_floor(r: int) -> float:
    """Rosser-Schoenfeld: ``phi(r)/r > 1 / (e^gamma log log r + 3 / log log r)`` for ``r >= 3``."""
    if r < 3:
        raise ValueError("floor is stated for r >= 3")
    ll = math.log(math.log(r))
    return 1.0 / (math.exp(0.5772156649015329) * ll + 3.0 / ll)


@dataclass
class EasyCaseReport:
    r: int
    t: int
    a: int
    support: list
    max_point_error: float
    prob_target: float
    expected: float
    holds: bool


def easy_case_check(r: int, t: int, a: int = 0, tol: float = 1e-10) -> EasyCaseReport:
    """Exact check of the ``p = q = rt`` case: outcomes are the multiples of ``t``,
    each with probability ``1/r``, and the coprime multiples carry ``phi(r)/r``."""
    if r < 1 or t < 1 or not 0 <= a < r:
        raise ValueError("need r, t >= 1 and 0 <= a < r")
    p = r * t
    if p > MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError("rt exceeds the distribution size limit")
    inst = SamplingInstance(p, p, IndexSet(p, tuple(a + j * r for j in range(t))))
    probs = full_distribution(inst).as_dense()
    expected = np.zeros(p)
    expected[::t] = 1.0 / r
    err = float(np.max(np.abs(probs - expected)))
    prob_t = prob_set(inst, easy_case_target_set(r, t))
    target = nt.euler_phi(r) / r
    support = [int(k) for k in np.flatnonzero(probs > tol)]
    return EasyCaseReport(r, t, a, support, err, prob_t, target, err <= tol and abs(prob_t - target) <= tol)


@dataclass(frozen=True)
class FactoringParameters:
    r: int
    r_prime: int
    p_prime: int
    p: int
    t: int
    q: int

    @property
    def s(self) -> float:
        return self.q / self.p


def choose_q(p: int, s_min: float = DEFAULT_S_MIN) -> int:
    """Least power of two ``q`` with ``q/p > max(s_min, 2 pi)``.

    ``s > 2 pi`` is exactly what makes ``1 - 1/(2(1 - pi/s)) > 0``.
    """
    threshold = max(s_min, 2 * math.pi)
    q = nt.next_power_of_two_at_least(p)
    while q / p <= threshold:
        q *= 2
    return q


def eq51_ok(s: float) -> bool:
    return 1 - math.pi / s > 0


def eq521_ok(s: float, t: int) -> bool:
    c = 1 - math.pi / s
    return c > 0 and 0 < 1 - 1 / (2 * c) < 1 - 1 / (2 * t * c)


def choose_parameters(r: int, r_prime: int, s_min: float = DEFAULT_S_MIN) -> FactoringParameters:
    """``p'``, ``p = rt`` and ``q`` for an order ``r`` and a guess ``2r < r' < 4r``."""
    if not 2 * r < r_prime < 4 * r:
        raise PreconditionError(f"need 2r < r' < 4r, got r={r}, r'={r_prime}")
    if s_min <= math.pi:
        raise PreconditionError("s_min must exceed pi")
    p_prime = nt.power_of_two_strictly_between(r_prime**2, 2 * r_prime**2)
    if p_prime is None:
        raise PreconditionError(f"no power of two strictly between {r_prime**2} and {2 * r_prime**2}")
    t = p_prime // r
    p = r * t
    q = choose_q(p, s_min)
    params = FactoringParameters(r, r_prime, p_prime, p, t, q)
    if not (4 * r * r <= p <= p_prime < r * (t + 1)):
        raise AssertionError(f"parameter chain violated: {params}")
    if not (eq51_ok(params.s) and eq521_ok(params.s, t)):
        raise AssertionError(f"s={params.s} violates the slack conditions")
    return params


@dataclass(frozen=True)
class GeneralPreimage:
    B: IndexSet
    a: int
    step: int
    t: int
    shape: Shape


def general_case_B(N: int, x: int, p_prime: int, b: int = 1) -> GeneralPreimage:
    """``{j < p' : x^j == b mod N}`` and whether it has ``t`` or ``t + 1`` elements."""
    if math.gcd(x, N) != 1:
        raise nt.NotCoprimeError(f"gcd({x}, {N}) != 1")
    members = _power_classes(N, x, p_prime).get(b % N)
    if not members:
        raise ValueError(f"{b} is not a power of {x} mod {N}")
    step = members[1] - members[0] if len(members) > 1 else nt.multiplicative_order(x, N)
    t = p_prime // step
    shape: Shape = "t" if len(members) == t else "t+1"
    return GeneralPreimage(IndexSet(p_prime, tuple(members)), members[0], step, t, shape)


def _power_classes(N: int, x: int, length: int) -> dict[int, list[int]]:
    classes: dict[int, list[int]] = {}
    value = 1 % N
    for j in range(length):
        classes.setdefault(value, []).append(j)
        value = value * x % N
    return classes


@dataclass(frozen=True)
class GeneralBound:
    per_k: float
    aggregate: float
    shape: Shape
    phi_r: int


def general_case_bound(r: int, t: int, s: float, shape: Shape) -> GeneralBound:
    """Per-outcome and aggregate lower bounds for the general factoring case.

    ``t`` form: ``(1/(s r)) (1 - pi/s)^2``.
    ``t+1`` form: ``(4/(33 r s)) (1 - pi/s)^2 (1 - s/(2t(s - pi)))^2``.
    The aggregate multiplies by ``phi(r)``.
    """
    if not eq51_ok(s):
        raise PreconditionError("need 1 - pi/s > 0")
    if not eq521_ok(s, t):
        raise PreconditionError("need 1 - 1/(2(1 - pi/s)) > 0, i.e. s > 2 pi")
    base = (1 - math.pi / s) ** 2
    if shape == "t":
        per_k = base / (s * r)
    elif shape == "t+1":
        if not 4 * r <= t < 32 * r:
            raise PreconditionError("the t+1 constants need 4r <= t < 32r")
        per_k = 4 / (33 * r * s) * base * (1 - s / (2 * t * (s - math.pi))) ** 2
    else:
        raise ValueError(f"unknown shape {shape!r}")
    phi = nt.euler_phi(r)
    return GeneralBound(per_k, phi * per_k, shape, phi)


def padded_target_set(r: int, p: int, q: int) -> IndexSet:
    """``{floor(q k / p) : k = j t, gcd(j, r) = 1}`` with ``p = r t``."""
    t = p // r
    return IndexSet(q, tuple((q * j * t) // p for j in range(r) if math.gcd(j, r) == 1))


def t_plus_one_chain(r: int, t: int, q: int, k_prime: int) -> tuple[float, float, float]:
    """``(|a + b|, |a|, 1 - s/(2t(s - pi)))`` where ``a`` sums ``t`` phases and ``b`` is the next one."""
    phases = np.exp(2j * np.pi * (np.arange(t + 1) * r * k_prime % q) / q)
    a = phases[:t].sum()
    s = q / (r * t)
    return float(abs(a + phases[t])), float(abs(a)), 1 - s / (2 * t * (s - math.pi))


@dataclass
class Certificate:
    params: FactoringParameters
    a: int
    shape: Shape
    exact_per_k: list
    bound: GeneralBound
    exact_target: float
    # t+1 shape only: |a + b|^2 >= (|a| (1 - s/(2t(s - pi))))^2 at every target;
    # reported alongside the final bound, never folded into ``holds``
    intermediate_holds: Optional[bool] = None

    @property
    def holds(self) -> bool:
        return self.exact_target > self.bound.aggregate and all(e > self.bound.per_k for e in self.exact_per_k)


def factoring_certificate(params: FactoringParameters, a: int = 0) -> Certificate:
    """Exact ``prob(T', p', q)`` for ``B = {a, a + r, ...} below p'`` against the bound."""
    r, p_prime, q = params.r, params.p_prime, params.q
    if not 0 <= a < r:
        raise ValueError("shift a must lie in [0, r)")
    members = tuple(range(a, p_prime, r))
    shape: Shape = "t" if len(members) == params.t else "t+1"
    inst = SamplingInstance(p_prime, q, IndexSet(q, members))
    target = padded_target_set(r, params.p, q)
    exact = prob_points(inst, target.members)
    bound = general_case_bound(r, params.t, params.s, shape)
    intermediate = None
    if shape == "t+1":
        chains = (t_plus_one_chain(r, params.t, q, k) for k in target.members)
        intermediate = all(both**2 >= (first * factor) ** 2 - 1e-12 for both, first, factor in chains)
    return Certificate(params, a, shape, [float(e) for e in exact], bound, float(exact.sum()), intermediate)


@dataclass(frozen=True)
class FactoringConfig:
    N: int
    seed: int = 2024
    s_min: float = DEFAULT_S_MIN
    max_repetitions: int = 200
    allow_gcd_shortcut: bool = True
    ladder_passes: int = 3

    def __post_init__(self):
        if self.N < 15 or self.N % 2 == 0:
            raise ValueError("N must be an odd integer >= 15")
        if self.N >= nt.MAX_MODULUS:
            raise SizeLimitError(f"N must be below {nt.MAX_MODULUS}")
        if nt.is_probable_prime(self.N):
            raise ValueError(f"N={self.N} is prime")
        if self.s_min <= math.pi:
            raise ValueError("s_min must exceed pi")
        if self.max_repetitions < 1:
            raise ValueError("max_repetitions must be positive")


@dataclass
class Transcript:
    n: int
    seed: int
    x: Optional[int] = None
    r_oracle: Optional[int] = None
    p_prime: Optional[int] = None
    p: Optional[int] = None
    q: Optional[int] = None
    s: Optional[float] = None
    measurements: list = field(default_factory=list)
    r_candidates: list = field(default_factory=list)
    factor: Optional[int] = None
    success: bool = False
    method: Optional[str] = None
    repetitions: int = 0
    bounds: dict = field(default_factory=dict)
    rounds: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def r_prime_ladder(N: int) -> list[int]:
    """``2^i + 1`` for ``i >= 1`` while ``2^i < 4N``; some rung lies in ``(2r, 4r)`` for every order ``r < N``."""
    out, i = [], 1
    while 2**i < 4 * N:
        out.append(2**i + 1)
        i += 1
    return out


def _round_bounds(r: int, r_prime: int, p_prime: int, q: int, inst: SamplingInstance, shape: Shape) -> dict:
    # verification only: needs the oracle order
    if not 2 * r < r_prime < 4 * r:
        return {}
    t = p_prime // r
    p = r * t
    s = q / p
    try:
        bound = general_case_bound(r, t, s, shape)
    except PreconditionError:
        return {}
    exact = prob_set(inst, padded_target_set(r, p, q))
    return {"per_k": bound.per_k, "aggregate": bound.aggregate, "exact_target": exact, "shape": shape}


def run_factoring(config: FactoringConfig) -> Transcript:
    """Seeded end-to-end factoring run; never raises on algorithmic failure."""
    N = config.N
    rng = make_rng(config.seed)
    tr = Transcript(n=N, seed=config.seed)
    ladder = r_prime_ladder(N)
    while tr.repetitions < config.max_repetitions:
        x = int(rng.integers(2, N))
        step = classical_reduction_step(N, x)
        if step.kind == "factor":
            if not config.allow_gcd_shortcut:
                continue
            tr.x, tr.factor, tr.success, tr.method = x, step.factor, True, "gcd"
            return tr
        tr.x = x
        r_oracle = nt.multiplicative_order(x, N)
        tr.r_oracle = r_oracle
        cache: dict = {}
        found = None
        for _ in range(config.ladder_passes):
            for r_prime in ladder:
                if tr.repetitions >= config.max_repetitions:
                    return tr
                found = _sampling_round(N, x, r_prime, config, rng, tr, cache)
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            continue
        outcome = classical_reduction_step(N, x, found)
        tr.rounds[-1]["reduction"] = outcome.reason
        if outcome.kind == "factor":
            tr.factor, tr.success, tr.method = outcome.factor, True, "order"
            return tr
    return tr


def _sampling_round(N, x, r_prime, config, rng, tr: Transcript, cache) -> Optional[int]:
    p_prime = nt.power_of_two_strictly_between(r_prime**2, 2 * r_prime**2)
    q = choose_q(p_prime, config.s_min)
    if q > MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError(f"q={q} exceeds the simulation limit; N is too large")
    if p_prime not in cache:
        cache.clear()
        cache[p_prime] = _power_classes(N, x, p_prime)
    classes = cache[p_prime]
    tr.repetitions += 1
    # second-register readout: x^j for j uniform in [0, p')
    b = nt.mod_pow(x, int(rng.integers(0, p_prime)), N)
    members = classes[b]
    inst = SamplingInstance(p_prime, q, IndexSet(q, tuple(members)))
    dist = full_distribution(inst)
    k_prime = int(sample(dist, rng))
    bound_r = math.isqrt(p_prime) // 2
    cand = nt.recover_denominator(Fraction(k_prime, q), max(bound_r, 1))
    valid = cand is not None and nt.mod_pow(x, cand, N) == 1
    r = tr.r_oracle
    t_oracle = p_prime // r
    tr.p_prime, tr.q = p_prime, q
    tr.p = r * t_oracle if t_oracle else None
    tr.s = q / tr.p if tr.p else None
    tr.measurements.append(k_prime)
    tr.r_candidates.append(cand)
    round_info = {
        "x": x, "r_prime": r_prime, "p_prime": p_prime, "q": q, "b": b,
        "b_size": len(members), "k_prime": k_prime, "prob_k_prime": dist.prob(k_prime),
        "candidate": cand, "validated": valid,
    }
    shape: Shape = "t" if t_oracle and len(members) == t_oracle else "t+1"
    bounds = _round_bounds(r, r_prime, p_prime, q, inst, shape)
    if bounds:
        round_info["bounds"] = bounds
        tr.bounds = bounds
    tr.rounds.append(round_info)
    return cand if valid else None
