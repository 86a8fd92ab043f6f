"""Lower bounds on the probability of measuring ``k'`` after zero-padded sampling.

Version 1 (one register): with ``q > p``, outcome ``k`` at size ``p`` and
``k' = qk/p + eps`` at size ``q``, and ``B = a + Bbar``, if

    2 pi |eps| sum|c| / q^2  <=  2 pi delta / q^2  <=  (p/q) ||P_k R_B f||

then

    prob(k', p, q) >= (p/q) (sqrt(p/|B|) ||P_k R_B f|| - 2 pi delta / (q sqrt(|B| p)))^2.

Version 2 applies the same argument register-wise with ``pbar = prod n_j``,
``qbar = prod q_j`` and ``delta >= sum_B |sum_l a_l eps_l / q_l|``.

``eps`` and the ``delta`` floor are compared in exact rational arithmetic;
floats enter only when the phase sums are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Literal, Sequence, Union

import numpy as np

from .errors import PreconditionError
from .sampling import MultiDimInstance, prob_point_multi

Number = Union[int, float, Fraction]
Rounding = Literal["floor", "round", "ceil"]

PHASE_TOL = 1e-12
INEQUALITY_TOL = 1e-10


def phase_lemma_check(x: float) -> bool:
    """``|exp(ix) - 1| <= |x|``."""
    return abs(np.exp(1j * x) - 1.0) <= abs(x) + PHASE_TOL


def _exact(value: Number) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _phase_sum_abs(points: np.ndarray, k: int, n: int) -> float:
    return float(abs(np.exp(2j * np.pi * (points * k % n) / n).sum()))


@dataclass(frozen=True)
class QaupV1Input:
    p: int
    q: int
    k: int
    k_prime: int
    bar_b: tuple[int, ...]
    delta: Number
    a: int = 0

    def __post_init__(self):
        if not self.q > self.p >= 1:
            raise ValueError(f"need q > p >= 1, got p={self.p}, q={self.q}")
        if not 0 <= self.k < self.p:
            raise ValueError(f"k={self.k} outside [0, {self.p})")
        if not 0 <= self.k_prime < self.q:
            raise ValueError(f"k'={self.k_prime} outside [0, {self.q})")
        bar_b = tuple(sorted(set(int(c) for c in self.bar_b)))
        if not bar_b:
            raise ValueError("Bbar must be nonempty")
        object.__setattr__(self, "bar_b", bar_b)
        if _exact(self.delta) < self.min_delta():
            raise ValueError(
                f"delta={self.delta} is below |eps| * sum|c| = {float(self.min_delta())}"
            )

    @property
    def epsilon(self) -> Fraction:
        """``k' - qk/p`` exactly."""
        return Fraction(self.k_prime) - Fraction(self.q * self.k, self.p)

    def min_delta(self) -> Fraction:
        return abs(self.epsilon) * sum(abs(c) for c in self.bar_b)

    @property
    def b_size(self) -> int:
        return len(self.bar_b)

    def small_norm(self) -> float:
        """``||P_k^p R_B^p f||_2 = |sum_{c in Bbar} exp(2 pi i c k/p)| / p``."""
        return _phase_sum_abs(np.asarray(self.bar_b, dtype=np.int64), self.k, self.p) / self.p

    def padded_norm(self) -> float:
        """``||P_{k'}^q R_B^q f||_2``; the shift ``a`` only changes a global phase."""
        return _phase_sum_abs(np.asarray(self.bar_b, dtype=np.int64), self.k_prime, self.q) / self.q


@dataclass
class BoundReport:
    lower_bound: float
    exact_probability: float
    condition_holds: bool
    inequality_holds: bool
    parameters: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.exact_probability - self.lower_bound

    def to_dict(self) -> dict:
        out = asdict(self)
        out["margin"] = self.margin
        return out


def lemma_v1_chain(inp: QaupV1Input) -> tuple[float, float, float, float]:
    """The four quantities of the version-1 lemma, in increasing order when it applies:

    ``(0, (p/q)N - 2 pi delta/q^2, (p/q)N - 2 pi |eps| sum|c|/q^2, ||P_k' R_B f||)``.
    """
    p, q = inp.p, inp.q
    lead = p / q * inp.small_norm()
    spread = float(inp.min_delta())
    return (
        0.0,
        lead - 2 * math.pi * float(_exact(inp.delta)) / q**2,
        lead - 2 * math.pi * spread / q**2,
        inp.padded_norm(),
    )


def qaup_v1_condition(inp: QaupV1Input) -> bool:
    # the first two links (|eps| sum|c| <= delta, both >= 0) are exact and enforced on construction
    lhs = 2 * math.pi * float(_exact(inp.delta)) / inp.q**2
    return lhs <= inp.p / inp.q * inp.small_norm()


def _v1_report(inp: QaupV1Input) -> BoundReport:
    p, q, nb = inp.p, inp.q, inp.b_size
    cond = qaup_v1_condition(inp)
    inner = math.sqrt(p / nb) * inp.small_norm() - 2 * math.pi * float(_exact(inp.delta)) / (q * math.sqrt(nb * p))
    lower = p / q * inner**2 if cond else float("nan")
    exact = q / nb * inp.padded_norm() ** 2
    holds = bool(cond and lower <= exact + INEQUALITY_TOL)
    params = {
        "p": p, "q": q, "k": inp.k, "k_prime": inp.k_prime, "a": inp.a,
        "epsilon": float(inp.epsilon), "delta": float(_exact(inp.delta)),
        "b_size": nb, "s": q / p,
    }
    return BoundReport(lower, exact, cond, holds, params)


def qaup_v1_bound(inp: QaupV1Input) -> BoundReport:
    """Certified lower bound on ``prob(k', p, q)``; raises if the hypothesis fails."""
    if not qaup_v1_condition(inp):
        raise PreconditionError("2 pi delta / q^2 exceeds (p/q) ||P_k R_B f||")
    return _v1_report(inp)


def qaup_v1_evaluate(inp: QaupV1Input) -> BoundReport:
    """Like :func:`qaup_v1_bound` but reports a failed hypothesis instead of raising."""
    return _v1_report(inp)


def rounded_k_prime(kind: Rounding, k: int, p: int, q: int) -> int:
    num, den = q * k, p
    if kind == "floor":
        return num // den
    if kind == "ceil":
        return -(-num // den)
    if kind == "round":
        # nearest integer, ties upward
        return (2 * num + den) // (2 * den)
    raise ValueError(f"unknown rounding kind {kind!r}")


def qaup_v1a_input(kind: Rounding, k: int, p: int, q: int, bar_b: Iterable[int], delta_bar: Number, a: int = 0) -> QaupV1Input:
    bar_b = tuple(bar_b)
    if _exact(delta_bar) < sum(abs(c) for c in bar_b):
        raise ValueError("delta_bar must bound sum |c| over Bbar")
    k_prime = rounded_k_prime(kind, k, p, q)
    if k_prime >= q:
        raise ValueError(f"rounded k'={k_prime} falls outside Z_{q}")
    return QaupV1Input(p=p, q=q, k=k, k_prime=k_prime, bar_b=bar_b, delta=delta_bar, a=a)


def qaup_v1a_bound(kind: Rounding, k: int, p: int, q: int, bar_b: Iterable[int], delta_bar: Number, a: int = 0) -> BoundReport:
    """Rounded-``k'`` corollary: ``|eps| < 1`` so ``delta_bar >= sum|c|`` suffices."""
    report = qaup_v1_bound(qaup_v1a_input(kind, k, p, q, bar_b, delta_bar, a))
    report.parameters["kind"] = kind
    return report


@dataclass(frozen=True)
class QaupV2Input:
    """``dims[j] = (n_j, q_j)`` with ``n_j = p_j - 1``."""

    dims: tuple[tuple[int, int], ...]
    k: tuple[int, ...]
    k_prime: tuple[int, ...]
    B: tuple[tuple[int, ...], ...]
    delta: Number

    def __post_init__(self):
        inst = MultiDimInstance(self.dims, self.B)
        object.__setattr__(self, "dims", inst.dims)
        object.__setattr__(self, "B", inst.B)
        k = tuple(int(x) for x in self.k)
        kp = tuple(int(x) for x in self.k_prime)
        if len(k) != len(self.dims) or len(kp) != len(self.dims):
            raise ValueError("k and k' need one coordinate per register")
        for kj, kpj, (n, q) in zip(k, kp, self.dims):
            if not 0 <= kj < n or not 0 <= kpj < q:
                raise ValueError(f"outcome out of range in register ({n}, {q})")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "k_prime", kp)
        if _exact(self.delta) < self.min_delta():
            raise ValueError(f"delta={self.delta} is below its floor {float(self.min_delta())}")

    @property
    def epsilons(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(kp) - Fraction(q * k, n) for k, kp, (n, q) in zip(self.k, self.k_prime, self.dims))

    def min_delta(self) -> Fraction:
        """``sum_{a in B} |sum_l a_l eps_l / q_l|``."""
        eps = [e / q for e, (_, q) in zip(self.epsilons, self.dims)]
        return sum((abs(sum(a_l * e_l for a_l, e_l in zip(t, eps))) for t in self.B), Fraction(0))

    @property
    def p_bar(self) -> int:
        return math.prod(n for n, _ in self.dims)

    @property
    def q_bar(self) -> int:
        return math.prod(q for _, q in self.dims)

    def instance(self) -> MultiDimInstance:
        return MultiDimInstance(self.dims, self.B)

    def small_norm(self) -> float:
        """``||P_k^p R_B^p f||_2`` computed on the unpadded registers."""
        unpadded = MultiDimInstance(tuple((n, n) for n, _ in self.dims), self.B)
        return math.sqrt(prob_point_multi(unpadded, self.k) * len(self.B) / self.p_bar)

    def padded_norm(self) -> float:
        return math.sqrt(prob_point_multi(self.instance(), self.k_prime) * len(self.B) / self.q_bar)


def lemma_v2_chain(inp: QaupV2Input) -> tuple[float, float, float]:
    lead = inp.p_bar / inp.q_bar * inp.small_norm()
    return 0.0, lead - 2 * math.pi * float(_exact(inp.delta)) / inp.q_bar, inp.padded_norm()


def qaup_v2_condition(inp: QaupV2Input) -> bool:
    lhs = 2 * math.pi * float(_exact(inp.delta)) / inp.q_bar
    return lhs <= inp.p_bar / inp.q_bar * inp.small_norm()


def _v2_report(inp: QaupV2Input) -> BoundReport:
    pb, qb, nb = inp.p_bar, inp.q_bar, len(inp.B)
    cond = qaup_v2_condition(inp)
    inner = math.sqrt(pb / nb) * inp.small_norm() - 2 * math.pi * float(_exact(inp.delta)) / math.sqrt(nb * pb)
    lower = pb / qb * inner**2 if cond else float("nan")
    exact = prob_point_multi(inp.instance(), inp.k_prime)
    holds = bool(cond and lower <= exact + INEQUALITY_TOL)
    params = {
        "dims": [list(d) for d in inp.dims], "k": list(inp.k), "k_prime": list(inp.k_prime),
        "epsilons": [float(e) for e in inp.epsilons], "delta": float(_exact(inp.delta)),
        "b_size": nb, "p_bar": pb, "q_bar": qb,
    }
    return BoundReport(lower, exact, cond, holds, params)


def qaup_v2_bound(inp: QaupV2Input) -> BoundReport:
    if not qaup_v2_condition(inp):
        raise PreconditionError("2 pi delta / qbar exceeds (pbar/qbar) ||P_k R_B f||")
    return _v2_report(inp)


def qaup_v2_evaluate(inp: QaupV2Input) -> BoundReport:
    return _v2_report(inp)


def aggregate(reports: Sequence[BoundReport]) -> tuple[float, float]:
    """Sum per-outcome bounds and exact probabilities over a target set.

    Outcomes must be distinct for the exact sum to be a probability.
    """
    return (
        float(sum(r.lower_bound for r in reports)),
        float(sum(r.exact_probability for r in reports)),
    )
