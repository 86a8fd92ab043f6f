"""Exact measurement statistics for two-register Fourier sampling.

A run prepares a uniform superposition over ``[0, p)``, evaluates ``g`` into a
second register, measures it (leaving the preimage set ``B``), zero-pads to
``q`` and transforms again. The chance of then reading ``k`` is

    prob(k) = |sum_{c in B} exp(2 pi i c k / q)|^2 / (q |B|).

Everything here computes that quantity exactly (up to float rounding):
pointwise by direct summation over ``B``, whole distributions by direct
summation or, for large ``q |B|``, by a zero-padded FFT of the indicator.

Sampling uses numpy's ``default_rng`` (PCG64) with inverse-CDF lookup, so a
given seed reproduces the same draws across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import SizeLimitError
from .finite_fourier import IndexSet, band_limit, delta, norm2, time_limit

MAX_DISTRIBUTION_SIZE = 2**24
MAX_PREIMAGE_SIZE = 2**16
MAX_OPERATOR_Q = 4096
# above this many phase terms full_distribution switches to the FFT path
DIRECT_TERMS_LIMIT = 2**22


@dataclass(frozen=True)
class SamplingInstance:
    p: int
    q: int
    B: IndexSet
    observed: Optional[int] = None

    def __post_init__(self):
        if self.p < 1 or self.q < self.p:
            raise ValueError(f"need 1 <= p <= q, got p={self.p}, q={self.q}")
        if not isinstance(self.B, IndexSet):
            object.__setattr__(self, "B", IndexSet(self.q, tuple(self.B)))
        if self.B.q != self.q:
            raise ValueError("B must be an index set over Z_q")
        if len(self.B) == 0:
            raise ValueError("preimage set B must be nonempty")
        if self.B.members[-1] >= self.p:
            raise ValueError("preimage set B must lie in [0, p)")


@dataclass(frozen=True)
class MultiDimInstance:
    """``dims`` holds ``(n_j, q_j)``: register j runs over ``Z_{n_j}`` and is
    zero-padded to ``q_j``."""

    dims: tuple[tuple[int, int], ...]
    B: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        dims = tuple((int(n), int(q)) for n, q in self.dims)
        if not dims:
            raise ValueError("need at least one register")
        for n, q in dims:
            if n < 1 or q < n:
                raise ValueError(f"need 1 <= n_j <= q_j, got ({n}, {q})")
        B = tuple(sorted(set(tuple(int(a) for a in t) for t in self.B)))
        if not B:
            raise ValueError("preimage set B must be nonempty")
        for t in B:
            if len(t) != len(dims):
                raise ValueError("tuple length does not match number of registers")
            if any(not 0 <= a < n for a, (n, _) in zip(t, dims)):
                raise ValueError(f"tuple {t} outside the register ranges")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "B", B)

    @property
    def p_bar(self) -> int:
        return math.prod(n for n, _ in self.dims)

    @property
    def q_bar(self) -> int:
        return math.prod(q for _, q in self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.dims)


def preimage_set(
    g: Union[Callable[[int], int], Mapping[int, int], Sequence[int]],
    p: int,
    b: int,
    q: Optional[int] = None,
) -> IndexSet:
    """``{c in [0, p) : g(c) == b}`` as an index set over ``Z_q`` (default ``q = p``)."""
    q = p if q is None else q
    lookup = g if callable(g) else g.__getitem__
    members = tuple(c for c in range(p) if lookup(c) == b)
    if not members:
        raise ValueError(f"value {b} is not attained on [0, {p})")
    return IndexSet(q, members)


def _phase_sum(B: np.ndarray, k, q: int):
    # (c * k) mod q keeps the phase argument in [0, 2 pi) for any k
    return np.exp(2j * np.pi * (np.multiply.outer(k, B) % q) / q).sum(axis=-1)


def prob_point(inst: SamplingInstance, k: int) -> float:
    s = _phase_sum(inst.B.array(), np.int64(k), inst.q)
    return float(abs(s) ** 2 / (inst.q * len(inst.B)))


def prob_points(inst: SamplingInstance, ks) -> np.ndarray:
    """Vectorized :func:`prob_point` over an array of outcomes."""
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size == 0:
        return np.zeros(0)
    s = _phase_sum(inst.B.array(), ks, inst.q)
    return np.abs(s) ** 2 / (inst.q * len(inst.B))


def prob_set(inst: SamplingInstance, T: Iterable[int]) -> float:
    members = T.members if isinstance(T, IndexSet) else tuple(T)
    return float(prob_points(inst, members).sum())


def prob_via_operators(inst: SamplingInstance, T) -> float:
    """``(q/|B|) ||P_T R_B |0>||^2``, computed with the signal operators."""
    if inst.q > MAX_OPERATOR_Q:
        raise SizeLimitError(f"operator path supports q <= {MAX_OPERATOR_Q}")
    T = T if isinstance(T, IndexSet) else IndexSet(inst.q, tuple(T))
    if len(T) == 0:
        return 0.0
    f = delta(inst.q)
    return inst.q / len(inst.B) * norm2(time_limit(band_limit(f, inst.B), T)) ** 2


def v3_futility(q: int, b_size: int) -> float:
    """Version-3 uncertainty bound on prob(T minus {0}) for ``f = |0>``, ``0 in T``.

    With eps = 0 and eta = sqrt((q - |B|)/q) the bound is
    ``(q/|B|)(1 - eta)^2 - |B|/q``; it is negative whenever ``|B| < q``.
    """
    if not 0 < b_size <= q:
        raise ValueError("need 0 < |B| <= q")
    eta = math.sqrt((q - b_size) / q)
    return q / b_size * (1.0 - eta) ** 2 - b_size / q


def prob_point_multi(inst: MultiDimInstance, k: Sequence[int]) -> float:
    k = tuple(int(x) for x in k)
    if len(k) != len(inst.dims):
        raise ValueError("outcome dimension does not match number of registers")
    for kj, (_, qj) in zip(k, inst.dims):
        if not 0 <= kj < qj:
            raise ValueError(f"outcome {k} out of range")
    B = np.asarray(inst.B, dtype=np.int64)
    phase = np.zeros(len(B))
    for j, (_, qj) in enumerate(inst.dims):
        phase += (B[:, j] * k[j] % qj) / qj
    s = np.exp(2j * np.pi * phase).sum()
    return float(abs(s) ** 2 / (len(inst.B) * inst.q_bar))


@dataclass
class Distribution:
    """Exact outcome distribution.

    Outcomes are integers (1-D) or tuples (multi-register). Storage is a dense
    array or, when the support is known to lie in a small set, a dict; both
    answer the same queries.
    """

    shape: tuple[int, ...]
    dense: Optional[np.ndarray] = None
    sparse: Optional[dict] = field(default=None)

    def __post_init__(self):
        if (self.dense is None) == (self.sparse is None):
            raise ValueError("exactly one of dense / sparse storage must be given")

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def _key(self, index):
        if len(self.shape) == 1:
            return int(index[0] if isinstance(index, tuple) else index)
        return tuple(int(i) for i in index)

    def prob(self, index) -> float:
        key = self._key(index)
        if self.sparse is not None:
            return float(self.sparse.get(key, 0.0))
        return float(self.dense[key])

    __getitem__ = prob

    def total(self) -> float:
        if self.sparse is not None:
            return float(sum(self.sparse.values()))
        return float(self.dense.sum())

    def items(self, tol: float = 0.0):
        """``(outcome, probability)`` pairs with probability above ``tol``, in index order."""
        if self.sparse is not None:
            for key in sorted(self.sparse):
                if self.sparse[key] > tol:
                    yield key, float(self.sparse[key])
            return
        flat = self.dense.ravel()
        for i in np.flatnonzero(flat > tol):
            key = int(i) if len(self.shape) == 1 else tuple(int(x) for x in np.unravel_index(i, self.shape))
            yield key, float(flat[i])

    def support(self, tol: float = 1e-10) -> list:
        return [key for key, _ in self.items(tol)]

    def mass(self, outcomes: Iterable) -> float:
        return float(sum(self.prob(o) for o in outcomes))

    def as_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        out = np.zeros(self.shape)
        for key, value in self.sparse.items():
            out[key] = value
        return out


def _check_size(total: int, b_size: int) -> None:
    if total > MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError(f"outcome space {total} exceeds {MAX_DISTRIBUTION_SIZE}")
    if b_size > MAX_PREIMAGE_SIZE:
        raise SizeLimitError(f"|B| = {b_size} exceeds {MAX_PREIMAGE_SIZE}")


def full_distribution(inst: Union[SamplingInstance, MultiDimInstance]) -> Distribution:
    if isinstance(inst, MultiDimInstance):
        return _full_distribution_multi(inst)
    q, B = inst.q, inst.B.array()
    _check_size(q, B.size)
    if q * B.size <= DIRECT_TERMS_LIMIT:
        probs = np.empty(q)
        step = max(1, DIRECT_TERMS_LIMIT // (16 * B.size))
        for lo in range(0, q, step):
            probs[lo:lo + step] = prob_points(inst, np.arange(lo, min(q, lo + step)))
    else:
        # q * ifft of the zero-padded indicator is the plus-sign phase sum
        amp = np.fft.ifft(inst.B.indicator()) * q
        probs = np.abs(amp) ** 2 / (q * B.size)
    return Distribution((q,), dense=probs)


def _full_distribution_multi(inst: MultiDimInstance) -> Distribution:
    shape = inst.shape
    _check_size(math.prod(shape), len(inst.B))
    B = np.asarray(inst.B, dtype=np.int64)
    if len(shape) == 2:
        # amplitude[k1, k2] = sum_b e1[b, k1] e2[b, k2]
        (_, q1), (_, q2) = inst.dims
        e1 = np.exp(2j * np.pi * (np.multiply.outer(B[:, 0], np.arange(q1)) % q1) / q1)
        e2 = np.exp(2j * np.pi * (np.multiply.outer(B[:, 1], np.arange(q2)) % q2) / q2)
        amp = e1.T @ e2
    else:
        grid = np.zeros(shape, dtype=np.complex128)
        np.add.at(grid, tuple(B.T), 1.0)
        amp = np.fft.ifftn(grid) * inst.q_bar
    probs = np.abs(amp) ** 2 / (len(inst.B) * inst.q_bar)
    return Distribution(shape, dense=probs)


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(dist: Distribution, seed) -> Union[int, tuple[int, ...]]:
    """Draw one outcome by inverse-CDF from a seeded PCG64 stream.

    ``seed`` may be an int or an existing ``numpy.random.Generator`` (which
    is advanced).
    """
    rng = make_rng(seed)
    keys, probs = _flat(dist)
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    return keys(min(i, cdf.size - 1))


def sample_many(dist: Distribution, n: int, seed) -> list:
    rng = make_rng(seed)
    keys, probs = _flat(dist)
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    return [keys(int(min(i, cdf.size - 1))) for i in idx]


def _flat(dist: Distribution):
    if dist.sparse is not None:
        items = sorted(dist.sparse.items())
        outcomes = [k for k, _ in items]
        return outcomes.__getitem__, np.array([v for _, v in items])
    flat = dist.dense.ravel()
    if len(dist.shape) == 1:
        return int, flat
    return (lambda i: tuple(int(x) for x in np.unravel_index(i, dist.shape))), flat
