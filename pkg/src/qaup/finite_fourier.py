"""Finite Fourier analysis on Z_q: transforms, time/band-limiting operators and
the three finite uncertainty principles.

Conventions: the forward transform carries the minus sign,
``fhat(y) = sum_x f(x) exp(-2 pi i x y / q)``, and is unnormalized; the
inverse carries ``1/q``. Signals are 1-D complex numpy arrays whose length
is ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import ModulusMismatchError, SizeLimitError

SUPPORT_TOL = 1e-10
MAX_OPERATOR_Q = 1024
POWER_SQUARINGS = 4


@dataclass(frozen=True)
class IndexSet:
    """Sorted, duplicate-free subset of Z_q."""

    q: int
    members: tuple[int, ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("ambient modulus q must be >= 1")
        members = tuple(sorted(set(int(m) for m in self.members)))
        if members and (members[0] < 0 or members[-1] >= self.q):
            raise ValueError(f"index set members must lie in [0, {self.q})")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, q: int) -> "IndexSet":
        return cls(q, tuple(range(q)))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item) -> bool:
        return item in set(self.members)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.q)
        out[list(self.members)] = 1.0
        return out

    def array(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.int64)


IndexLike = Union[IndexSet, Iterable[int]]


def as_index_set(obj: IndexLike, q: int) -> IndexSet:
    if isinstance(obj, IndexSet):
        if obj.q != q:
            raise ModulusMismatchError(f"index set lives on Z_{obj.q}, signal on Z_{q}")
        return obj
    return IndexSet(q, tuple(obj))


def _require_nonempty(*sets: IndexSet) -> None:
    for s in sets:
        if len(s) == 0:
            raise ValueError("time and band sets must be nonempty")


def as_signal(f) -> np.ndarray:
    arr = np.asarray(f, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("a signal is a nonempty 1-D array")
    return arr


def dft_direct(f) -> np.ndarray:
    """O(q^2) double loop; the reference every faster path must match."""
    f = as_signal(f)
    q = f.size
    out = np.empty(q, dtype=np.complex128)
    for y in range(q):
        acc = 0j
        for x in range(q):
            # reduce xy mod q first so the phase argument stays small
            acc += f[x] * np.exp(-2j * np.pi * ((x * y) % q) / q)
        out[y] = acc
    return out


def dft(f) -> np.ndarray:
    return np.fft.fft(as_signal(f))


def idft(fhat) -> np.ndarray:
    return np.fft.ifft(as_signal(fhat))


def delta(q: int, index: int = 0) -> np.ndarray:
    """Basis vector |index> in C^q."""
    out = np.zeros(q, dtype=np.complex128)
    out[index] = 1.0
    return out


def support(f, tol: float = SUPPORT_TOL) -> IndexSet:
    f = as_signal(f)
    return IndexSet(f.size, tuple(np.flatnonzero(np.abs(f) > tol).tolist()))


def time_limit(f, T: IndexLike) -> np.ndarray:
    f = as_signal(f)
    T = as_index_set(T, f.size)
    return f * T.indicator()


def band_limit(f, B: IndexLike) -> np.ndarray:
    f = as_signal(f)
    B = as_index_set(B, f.size)
    return idft(dft(f) * B.indicator())


def norm2(f) -> float:
    return float(np.linalg.norm(as_signal(f)))


def _reduced_operator(T: IndexSet, B: IndexSet) -> np.ndarray:
    # P_T R_B = (P_T W) W^H with W having orthonormal columns exp(2 pi i x c/q)/sqrt(q),
    # so its singular values are those of the |T| x |B| block below.
    q = T.q
    t = T.array()[:, None]
    c = B.array()[None, :]
    return np.exp(2j * np.pi * ((t * c) % q) / q) / math.sqrt(q)


def _matrix_powers(grams: np.ndarray, squarings: int) -> np.ndarray:
    """``G^(2^squarings)`` for each matrix, rescaled by its trace after every squaring."""
    h = grams
    for _ in range(squarings):
        h = h @ h
        tr = np.real(np.einsum("mii->m", h))
        h = h / np.where(tr > 0, tr, 1.0)[:, None, None]
    return h


def _batched_power_iteration(grams: np.ndarray, start: np.ndarray, max_iter: int, rtol: float, iterate=None):
    """Power iteration on a stack of Hermitian PSD matrices sharing one start vector.

    ``iterate`` (default ``grams``) is the stack actually applied each step;
    passing a power of ``grams`` keeps the eigenvectors but widens the
    spectral gap. The Rayleigh quotient is always taken with ``grams``.

    Stops once the Rayleigh quotient has settled: its last change, and the
    geometric tail extrapolated from the last two changes, are both within
    ``rtol`` relative. A repeated top eigenvalue therefore converges as fast
    as a simple one. Returns the Rayleigh quotients (the last iterate where
    ``max_iter`` ran out) and NaN where an iterate fell into the null space.
    """
    iterate = grams if iterate is None else iterate
    m = grams.shape[0]
    result = np.full(m, np.nan)
    active = np.arange(m)
    v = np.broadcast_to(start / np.linalg.norm(start), (m, start.size)).copy()
    lam_prev = np.full(m, np.inf)
    step_prev = np.full(m, np.inf)
    for _ in range(max_iter):
        if active.size == 0:
            break
        w = np.einsum("mij,mj->mi", iterate[active], v)
        w_norm = np.linalg.norm(w, axis=1)
        gv = w if iterate is grams else np.einsum("mij,mj->mi", grams[active], v)
        lam = np.real(np.einsum("mi,mi->m", v.conj(), gv))
        scale = np.maximum(np.abs(lam), np.finfo(float).tiny)
        step = np.abs(lam - lam_prev)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(step_prev > 0, step / step_prev, 0.0)
            tail = np.where(ratio < 1, step * ratio / (1 - ratio), np.inf)
        dead = w_norm == 0.0
        done = ~dead & (
            (step <= 4 * np.finfo(float).eps * scale)
            | ((step <= rtol * scale) & (tail <= rtol * scale))
        )
        result[active[done]] = lam[done]
        keep = ~(dead | done)
        result[active[keep]] = lam[keep]
        active = active[keep]
        lam_prev, step_prev = lam[keep], step[keep]
        v = w[keep] / w_norm[keep, None]
    return result


def composed_operator_norms(pairs, *, rtol: float = 1e-9, max_iter: int = 10_000, seed: int = 0) -> np.ndarray:
    """Largest singular value of ``P_T R_B`` for every ``(T, B)`` in ``pairs``.

    Power iteration runs on the smaller Gram matrix ``G`` of the operator
    (stepping with ``G^16`` for a wider gap, Rayleigh quotients from ``G``), starting
    from the all-ones vector and again from a seeded random start; the larger
    value is kept. Starts that fall into the null space are retried from
    further seeded random vectors.
    """
    pairs = list(pairs)
    out = np.empty(len(pairs))
    groups: dict[int, list[int]] = {}
    grams = []
    for i, (T, B) in enumerate(pairs):
        if T.q != B.q:
            raise ModulusMismatchError("T and B must share the same modulus")
        if T.q > MAX_OPERATOR_Q:
            raise SizeLimitError(f"dense operator path supports q <= {MAX_OPERATOR_Q}")
        _require_nonempty(T, B)
        block = _reduced_operator(T, B)
        gram = block.conj().T @ block if len(B) <= len(T) else block @ block.conj().T
        grams.append(gram)
        groups.setdefault(gram.shape[0], []).append(i)
    for n, idx in groups.items():
        stack = np.stack([grams[i] for i in idx])
        rng = np.random.default_rng(seed)
        # the all-ones vector can be (nearly) orthogonal to the top
        # eigenvector, so a seeded random start always runs as well
        powered = _matrix_powers(stack, POWER_SQUARINGS)
        best = _batched_power_iteration(stack, np.ones(n, dtype=np.complex128), max_iter, rtol, powered)
        start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        best = np.fmax(best, _batched_power_iteration(stack, start, max_iter, rtol, powered))
        for _ in range(8):
            stuck = np.flatnonzero(np.isnan(best))
            if stuck.size == 0:
                break
            start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            best[stuck] = _batched_power_iteration(stack[stuck], start, max_iter, rtol, powered[stuck])
        if np.isnan(best).any():
            raise RuntimeError("power iteration fell into the null space from every start")
        out[idx] = np.sqrt(np.maximum(best, 0.0))
    return out


def composed_operator_norm(
    T: IndexSet,
    B: IndexSet,
    *,
    rtol: float = 1e-9,
    max_iter: int = 10_000,
    seed: int = 0,
) -> float:
    """Operator norm ``||P_T R_B||`` (see :func:`composed_operator_norms`)."""
    return float(composed_operator_norms([(T, B)], rtol=rtol, max_iter=max_iter, seed=seed)[0])


def up2_bounds(T: IndexSet, B: IndexSet) -> tuple[float, float]:
    """``(sqrt(|T||B|)/q, sqrt(|T||B|/q))``, the version-2 sandwich."""
    q = T.q
    prod = len(T) * len(B)
    return math.sqrt(prod) / q, math.sqrt(prod / q)


def _nonzero_norm(f: np.ndarray) -> float:
    n = np.linalg.norm(f)
    if n == 0.0:
        raise ValueError("signal must be nonzero")
    return float(n)


def concentration_epsilon(f, T: IndexLike) -> float:
    """Smallest eps with ``||f - P_T f|| <= eps ||f||``."""
    f = as_signal(f)
    n = _nonzero_norm(f)
    return norm2(f - time_limit(f, T)) / n


def band_eta(f, B: IndexLike) -> float:
    """Smallest eta for which f is eta-band-limited to B.

    The optimal approximant is the orthogonal projection ``R_B f``.
    """
    f = as_signal(f)
    n = _nonzero_norm(f)
    return norm2(f - band_limit(f, B)) / n


def check_up_v1(f, tol: float = SUPPORT_TOL) -> bool:
    f = as_signal(f)
    _nonzero_norm(f)
    return len(support(f, tol)) * len(support(dft(f), tol)) >= f.size


@dataclass(frozen=True)
class UncertaintyReport:
    epsilon: float
    eta: float
    lower: float
    operator_term_norm: float
    upper: float
    holds: bool


def check_up_v3(f, T: IndexLike, B: IndexLike, tol: float = 1e-10) -> UncertaintyReport:
    """Evaluate ``1 - eps - eta <= ||P_T R_B f|| / ||f|| <= sqrt(|T||B|/q)``."""
    f = as_signal(f)
    q = f.size
    T = as_index_set(T, q)
    B = as_index_set(B, q)
    _require_nonempty(T, B)
    n = _nonzero_norm(f)
    eps = concentration_epsilon(f, T)
    eta = band_eta(f, B)
    term = norm2(time_limit(band_limit(f, B), T)) / n
    lower = 1.0 - eps - eta
    upper = math.sqrt(len(T) * len(B) / q)
    holds = lower <= term + tol and term <= upper + tol
    return UncertaintyReport(eps, eta, lower, term, upper, holds)
