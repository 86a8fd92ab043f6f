"""Case generators for the inequality suites.

Every suite returns a list of plain-dict rows (JSON-ready), each carrying a
``key`` used for deterministic ordering and a boolean ``holds``. The CLI
emits these rows; the acceptance tests count their failures.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from . import dlog as dl
from . import factoring as fa
from . import numtheory as nt
from .bounds import QaupV1Input, QaupV2Input, qaup_v1_evaluate, qaup_v1a_input, qaup_v2_evaluate
from .errors import PreconditionError, SizeLimitError
from .finite_fourier import (
    MAX_OPERATOR_Q,
    IndexSet,
    check_up_v3,
    composed_operator_norms,
    dft,
    support,
    up2_bounds,
)
from .sampling import SamplingInstance, prob_points

SANDWICH_TOL = 1e-9
CHAIN_TOL = 1e-10
EXHAUSTIVE_MAX_Q = 8
MAX_SIGNAL_Q = 1 << 16
ROUNDINGS = ("floor", "round", "ceil")


def _subsets(q: int):
    for mask in range(1, 1 << q):
        yield tuple(i for i in range(q) if mask >> i & 1)


def _random_subset(rng: np.random.Generator, q: int) -> tuple[int, ...]:
    size = int(rng.integers(1, q + 1))
    return tuple(sorted(int(v) for v in rng.choice(q, size=size, replace=False)))


def _check_qs(qs: Sequence[int], limit: int) -> None:
    if not qs:
        raise ValueError("q list must be non-empty")
    for q in qs:
        if q < 1:
            raise ValueError(f"q={q} must be positive")
        if q > limit:
            raise SizeLimitError(f"q={q} exceeds the limit {limit} for this suite")


def sorted_rows(rows: Iterable[dict]) -> list[dict]:
    return sorted(rows, key=lambda row: row["key"])


def failures(rows: Iterable[dict]) -> list[dict]:
    return [row for row in rows if not row["holds"]]


# -- uncertainty principles ---------------------------------------------------


def up1_cases(qs: Sequence[int], trials: int = 100, seed: int = 0, exhaustive_max: int = EXHAUSTIVE_MAX_Q) -> list[dict]:
    """``|supp f| |supp fhat| >= q``: every support for small ``q`` (random
    nonzero values on it), random supports otherwise, and the Dirac combs that
    attain equality."""
    _check_qs(qs, MAX_SIGNAL_Q)
    rng = np.random.default_rng(seed)
    rows = []
    for q in qs:
        supports = list(_subsets(q)) if q <= exhaustive_max else [_random_subset(rng, q) for _ in range(trials)]
        combs = [tuple(range(0, q, d)) for d in range(1, q + 1) if q % d == 0]
        for i, S in enumerate(supports + combs):
            is_comb = i >= len(supports)
            f = np.zeros(q, dtype=np.complex128)
            if is_comb:
                f[list(S)] = 1.0
            else:
                f[list(S)] = rng.standard_normal(len(S)) + 1j * rng.standard_normal(len(S))
            nt_ = len(support(f))
            nb = len(support(dft(f)))
            rows.append({
                "key": [q, i], "q": q, "support": list(S), "comb": is_comb,
                "time_size": nt_, "band_size": nb, "product": nt_ * nb, "holds": nt_ * nb >= q,
            })
    return sorted_rows(rows)


def up2_cases(qs: Sequence[int], trials: int = 100, seed: int = 0, exhaustive_max: int = EXHAUSTIVE_MAX_Q) -> list[dict]:
    """``sqrt(|T||B|)/q <= ||P_T R_B|| <= sqrt(|T||B|/q)``, exhaustive for ``q <= exhaustive_max``."""
    _check_qs(qs, MAX_OPERATOR_Q)
    rng = np.random.default_rng(seed)
    rows = []
    for q in qs:
        if q <= exhaustive_max:
            subs = list(_subsets(q))
            pairs = list(itertools.product(subs, subs))
        else:
            pairs = [(_random_subset(rng, q), _random_subset(rng, q)) for _ in range(trials)]
        sets = [(IndexSet(q, T), IndexSet(q, B)) for T, B in pairs]
        norms = composed_operator_norms(sets, seed=seed)
        for i, ((T, B), value) in enumerate(zip(sets, norms)):
            lo, hi = up2_bounds(T, B)
            rows.append({
                "key": [q, i], "q": q, "T": list(T.members), "B": list(B.members),
                "lower": lo, "norm": float(value), "upper": hi,
                "holds": bool(lo - SANDWICH_TOL <= value <= hi + SANDWICH_TOL),
            })
    return sorted_rows(rows)


def _up3_signal(rng: np.random.Generator, q: int, T: tuple, B: tuple) -> np.ndarray:
    # mix of generic signals and ones nearly concentrated on T and B, so
    # both the vacuous and the informative side of the chain get exercised
    kind = int(rng.integers(0, 3))
    f = rng.standard_normal(q) + 1j * rng.standard_normal(q)
    if kind == 1:
        spec = np.zeros(q, dtype=np.complex128)
        spec[list(B)] = rng.standard_normal(len(B)) + 1j * rng.standard_normal(len(B))
        f = np.fft.ifft(spec) + 0.05 * rng.standard_normal() * f / math.sqrt(q)
    elif kind == 2:
        g = np.zeros(q, dtype=np.complex128)
        g[list(T)] = f[list(T)]
        f = g
    if not np.any(f):
        f[0] = 1.0
    return f


def up3_cases(qs: Sequence[int], trials: int = 1000, seed: int = 0) -> list[dict]:
    """``1 - eps - eta <= ||P_T R_B f||/||f|| <= sqrt(|T||B|/q)`` on random ``(f, T, B)``."""
    _check_qs(qs, MAX_SIGNAL_Q)
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    rows = []
    for q in qs:
        for i in range(trials):
            T, B = _random_subset(rng, q), _random_subset(rng, q)
            f = _up3_signal(rng, q, T, B)
            rep = check_up_v3(f, T, B, tol=CHAIN_TOL)
            rows.append({
                "key": [q, i], "q": q, "T_size": len(T), "B_size": len(B),
                "epsilon": rep.epsilon, "eta": rep.eta, "lower": rep.lower,
                "value": rep.operator_term_norm, "upper": rep.upper, "holds": rep.holds,
            })
    return sorted_rows(rows)


# -- version-1 sampling bound ------------------------------------------------


def _v1_row(key, report, extra: dict) -> dict:
    row = {"key": key, **extra, **report.to_dict()}
    row.pop("parameters")
    row.update(report.parameters)
    # only the implication "condition => inequality" is claimed
    row["holds"] = bool(report.inequality_holds or not report.condition_holds)
    return row


def qaup1_tiny_cases(p_max: int = 6, q_max: int = 12) -> list[dict]:
    """All ``p <= p_max``, ``p < q <= q_max``, nonempty ``Bbar``, ``k`` and rounding
    kinds, with ``delta_bar = sum |c|``."""
    if p_max > 10 or q_max > 64:
        raise SizeLimitError("tiny grid is limited to p <= 10, q <= 64")
    rows = []
    for p in range(1, p_max + 1):
        for q in range(p + 1, q_max + 1):
            for bar_b in _subsets(p):
                delta_bar = sum(bar_b)
                for k in range(p):
                    for kind in ROUNDINGS:
                        try:
                            inp = qaup_v1a_input(kind, k, p, q, bar_b, delta_bar)
                        except ValueError:
                            continue  # ceiling rounded out of Z_q
                        rep = qaup_v1_evaluate(inp)
                        rows.append(_v1_row([p, q, list(bar_b), k, kind], rep, {"kind": kind, "bar_b": list(bar_b)}))
    return sorted_rows(rows)


def valid_r_primes(r: int) -> list[int]:
    """``2r < r' < 4r`` for which a power of two lies strictly inside ``(r'^2, 2r'^2)``."""
    return [rp for rp in range(2 * r + 1, 4 * r) if nt.power_of_two_strictly_between(rp * rp, 2 * rp * rp)]


def qaup1_factoring_cases(rs: Sequence[int] = (3, 4, 5, 6), s_mins: Sequence[float] = (fa.DEFAULT_S_MIN, 10.0, 20.0)) -> list[dict]:
    """The factoring instances: ``p = rt``, ``Bbar = {0, r, ..., r(t-1)}``,
    ``k = jt`` with ``gcd(j, r) = 1``, floor rounding, ``delta = r t^2 / 2``, every shift."""
    if not rs:
        raise ValueError("r list must be non-empty")
    rows = []
    for r in rs:
        if r < 2:
            raise ValueError("r must be >= 2")
        for r_prime in valid_r_primes(r):
            for s_min in s_mins:
                par = fa.choose_parameters(r, r_prime, s_min)
                t, p, q = par.t, par.p, par.q
                bar_b = tuple(range(0, p, r))
                for j in range(1, r):
                    if math.gcd(j, r) != 1:
                        continue
                    k = j * t
                    for a in range(r):
                        inp = QaupV1Input(p, q, k, (q * k) // p, bar_b, delta=r * t * t / 2, a=a)
                        rep = qaup_v1_evaluate(inp)
                        rows.append(_v1_row([r, r_prime, q, j, a], rep, {"r": r, "r_prime": r_prime, "t": t, "j": j}))
    return sorted_rows(rows)


# -- factoring certificates --------------------------------------------------


def factoring_certificate_cases(rs: Sequence[int] = (3, 4, 5, 6), s_min: float = fa.DEFAULT_S_MIN) -> list[dict]:
    """Exact ``prob(T', p', q)`` against the aggregate bound for every valid ``r'``
    and shift, with the ``phi(r)/r`` floor turning it into an explicit constant."""
    rows = []
    for r in rs:
        if r < 3:
            raise ValueError("certificates are run for r >= 3")
        for r_prime in valid_r_primes(r):
            par = fa.choose_parameters(r, r_prime, s_min)
            for a in range(r):
                cert = fa.factoring_certificate(par, a)
                scale = r * cert.bound.per_k  # depends on s and t only
                floor = fa.phi_ratio_floor(r) * scale
                rows.append({
                    "key": [r, r_prime, a], "r": r, "r_prime": r_prime, "a": a,
                    "p_prime": par.p_prime, "p": par.p, "q": par.q, "t": par.t, "s": par.s,
                    "shape": cert.shape, "per_k_bound": cert.bound.per_k,
                    "min_exact_per_k": min(cert.exact_per_k), "aggregate_bound": cert.bound.aggregate,
                    "exact_target": cert.exact_target, "phi_ratio_floor": fa.phi_ratio_floor(r),
                    "constant": scale, "explicit_floor": floor,
                    "intermediate_holds": cert.intermediate_holds,
                    "holds": bool(cert.holds and cert.bound.aggregate >= floor > 0),
                })
    return sorted_rows(rows)


def easy_factoring_cases(r_max: int = 12, t_max: int = 16) -> list[dict]:
    rows = []
    for r in range(1, r_max + 1):
        for t in range(1, t_max + 1):
            rep = fa.easy_case_check(r, t)
            rows.append({
                "key": [r, t], "r": r, "t": t, "max_point_error": rep.max_point_error,
                "prob_target": rep.prob_target, "expected": rep.expected, "holds": rep.holds,
            })
    return sorted_rows(rows)


# -- discrete log -------------------------------------------------------------


def smallest_generator(p: int) -> int:
    for g in range(2, p):
        if dl.is_generator(g, p):
            return g
    raise ValueError(f"no generator found mod {p}")


def _dlog_group(p: int, r: int | None):
    g = smallest_generator(p)
    r = (p - 1) // 2 + 1 if r is None else r % (p - 1)
    return g, nt.mod_pow(g, r, p), r


def dlog_easy_cases(ps: Sequence[int] = (11, 13, 17, 23), r: int | None = None) -> list[dict]:
    rows = []
    for p in ps:
        g, x, rr = _dlog_group(p, r)
        for k in range(p - 1):
            rep = dl.easy_case_dlog_check(p, g, x, k)
            rows.append({
                "key": [p, k], "p": p, "g": g, "x": x, "r": rr, "k": k,
                "max_pair_error": max(abs(v - 1 / (p - 1)) for v in rep.good_pair_probabilities),
                "max_off_line": rep.max_off_line, "prob_target": rep.prob_target,
                "expected": rep.expected_target, "holds": rep.holds,
            })
    return sorted_rows(rows)


def _check_dlog_q(q: int) -> None:
    if q * q > dl.MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError(f"q={q} gives q^2 outcomes beyond {dl.MAX_DISTRIBUTION_SIZE}")


def dlog_certificate_cases(ps: Sequence[int] = (11, 13, 17, 23), s_mins: Sequence[float] = (dl.DEFAULT_S_MIN,), r: int | None = None) -> list[dict]:
    """Exact padded mass on the floor images of the good pairs, per third-register value,
    against ``phi(p-1) (1 - 3 pi/s)^2 / (s^2 (p-1))``."""
    rows = []
    for p in ps:
        g, x, rr = _dlog_group(p, r)
        for s_min in s_mins:
            q = dl.choose_q(p, s_min)
            _check_dlog_q(q)
            s = q / (p - 1)
            targets = dl.padded_target_pairs(p, rr, q)
            bound = dl.eq8_aggregate_bound(p, s)
            for k in range(p - 1):
                dist = dl.padded_dlog_distribution(p, g, x, q, k)
                exact = dist.mass(targets)
                rows.append({
                    "key": [p, q, k], "p": p, "g": g, "x": x, "r": rr, "q": q, "s": s, "k": k,
                    "aggregate_bound": bound, "exact_target": exact, "margin": exact - bound,
                    "holds": bool(exact > bound),
                })
    return sorted_rows(rows)


def qaup2_cases(ps: Sequence[int] = (11, 13, 17), s_mins: Sequence[float] = (dl.DEFAULT_S_MIN,), r: int | None = None) -> list[dict]:
    """Version-2 bound for each good pair and third-register value, with
    ``delta = 3 (p-1)^2/(2q)``; also records the exact ``delta`` floor."""
    rows = []
    for p in ps:
        g, x, rr = _dlog_group(p, r)
        n = p - 1
        for s_min in s_mins:
            q = dl.choose_q(p, s_min)
            _check_dlog_q(q)
            for k in range(n):
                B = dl.dlog_preimage_set(p, g, x, k)
                for c, d in dl.target_pairs(p, rr):
                    inp = QaupV2Input(((n, q), (n, q)), (c, d), ((q * c) // n, (q * d) // n), B, 3 * n * n / (2 * q))
                    rep = qaup_v2_evaluate(inp)
                    row = {"key": [p, q, k, c], "r": rr, "min_delta": float(inp.min_delta()), **rep.to_dict()}
                    row.pop("parameters")
                    row.update({"p": p, "q": q, "k": k, "pair": [c, d], "delta": rep.parameters["delta"]})
                    row["holds"] = bool(rep.inequality_holds or not rep.condition_holds)
                    rows.append(row)
    return sorted_rows(rows)



# -- bound tables --------------------------------------------------------------


def factor_bound_rows(r: int, t: int, s: float) -> list[dict]:
    """Bound tables for ``p = rt``, ``q = s p``: the ``t`` form (``Bbar`` of ``t``
    points) and, when ``4r <= t < 32r``, the ``t+1`` form."""
    if r < 2 or t < 1:
        raise ValueError("need r >= 2 and t >= 1")
    if not fa.eq51_ok(s):
        raise PreconditionError(f"s={s} must exceed pi so that 1 - pi/s > 0")
    p = r * t
    q = s * p
    if abs(q - round(q)) > 1e-9:
        raise ValueError(f"q = s r t = {q} must be an integer")
    q = int(round(q))
    if q > dl.MAX_DISTRIBUTION_SIZE:
        raise SizeLimitError(f"q={q} exceeds {dl.MAX_DISTRIBUTION_SIZE}")
    target = fa.padded_target_set(r, p, q)
    rows = []
    shapes = ["t"] + (["t+1"] if 4 * r <= t < 32 * r else [])
    for shape in shapes:
        size = t if shape == "t" else t + 1
        B = IndexSet(q, tuple(range(0, r * size, r)))
        inst = SamplingInstance(max(p, r * (size - 1) + 1), q, B)
        exact = prob_points(inst, target.members)
        try:
            bound = fa.general_case_bound(r, t, s, shape)
            per_k, agg, ok521 = bound.per_k, bound.aggregate, True
        except PreconditionError:
            per_k = agg = float("nan")
            ok521 = False
        rows.append({
            "key": [r, t, shape], "kind": "factor", "shape": shape, "r": r, "t": t, "s": s,
            "p": p, "q": q, "b_size": size, "lower_bound": per_k, "exact_min": float(exact.min()),
            "aggregate_bound": agg, "exact_aggregate": float(exact.sum()),
            "margin": float(exact.min()) - per_k, "slack_ok": fa.eq51_ok(s), "gap_ok": ok521,
            "holds": bool(ok521 and exact.min() >= per_k - CHAIN_TOL and exact.sum() >= agg - CHAIN_TOL),
        })
    return rows


def dlog_bound_rows(p: int, q: int, g: int | None = None, x: int | None = None, k: int = 0) -> list[dict]:
    """Per-pair rows (version-2 bound and exact probability) plus one aggregate row."""
    g = smallest_generator(p) if g is None else g
    x = nt.mod_pow(g, (p - 1) // 2 + 1, p) if x is None else x
    dl._check_group(p, g, x)
    _check_dlog_q(q)
    n = p - 1
    s = q / n
    if s <= 3 * math.pi:
        raise PreconditionError(f"s = q/(p-1) = {s:.4f} must exceed 3 pi")
    r = dl.discrete_log_oracle(g, x, p)
    dist = dl.padded_dlog_distribution(p, g, x, q, k)
    per_pair = dl.eq8_bound(p, s)
    rows = []
    for c, d in dl.target_pairs(p, r):
        rep = dl.qaup_v2_report(p, g, x, q, k, (c, d))
        exact = dist.prob(((q * c) // n, (q * d) // n))
        rows.append({
            "key": [p, q, k, 0, c], "kind": "pair", "p": p, "q": q, "s": s, "g": g, "x": x, "r": r, "k": k,
            "pair": [c, d], "lower_bound": per_pair, "v2_lower_bound": rep.lower_bound,
            "exact": exact, "margin": exact - per_pair, "condition_holds": rep.condition_holds,
            "holds": bool(rep.inequality_holds and exact >= per_pair),
        })
    agg = dl.eq8_aggregate_bound(p, s)
    exact_agg = dist.mass(dl.padded_target_pairs(p, r, q))
    rows.append({
        "key": [p, q, k, 1, 0], "kind": "aggregate", "p": p, "q": q, "s": s, "g": g, "x": x, "r": r, "k": k,
        "lower_bound": agg, "exact": exact_agg, "margin": exact_agg - agg,
        "condition_holds": all(row["condition_holds"] for row in rows),
        "holds": bool(exact_agg > agg),
    })
    return sorted_rows(rows)
