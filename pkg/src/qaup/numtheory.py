"""Integer utilities used by the factoring and discrete-log pipelines.

All arithmetic is on Python integers, so intermediate products never wrap.
Pipelines still cap their inputs (``MAX_MODULUS``) to keep the classical
simulation at desk scale.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .errors import NotCoprimeError, SizeLimitError

MAX_MODULUS = 2**31
MAX_POWER_OF_TWO = 2**63


def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise ValueError("gcd expects nonnegative integers")
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def mod_pow(x: int, e: int, m: int) -> int:
    """Return ``x**e mod m`` in ``[0, m)`` by square-and-multiply."""
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    return pow(x, e, m)


def multiplicative_order(x: int, m: int) -> int:
    """Least ``r >= 1`` with ``x**r == 1 (mod m)``, by brute force.

    This is the ground-truth oracle for the factoring tests, not an
    efficient algorithm.
    """
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return 1
    if math.gcd(x, m) != 1:
        raise NotCoprimeError(f"gcd({x}, {m}) != 1")
    x %= m
    value, r = x, 1
    while value != 1:
        value = value * x % m
        r += 1
    return r


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization ``{prime: exponent}``."""
    if n < 1:
        raise ValueError("n must be positive")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("euler_phi is defined for n >= 1")
    result = n
    for prime in factorize(n):
        result -= result // prime
    return result


def is_probable_prime(n: int) -> bool:
    """Trial-division primality test (adequate below ``MAX_MODULUS``)."""
    if n < 2:
        return False
    return factorize(n) == {n: 1}


def convergents(target: Fraction) -> list[Fraction]:
    """All continued-fraction convergents of a nonnegative rational, in order.

    The last entry equals ``target`` in lowest terms.
    """
    target = Fraction(target)
    if target < 0:
        raise ValueError("target must be nonnegative")
    num, den = target.numerator, target.denominator
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    out = []
    while den:
        a, rem = divmod(num, den)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        out.append(Fraction(h, k))
        num, den = den, rem
    return out


def recover_denominator(target: Fraction, bound: int) -> Optional[int]:
    """Denominator ``r <= bound`` of the closest convergent ``j/r`` of ``target``
    with ``|target - j/r| < 1/(2 r^2)``.

    Convergents with numerator 0 are rejected. Returns ``None`` when no
    convergent qualifies.
    """
    target = Fraction(target)
    best = None
    for conv in convergents(target):
        r = conv.denominator
        if r > bound:
            break
        if conv.numerator == 0:
            continue
        if abs(target - conv) < Fraction(1, 2 * r * r):
            # later convergents are strictly closer
            best = r
    return best


def next_power_of_two_at_least(x: int) -> int:
    if x < 1:
        raise ValueError("x must be >= 1")
    value = 1 << (x - 1).bit_length()
    if value > MAX_POWER_OF_TWO:
        raise SizeLimitError(f"2^l >= {x} exceeds 64-bit range")
    return value


def power_of_two_strictly_between(lo: int, hi: int) -> Optional[int]:
    """Some ``2^l`` with ``lo < 2^l < hi``, or ``None``."""
    value = next_power_of_two_at_least(lo + 1)
    return value if value < hi else None


def mod_inverse(x: int, m: int) -> int:
    if math.gcd(x, m) != 1:
        raise NotCoprimeError(f"{x} is not invertible mod {m}")
    return pow(x, -1, m)
