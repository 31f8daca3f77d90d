"""Exact real-root counting via Sturm chains over integer arithmetic.

Serves as the oracle against which the floating companion-matrix counts are
checked.  Polynomials are lists of big integers (ascending powers); the
remainder sequence uses pseudo-division with content stripping so every
intermediate stays an exact integer polynomial.  Counts include multiplicity:
the square-free part is counted through the chain and deeper layers are
recovered by recursing on gcd(f, f').
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd

from .errors import DegreeTooLargeError, ZeroPolynomialError

MAX_DEGREE = 64


def _trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _content(p: list[int]) -> int:
    g = 0
    for c in p:
        g = _int_gcd(g, abs(c))
    return g or 1


def _primitive(p: list[int]) -> list[int]:
    g = _content(p)
    return [c // g for c in p]


def _derivative(p: list[int]) -> list[int]:
    return [i * c for i, c in enumerate(p)][1:]


def _pseudo_rem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b scaled so the sign matches lc(b)^even * rem.

    Multiplies a by lc(b)^(2*ceil(k/2)) before synthetic division, an even
    power, so the true remainder's sign is preserved exactly.
    """
    da, db = len(a) - 1, len(b) - 1
    lc = b[-1]
    k = da - db + 1
    if k % 2 == 1:
        k += 1
    r = [c * lc**k for c in a]
    for i in range(da, db - 1, -1):
        if r[i] == 0:
            continue
        q, rem = divmod(r[i], lc)
        assert rem == 0
        for j in range(db + 1):
            r[i - db + j] -= q * b[j]
    return _trim(r[:db])


def _sturm_chain(p: list[int]) -> list[list[int]]:
    chain = [_primitive(list(p))]
    d = _trim(_derivative(p))
    if d:
        chain.append(_primitive(d))
    while len(chain[-1]) > 1:
        r = _pseudo_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append(_primitive([-c for c in r]))
    return chain


def _poly_gcd(a: list[int], b: list[int]) -> list[int]:
    a, b = _primitive(_trim(list(a))), _primitive(_trim(list(b)))
    if len(a) < len(b):
        a, b = b, a
    while b:
        if len(b) == 1:
            return [1]
        r = _pseudo_rem(a, b)
        a, b = b, (_primitive(r) if r else [])
    return a if a else [1]


def _poly_div_exact(a: list[int], b: list[int]) -> list[int]:
    """a / b over the rationals, result cleared back to primitive ints."""
    fa = [Fraction(c) for c in a]
    db = len(b) - 1
    out = [Fraction(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        q = fa[i] / b[-1]
        out[i - db] = q
        for j in range(db + 1):
            fa[i - db + j] -= q * b[j]
    den = 1
    for c in out:
        den = den * c.denominator // _int_gcd(den, c.denominator)
    return _primitive([int(c * den) for c in out])


def _eval_sign(p: list[int], x) -> int:
    """Sign of p at x; x is a Fraction, int, or +-inf string marker."""
    if x == "-inf":
        s = 1 if p[-1] > 0 else -1
        return s if (len(p) - 1) % 2 == 0 else -s
    if x == "+inf":
        return 1 if p[-1] > 0 else -1
    if isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1):
        xi = int(x)
        acc = 0
        for c in reversed(p):
            acc = acc * xi + c
        return (acc > 0) - (acc < 0)
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return (acc > 0) - (acc < 0)


def _variations(chain: list[list[int]], x) -> int:
    signs = [s for s in (_eval_sign(p, x) for p in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _eval_zero(p: list[int], x) -> bool:
    return _eval_sign(p, x) == 0


def _deflate(p: list[int], x: Fraction) -> tuple[list[int], int]:
    """Divide out (t - x)^k exactly; returns (deflated, k)."""
    k = 0
    while len(p) > 1 and _eval_zero(p, x):
        acc = Fraction(p[-1])
        res = [Fraction(0)] * (len(p) - 1)
        for i in range(len(p) - 2, -1, -1):
            res[i] = acc
            acc = Fraction(p[i]) + acc * x
        d = 1
        for c in res:
            d = d * c.denominator // _int_gcd(d, c.denominator)
        p = _primitive([int(c * d) for c in res])
        k += 1
    return p, k


def _count_distinct_open(p: list[int], lo, hi) -> int:
    """Distinct roots of square-free p in the open interval; endpoints must
    not be roots of p."""
    chain = _sturm_chain(p)
    return _variations(chain, lo) - _variations(chain, hi)


def _square_free(p: list[int]) -> tuple[list[int], list[int]]:
    """Returns (square-free part, gcd(p, p'))."""
    g = _poly_gcd(p, _derivative(p))
    if len(g) == 1:
        return p, []
    return _poly_div_exact(p, g), g


def _count_mult_open(p: list[int], lo, hi) -> int:
    """Roots in the open interval counted with multiplicity (endpoints are
    assumed not to be roots of p)."""
    if len(p) <= 1:
        return 0
    sf, g = _square_free(p)
    c = _count_distinct_open(sf, lo, hi)
    if g:
        c += _count_mult_open(g, lo, hi)
    return c


def sturm_count(int_coeffs, interval) -> int:
    """Exact count (with multiplicity) of real roots in an interval.

    Coefficients must be integers (ascending powers); the interval carries
    rational or infinite endpoints with open/closed flags.  Degree is guarded
    at MAX_DEGREE to bound exact-arithmetic cost.
    """
    p = _trim([int(c) for c in int_coeffs])
    if not p:
        raise ZeroPolynomialError("all coefficients are zero")
    if len(p) - 1 > MAX_DEGREE:
        raise DegreeTooLargeError(f"degree {len(p)-1} exceeds guard {MAX_DEGREE}")
    if len(p) == 1:
        return 0

    lo_inf = interval.lo == float("-inf")
    hi_inf = interval.hi == float("inf")
    lo = "-inf" if lo_inf else Fraction(interval.lo)
    hi = "+inf" if hi_inf else Fraction(interval.hi)
    if not lo_inf and not hi_inf and lo > hi:
        return 0

    total = 0
    mult_lo = mult_hi = 0
    if not lo_inf:
        p, mult_lo = _deflate(p, lo)
    if not hi_inf and (lo_inf or hi != lo):
        p, mult_hi = _deflate(p, hi)
    elif not hi_inf:
        mult_hi = mult_lo

    if not lo_inf and not hi_inf and lo == hi:
        if interval.closed_lo and interval.closed_hi:
            return mult_lo
        return 0

    total += _count_mult_open(p, lo, hi)
    if interval.closed_lo:
        total += mult_lo
    if interval.closed_hi:
        total += mult_hi
    return total
