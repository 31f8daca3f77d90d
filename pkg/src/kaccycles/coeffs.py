"""Deterministic coefficient sequences c_{m,n} for the three weight schemes.

The perturbed-center scheme carries the variance

    c_m^2 = (pi/2) * sum_{l=0}^{m} [ ((2m-2l+1)!!(2l-1)!! / (2m+2)!!)^2
                                   + ((2m-2l-1)!!(2l+1)!! / (2m+2)!!)^2 ],

the Lienard scheme c_m^2 = pi * ((2m+1)!!/(2m+2)!!)^2, and the power-law
scheme c_m = m^rho.  All three behave like m^(2*rho) with rho = -1/2 for the
first two, i.e. m * c_m^2 -> 1.

Writing A_l = (2m-2l+1)!!(2l-1)!!/(2m+2)!!, the second squared ratio in the
center sum is A_{m-l}, so c_m^2 = pi * sum_l A_l^2.  The A_l^2 decay super-
geometrically away from the ends l=0 and l=m (term ratio ((2l+1)/(2m-2l+1))^2),
so the sum is evaluated from both ends with early termination; double
factorials go through log-gamma so that m up to 10^6 and beyond cannot
overflow.  An exact big-rational oracle covers small m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

_LOG2 = math.log(2.0)

# Full summation below this m; two-ended truncated summation above.
_SMALL_M = 80
# Terms kept from each end of the sum for large m (relative tail < 1e-25).
_END_TERMS = 12


@dataclass(frozen=True)
class CoeffScheme:
    """Which deterministic weight family c_{m,n} to use.

    kind is one of "center", "lienard", "power"; rho is the power-law
    exponent (only for kind="power").
    """

    kind: str
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in ("center", "lienard", "power"):
            raise DomainError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "power":
            if self.rho is None or not math.isfinite(self.rho):
                raise DomainError("power-law scheme requires a finite rho")
        elif self.rho is not None:
            raise DomainError(f"{self.kind} scheme carries no parameter")

    @staticmethod
    def perturbed_center() -> "CoeffScheme":
        return CoeffScheme("center")

    @staticmethod
    def lienard() -> "CoeffScheme":
        return CoeffScheme("lienard")

    @staticmethod
    def power_law(rho: float) -> "CoeffScheme":
        return CoeffScheme("power", float(rho))

    @staticmethod
    def parse(text: str) -> "CoeffScheme":
        """Parse "center", "lienard", or "power:RHO"."""
        t = text.strip().lower()
        if t in ("center", "perturbed-center", "perturbed_center"):
            return CoeffScheme.perturbed_center()
        if t == "lienard":
            return CoeffScheme.lienard()
        if t.startswith("power:"):
            return CoeffScheme.power_law(float(t.split(":", 1)[1]))
        raise DomainError(f"cannot parse scheme {text!r}")

    @property
    def effective_rho(self) -> float:
        """Power-law exponent governing the asymptotic regime."""
        return -0.5 if self.kind in ("center", "lienard") else float(self.rho)

    def label(self) -> str:
        if self.kind == "power":
            return f"power:{self.rho:g}"
        return self.kind


@dataclass
class CoeffVector:
    """Coefficients c_{0,n} .. c_{n,n} of one scheme at degree n."""

    n: int
    values: np.ndarray
    scheme: CoeffScheme

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n + 1,):
            raise DomainError("coefficient vector must have length n+1")
        if not np.all(np.isfinite(self.values)) or not np.all(self.values > 0):
            raise DomainError("coefficients must be finite and strictly positive")


# ---------------------------------------------------------------------------
# double factorials
# ---------------------------------------------------------------------------

def log_double_factorial(k: int) -> float:
    """ln(k!!) with the conventions (-1)!! = 0!! = 1.

    Even k = 2j:  k!! = 2^j j!;  odd k = 2j+1:  k!! = (2j+1)!/(2^j j!).
    """
    if k < -1:
        raise DomainError("double factorial needs k >= -1")
    if k <= 0:
        return 0.0
    if k % 2 == 0:
        j = k // 2
        return j * _LOG2 + math.lgamma(j + 1)
    j = (k - 1) // 2
    return math.lgamma(k + 2) - (j + 1) * _LOG2 - math.lgamma(j + 2)


def log_double_factorial_many(k: np.ndarray) -> np.ndarray:
    """Vectorized ln(k!!); k >= -1 entrywise."""
    k = np.asarray(k, dtype=float)
    if np.any(k < -1):
        raise DomainError("double factorial needs k >= -1")
    out = np.zeros_like(k)
    even = (np.mod(k, 2) == 0) & (k > 0)
    odd = (np.mod(k, 2) == 1) & (k > 0)
    j = k[even] / 2.0
    out[even] = j * _LOG2 + gammaln(j + 1.0)
    j = (k[odd] - 1.0) / 2.0
    out[odd] = gammaln(k[odd] + 2.0) - (j + 1.0) * _LOG2 - gammaln(j + 2.0)
    return out


def exact_double_factorial(k: int) -> int:
    """Big-integer k!! (oracle)."""
    if k < -1:
        raise DomainError("double factorial needs k >= -1")
    r = 1
    while k > 1:
        r *= k
        k -= 2
    return r


# ---------------------------------------------------------------------------
# trigonometric moments
# ---------------------------------------------------------------------------

def trig_moment(k: int, m: int) -> float:
    """a_{k,m} = integral over [0, 2pi] of cos^{2m+2-k} sin^k.

    Zero for odd k; 2pi (2m-k+1)!!(k-1)!!/(2m+2)!! for even k, evaluated in
    log space.
    """
    if k < 0 or m < 0 or k > 2 * m + 2:
        raise DomainError(f"trig_moment needs 0 <= k <= 2m+2, got k={k}, m={m}")
    if k % 2 == 1:
        return 0.0
    ln = (log_double_factorial(2 * m - k + 1) + log_double_factorial(k - 1)
          - log_double_factorial(2 * m + 2))
    return 2.0 * math.pi * math.exp(ln)


def trig_moment_even_row(m: int) -> np.ndarray:
    """a_{k,m} for even k = 0, 2, ..., 2m+2, vectorized."""
    k = np.arange(0, 2 * m + 3, 2, dtype=float)
    ln = (log_double_factorial_many(2 * m - k + 1) + log_double_factorial_many(k - 1)
          - log_double_factorial(2 * m + 2))
    return 2.0 * math.pi * np.exp(ln)


def trig_moment_ratio_exact(k: int, m: int) -> Fraction:
    """Exact rational a_{k,m} / (2 pi) (oracle)."""
    if k < 0 or m < 0 or k > 2 * m + 2:
        raise DomainError("trig_moment needs 0 <= k <= 2m+2")
    if k % 2 == 1:
        return Fraction(0)
    return Fraction(exact_double_factorial(2 * m - k + 1) * exact_double_factorial(k - 1),
                    exact_double_factorial(2 * m + 2))


# ---------------------------------------------------------------------------
# variances
# ---------------------------------------------------------------------------

def _a0_anchor(m: np.ndarray) -> np.ndarray:
    """A_0(m) = (2m+1)!!/(2m+2)!! via a cumulative product of odd/even ratios.

    Accumulated roundoff grows like sqrt(max m) ulp, far below the log-gamma
    route, which loses ~m ulp to cancellation of large lgamma values.
    """
    top = int(np.max(m)) if len(m) else 0
    j = np.arange(top + 1, dtype=float)
    ratios = (2.0 * j + 1.0) / (2.0 * j + 2.0)
    return np.cumprod(ratios)[np.asarray(m, dtype=int)]


def _sum_a_squared(m: np.ndarray, a0: np.ndarray, steps: int) -> np.ndarray:
    """sum_{l=0}^{m} A_l^2 walking inward from both ends.

    Forward covers l in [0, m//2], backward l in [m//2+1, m]; each side adds
    at most `steps` ratio steps past its anchor.  The term ratio
    ((2l+1)/(2m-2l+1))^2 makes _END_TERMS steps enough for m >= _SMALL_M.
    """
    m = np.asarray(m, dtype=float)
    half = np.floor(m / 2.0)
    total = a0 * a0
    a = a0.copy()
    for l in range(steps):
        a = a * ((2.0 * l + 1.0) / (2.0 * m - 2.0 * l + 1.0))
        total += np.where(l + 1 <= half, a * a, 0.0)
    # backward anchor: A_m = A_0 / (2m+1), in range for every m >= 1
    b = a0 / (2.0 * m + 1.0)
    total += np.where(m >= 1, b * b, 0.0)
    for off in range(1, steps + 1):
        b = b * ((2.0 * off + 1.0) / (2.0 * m - 2.0 * off + 1.0))
        lvl = m - off
        total += np.where((lvl >= half + 1) & (lvl >= 0), b * b, 0.0)
    return total


def variance_center_many(m: np.ndarray) -> np.ndarray:
    """Vectorized perturbed-center variance c_m^2."""
    m = np.asarray(m)
    if np.any(m < 0):
        raise DomainError("variance index m must be nonnegative")
    if m.size == 0:
        return np.empty(0)
    flat = m.reshape(-1).astype(int)
    a0 = _a0_anchor(flat)
    out = np.empty(flat.shape, dtype=float)
    small = flat < _SMALL_M
    if np.any(small):
        steps = max(1, int(flat[small].max()) // 2)
        out[small] = math.pi * _sum_a_squared(flat[small], a0[small], steps)
    if np.any(~small):
        out[~small] = math.pi * _sum_a_squared(flat[~small], a0[~small], _END_TERMS)
    return out.reshape(m.shape)


def variance_center(m: int) -> float:
    """Perturbed-center variance c_m^2 (double sum of squared
    double-factorial ratios, weighted pi/2)."""
    return float(variance_center_many(np.array([m]))[0])


def variance_center_exact(m: int) -> Fraction:
    """Exact value of c_m^2 / pi as a big rational (oracle).

    c_m^2 = (pi/2) sum_l (A_l^2 + B_l^2) with B_l = A_{m-l}; this returns
    sum_l (A_l^2 + B_l^2) / 2 exactly.
    """
    if m < 0:
        raise DomainError("variance index m must be nonnegative")
    den = exact_double_factorial(2 * m + 2)
    s = Fraction(0)
    for l in range(m + 1):
        a = Fraction(exact_double_factorial(2 * m - 2 * l + 1)
                     * exact_double_factorial(2 * l - 1), den)
        b = Fraction(exact_double_factorial(2 * m - 2 * l - 1)
                     * exact_double_factorial(2 * l + 1), den)
        s += a * a + b * b
    return s / 2


def variance_lienard_many(m: np.ndarray) -> np.ndarray:
    """Vectorized Lienard variance c_m^2 = pi ((2m+1)!!/(2m+2)!!)^2."""
    m = np.asarray(m)
    if np.any(m < 0):
        raise DomainError("variance index m must be nonnegative")
    if m.size == 0:
        return np.empty(0)
    flat = m.reshape(-1).astype(int)
    a0 = _a0_anchor(flat)
    return (math.pi * a0 * a0).reshape(m.shape)


def variance_lienard(m: int) -> float:
    return float(variance_lienard_many(np.array([m]))[0])


# ---------------------------------------------------------------------------
# coefficient vectors
# ---------------------------------------------------------------------------

def coeff_vector(scheme: CoeffScheme, n: int) -> CoeffVector:
    """Coefficients c_{0,n} .. c_{n,n} for one scheme.

    Variance schemes take c_m = sqrt(variance).  The power law takes
    c_m = m^rho for m >= 1 and c_0 = 1 (m^rho is undefined at m = 0; any
    bounded positive choice is admissible and 1 matches the flat case
    rho = 0).
    """
    if n < 0:
        raise DomainError("degree must be nonnegative")
    m = np.arange(n + 1)
    if scheme.kind == "center":
        values = np.sqrt(variance_center_many(m))
    elif scheme.kind == "lienard":
        values = np.sqrt(variance_lienard_many(m))
    else:
        values = np.ones(n + 1)
        if n >= 1:
            values[1:] = np.arange(1, n + 1, dtype=float) ** scheme.rho
    return CoeffVector(n=n, values=values, scheme=scheme)
