"""Limit cycles of randomly perturbed planar centers.

A degree-d perturbation of the linear center,

    x' = y + eps p(x,y),   y' = -x + eps q(x,y),

bifurcates limit cycles at the nondegenerate positive zeros of the radial
Melnikov polynomial M(r) = sqrt(8 pi) r^2 f_n(r^2), n = (d-1)//2, whose
coefficients come out of :func:`kaccycles.sampler.melnikov_noise_from_perturbation`.
The single-variable variant x' = y - eps p(x), y' = -x carries M(r) =
r^2 f_n(r^2) under the 1/(2 sqrt(pi)) normalization folded into p.

Orientation note: the forward-time flow of these systems is clockwise, while
M is the flux through the circle with its counterclockwise parametrization.
The first-order displacement of the return map on the positive x-axis is

    P(r) - r = eps * s * M(r) / r + O(eps^2),

with s = +1 for the full center and s = -1 for the single-variable system
(whose perturbation enters x' negated).  Zero sets, hence cycle counts, do
not depend on s.

The cross-validator integrates the flow with an embedded Dormand-Prince 5(4)
pair and locates section crossings by cubic Hermite interpolation of the
last step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (DomainError, EscapeError, NoReturnError,
                     NonConvergentError)
from .rootcount import Interval, count_in_interval
from .sampler import (PerturbationCoefficients, melnikov_noise_from_lienard,
                      melnikov_noise_from_perturbation)

SQRT_8PI = math.sqrt(8.0 * math.pi)

# nondegeneracy: |M'(r)| must exceed this times prefactor * ||f_n||_2
NONDEGENERATE_RTOL = 1e-8


@dataclass
class PerturbedSystem:
    """A perturbed center ready for both pipelines."""

    kind: str                      # "center" | "lienard"
    pc: PerturbationCoefficients
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("center", "lienard"):
            raise DomainError(f"unknown system kind {self.kind!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError("epsilon must lie in (0, 1)")
        if self.kind == "center" and self.pc.kind != "full":
            raise DomainError("center systems need a full bivariate perturbation")
        if self.kind == "lienard" and self.pc.kind != "lienard":
            raise DomainError("lienard systems need a single-variable perturbation")


@dataclass
class MelnikovPoly:
    """M(r) = prefactor * r^2 * f_n(r^2)."""

    fn_coeffs: np.ndarray
    n: int
    prefactor: float
    ode_sign: float    # orientation factor s in P(r) - r ~ eps s M(r) / r

    def f(self, x: float) -> float:
        acc = 0.0
        for c in self.fn_coeffs[::-1]:
            acc = acc * x + c
        return acc

    def f_prime(self, x: float) -> float:
        acc = 0.0
        for m in range(self.n, 0, -1):
            acc = acc * x + m * self.fn_coeffs[m]
        return acc

    def value(self, r: float) -> float:
        return self.prefactor * r * r * self.f(r * r)

    def derivative(self, r: float) -> float:
        x = r * r
        return self.prefactor * (2.0 * r * self.f(x) + 2.0 * r * x * self.f_prime(x))


@dataclass
class LimitCycleReport:
    """Bifurcating limit cycles: count, radii, nondegeneracy flags."""

    count: int
    radii: np.ndarray
    nondegenerate: np.ndarray
    method: str
    zero_polynomial: bool = False


def build_melnikov(sys: PerturbedSystem) -> MelnikovPoly:
    """Melnikov polynomial coefficients for one perturbed system."""
    if sys.kind == "center":
        coeffs = melnikov_noise_from_perturbation(sys.pc)
        return MelnikovPoly(coeffs, len(coeffs) - 1, SQRT_8PI, +1.0)
    coeffs = melnikov_noise_from_lienard(sys.pc)
    return MelnikovPoly(coeffs, len(coeffs) - 1, 1.0, -1.0)


# ---------------------------------------------------------------------------
# flux quadrature
# ---------------------------------------------------------------------------

def _full_terms(pc: PerturbationCoefficients):
    """(j, k, alpha, beta) arrays over all pairs of a materialized pc."""
    mat = pc.materialized()
    d = pc.d
    js, ks = [], []
    for s in range(1, d + 1):
        for k in range(s + 1):
            js.append(s - k)
            ks.append(k)
    return (np.array(js, dtype=float), np.array(ks, dtype=float),
            mat.alpha, mat.beta)


def melnikov_flux_quadrature(sys: PerturbedSystem, r: float) -> float:
    """Flux of the perturbation through the circle of radius r.

    Trapezoid rule in the angle; the integrand is a trigonometric polynomial
    of degree d+1, so node count 4d+8 integrates it exactly up to roundoff.
    Matches prefactor * r^2 * f_n(r^2).
    """
    if r <= 0.0:
        raise DomainError("flux radius must be positive")
    d = sys.pc.d
    nodes = 4 * d + 8
    th = np.linspace(0.0, 2.0 * math.pi, nodes, endpoint=False)
    x = r * np.cos(th)
    y = r * np.sin(th)
    if sys.kind == "center":
        j, k, alpha, beta = _full_terms(sys.pc)
        xp = x[:, None] ** j[None, :]
        yp = y[:, None] ** k[None, :]
        p = (xp * yp) @ alpha
        q = (xp * yp) @ beta
        integrand = p * x + q * y
    else:
        a = sys.pc.alpha
        px = np.zeros_like(x)
        for c in a[::-1]:
            px = px * x + c
        px *= x / (2.0 * math.sqrt(math.pi))   # p(x) = (1/(2 sqrt pi)) sum alpha_k x^k
        integrand = px * x
    return float(integrand.mean() * 2.0 * math.pi)


def count_bifurcating_cycles(sys: PerturbedSystem) -> LimitCycleReport:
    """Cycle count and radii from the positive zeros of M.

    Radii are sqrt of the positive roots of f_n; a root is flagged
    nondegenerate when |M'(r)| exceeds NONDEGENERATE_RTOL times the
    coefficient scale.  An identically-zero M comes back as a flagged zero
    count (the one-to-one correspondence assumes M not identically zero).
    """
    mp = build_melnikov(sys)
    if not np.any(mp.fn_coeffs != 0.0):
        return LimitCycleReport(0, np.empty(0), np.empty(0, dtype=bool),
                                "melnikov", zero_polynomial=True)
    rep = count_in_interval(mp.fn_coeffs, Interval(0.0, math.inf))
    radii = np.sqrt(rep.roots)
    scale = mp.prefactor * float(np.linalg.norm(mp.fn_coeffs))
    nd = np.array([abs(mp.derivative(r)) > NONDEGENERATE_RTOL * scale
                   for r in radii], dtype=bool)
    # multiplicity > 1 is degenerate by definition
    nd &= rep.multiplicities == 1
    count = int(rep.multiplicities.sum())
    return LimitCycleReport(count, radii, nd, "melnikov")


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with Hermite event refinement
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                   187 / 2100, 1 / 40])

_RTOL = 1e-10
_ATOL = 1e-12
_H_MAX = 0.2
_EVENT_TOL = 1e-12


def _system_rhs(sys: PerturbedSystem):
    eps = sys.epsilon
    if sys.kind == "center":
        j, k, alpha, beta = _full_terms(sys.pc)

        def rhs(t, u):
            x, y = u
            mono = (x ** j) * (y ** k)
            p = float(mono @ alpha)
            q = float(mono @ beta)
            return np.array([y + eps * p, -x + eps * q])

        return rhs
    a = sys.pc.alpha / (2.0 * math.sqrt(math.pi))

    def rhs(t, u):
        x, y = u
        px = 0.0
        for c in a[::-1]:
            px = px * x + c
        px *= x
        return np.array([y - eps * px, -x])

    return rhs


def _hermite(y0, y1, f0, f1, h, tau):
    """Cubic Hermite value on one step at fraction tau in [0, 1]."""
    t2 = tau * tau
    h00 = 2 * t2 * tau - 3 * t2 + 1
    h10 = t2 * tau - 2 * t2 + tau
    h01 = -2 * t2 * tau + 3 * t2
    h11 = t2 * tau - t2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def poincare_return(sys: PerturbedSystem, r0: float) -> float:
    """First return of the trajectory from (r0, 0) to the positive x-axis.

    Adaptive Dormand-Prince 5(4), relative tolerance 1e-10; the section
    crossing (y: + -> -, x > 0) is refined on the last step by bisection of
    the cubic Hermite interpolant to 1e-12.  Raises Escape past radius
    10 r0 and NoReturn past arc time 4 pi.
    """
    if r0 <= 0.0:
        raise DomainError("return map needs r0 > 0")
    rhs = _system_rhs(sys)
    t = 0.0
    u = np.array([r0, 0.0])
    f = rhs(t, u)
    h = 1e-3
    r_cap = 10.0 * r0
    t_cap = 4.0 * math.pi
    while t < t_cap:
        h = min(h, _H_MAX, t_cap - t + 1e-9)
        ks = np.empty((7, 2))
        ks[0] = f
        for i in range(1, 7):
            ui = u + h * (_DP_A[i] @ ks[:i])
            ks[i] = rhs(t + _DP_C[i] * h, ui)
        u5 = u + h * (_DP_B5 @ ks)
        u4 = u + h * (_DP_B4 @ ks)
        scale = _ATOL + _RTOL * np.maximum(np.abs(u), np.abs(u5))
        err = math.sqrt(float(np.mean(((u5 - u4) / scale) ** 2)))
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        t_new = t + h
        f_new = ks[6]  # FSAL: stage 7 is rhs at (t+h, u5)
        # section crossing y: + -> <=0 with x > 0
        if u[1] > 0.0 and u5[1] <= 0.0:
            lo, hi = 0.0, 1.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                ym = _hermite(u[1], u5[1], f[1], f_new[1], h, mid)
                if ym > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < _EVENT_TOL:
                    break
            tau = 0.5 * (lo + hi)
            xc = _hermite(u[0], u5[0], f[0], f_new[0], h, tau)
            if xc > 0.0:
                return float(xc)
        u, f, t = u5, f_new, t_new
        if float(np.hypot(u[0], u[1])) > r_cap:
            raise EscapeError(f"trajectory escaped past {r_cap:g} at t={t:.3f}")
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))
    raise NoReturnError(f"no section crossing within arc time {t_cap:g}")


def verify_cycles_ode(sys: PerturbedSystem, eps_start: float = 1e-2,
                      eps_floor: float = 1e-5, window=None,
                      grid: int | None = None) -> LimitCycleReport:
    """Fixed points of the return map, stabilized over an eps schedule.

    g(r) = P(r) - r is scanned on a radial grid; sign changes are bisected
    to fixed points.  eps halves until the sign-change count agrees on two
    consecutive levels; the stabilized level's fixed points are reported.
    Escaping or non-returning radii contribute no sign information.  The
    grid densifies when the Melnikov radii sit close together, so adjacent
    fixed points stay separated.
    """
    radii_hint = None
    if window is None or grid is None:
        mp = build_melnikov(sys)
        rep = count_in_interval(mp.fn_coeffs, Interval(0.0, math.inf)) \
            if np.any(mp.fn_coeffs != 0.0) else None
        if rep is not None and rep.count > 0:
            radii_hint = np.sqrt(rep.roots)
    if window is None:
        if radii_hint is not None:
            window = (max(1e-3, 0.5 * radii_hint.min()), 1.5 * radii_hint.max())
        else:
            window = (0.05, 5.0)
    r_lo, r_hi = window
    if grid is None:
        grid = 48
        if radii_hint is not None and len(radii_hint) > 1:
            min_gap = float(np.min(np.diff(np.sort(radii_hint))))
            if min_gap > 0.0:
                grid = int(min(320, max(48, math.ceil(4.0 * (r_hi - r_lo) / min_gap))))
    rs = np.linspace(r_lo, r_hi, grid)
    res = (r_hi - r_lo) / grid

    prev_count = None
    eps = eps_start
    while eps >= eps_floor * 0.999:
        s_eps = replace(sys, epsilon=eps)

        def g(r):
            try:
                return poincare_return(s_eps, r) - r
            except (EscapeError, NoReturnError):
                return math.nan

        gv = np.array([g(r) for r in rs])
        fixed = []
        for i in range(grid - 1):
            a, b, ga, gb = rs[i], rs[i + 1], gv[i], gv[i + 1]
            if math.isnan(ga) or math.isnan(gb) or ga == 0.0 or ga * gb > 0.0:
                continue
            for _ in range(40):
                mid = 0.5 * (a + b)
                gm = g(mid)
                if math.isnan(gm):
                    break
                if (gm > 0.0) == (ga > 0.0):
                    a, ga = mid, gm
                else:
                    b = mid
                if b - a < 1e-10 * max(1.0, b):
                    break
            fixed.append(0.5 * (a + b))
        merged = []
        for r in sorted(fixed):
            if not merged or r - merged[-1] > res:
                merged.append(r)
        if prev_count is not None and prev_count == len(merged):
            radii = np.array(merged)
            return LimitCycleReport(len(merged), radii,
                                    np.ones(len(merged), dtype=bool), "ode")
        prev_count = len(merged)
        eps *= 0.5
    raise NonConvergentError(
        f"cycle count never stabilized before eps = {eps_floor:g}")
