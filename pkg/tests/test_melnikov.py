import math
from dataclasses import replace

import numpy as np
import pytest

from kaccycles.errors import DomainError
from kaccycles.melnikov import (PerturbedSystem, build_melnikov,
                                count_bifurcating_cycles,
                                melnikov_flux_quadrature, poincare_return,
                                verify_cycles_ode)
from kaccycles.rootcount import Interval, count_in_interval
from kaccycles.sampler import (NoiseDistribution, PerturbationCoefficients,
                               SeedSpec)

G = NoiseDistribution.GAUSSIAN
TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)


def van_der_pol(eps=1e-3) -> PerturbedSystem:
    # p(x) = x^3/3 - x under the 1/(2 sqrt pi) normalization:
    # alpha_1 = -2 sqrt(pi), alpha_3 = 2 sqrt(pi)/3
    pc = PerturbationCoefficients.lienard(
        np.array([-TWO_SQRT_PI, 0.0, TWO_SQRT_PI / 3.0]))
    return PerturbedSystem("lienard", pc, epsilon=eps)


# ---------------------------------------------------------------------------
# Melnikov polynomial
# ---------------------------------------------------------------------------

def test_van_der_pol_melnikov_closed_form():
    # integral cos^4 = 3 pi/4, integral cos^2 = pi:
    # M(r) = pi r^4/4 - pi r^2, i.e. f(x) = -pi + (pi/4) x, zero at x = 4
    mp = build_melnikov(van_der_pol())
    assert np.allclose(mp.fn_coeffs, [-math.pi, math.pi / 4.0], rtol=1e-14)
    assert abs(mp.value(2.0)) < 1e-12
    assert abs(mp.value(1.0) - (math.pi / 4.0 - math.pi)) < 1e-14


def test_pure_damping_has_no_cycles():
    # p(x) proportional to x: f_0 = sqrt(pi)/2 > 0, no positive zero
    pc = PerturbationCoefficients.lienard(np.array([1.0]))
    rep = count_bifurcating_cycles(PerturbedSystem("lienard", pc))
    assert rep.count == 0 and not rep.zero_polynomial


def test_zero_perturbation_flagged():
    pc = PerturbationCoefficients.lienard(np.zeros(5))
    rep = count_bifurcating_cycles(PerturbedSystem("lienard", pc))
    assert rep.count == 0 and rep.zero_polynomial


def test_van_der_pol_cycle_count_and_radius():
    rep = count_bifurcating_cycles(van_der_pol())
    assert rep.count == 1
    assert abs(rep.radii[0] - 2.0) <= 1e-9
    assert rep.nondegenerate[0]


def test_count_bijection_with_rootcount():
    for trial in range(30):
        pc = PerturbationCoefficients.sample_full(11, G, SeedSpec(88, trial=trial))
        sysm = PerturbedSystem("center", pc)
        rep = count_bifurcating_cycles(sysm)
        mp = build_melnikov(sysm)
        want = count_in_interval(mp.fn_coeffs, Interval(0.0, math.inf)).count
        assert rep.count == want


def test_system_validation():
    pc = PerturbationCoefficients.lienard(np.ones(3))
    with pytest.raises(DomainError):
        PerturbedSystem("center", pc)
    with pytest.raises(DomainError):
        PerturbedSystem("lienard", pc, epsilon=0.0)
    with pytest.raises(DomainError):
        PerturbedSystem("spiral", pc)


# ---------------------------------------------------------------------------
# flux quadrature
# ---------------------------------------------------------------------------

def test_flux_zero_perturbation():
    pc = PerturbationCoefficients.from_maps(3, {}, {})
    s = PerturbedSystem("center", pc)
    for r in (0.3, 1.0, 2.5):
        assert melnikov_flux_quadrature(s, r) == 0.0


def test_van_der_pol_flux_at_limit_cycle():
    assert abs(melnikov_flux_quadrature(van_der_pol(), 2.0)) <= 1e-10


def test_flux_identity_random_center_systems(rng):
    for trial in range(8):
        d = int(rng.integers(1, 22))
        pc = PerturbationCoefficients.sample_full(d, G, SeedSpec(500, trial=trial))
        s = PerturbedSystem("center", pc)
        mp = build_melnikov(s)
        for r in np.linspace(0.1, 3.0, 5):
            want = mp.value(float(r))
            got = melnikov_flux_quadrature(s, float(r))
            assert abs(got - want) <= 1e-8 * max(1e-12, abs(want)), (trial, r)


def test_flux_identity_lienard(rng):
    for trial in range(5):
        pc = PerturbationCoefficients.sample_lienard(9, G, SeedSpec(911, trial=trial))
        s = PerturbedSystem("lienard", pc)
        mp = build_melnikov(s)
        for r in (0.2, 0.8, 1.9):
            want = mp.value(r)
            got = melnikov_flux_quadrature(s, r)
            assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# Poincare return map
# ---------------------------------------------------------------------------

def test_unperturbed_orbits_close():
    # zero perturbation: circles, P(r0) = r0 (epsilon value irrelevant)
    pc = PerturbationCoefficients.from_maps(1, {}, {})
    s = PerturbedSystem("center", pc, epsilon=1e-6)
    for r0 in (0.5, 1.5, 3.0):
        assert abs(poincare_return(s, r0) - r0) <= 1e-9 * max(1.0, r0)


def test_van_der_pol_displacement_near_cycle():
    # at the cycle radius the first-order displacement vanishes
    s = van_der_pol(1e-3)
    assert abs(poincare_return(s, 2.0) - 2.0) <= 5.0 * (1e-3) ** 2


def test_van_der_pol_displacement_matches_melnikov():
    s = van_der_pol(1e-3)
    mp = build_melnikov(s)
    got = poincare_return(s, 1.0) - 1.0
    want = s.epsilon * mp.ode_sign * mp.value(1.0) / 1.0
    assert want > 0  # spirals outward toward the stable cycle
    assert abs(got / want - 1.0) <= 0.2


def test_displacement_scaling_richardson(rng):
    # (P(r) - r)/eps -> s M(r)/r; Richardson over eps in {1e-2, 1e-3}
    for trial in range(2):
        pc = PerturbationCoefficients.sample_full(5, G, SeedSpec(606, trial=trial))
        s = PerturbedSystem("center", pc)
        mp = build_melnikov(s)
        for r in (0.6, 1.1, 1.7):
            d = {}
            for eps in (1e-2, 1e-3):
                ret = poincare_return(replace(s, epsilon=eps), r)
                d[eps] = (ret - r) / eps
            extrap = d[1e-3] + (d[1e-3] - d[1e-2]) * (1e-3 / (1e-2 - 1e-3))
            want = mp.ode_sign * mp.value(r) / r
            assert abs(extrap - want) <= 0.02 * max(0.05, abs(want)), (trial, r)


def test_poincare_rejects_bad_radius():
    s = van_der_pol()
    with pytest.raises(DomainError):
        poincare_return(s, 0.0)


# ---------------------------------------------------------------------------
# ODE cross-validation
# ---------------------------------------------------------------------------

def test_van_der_pol_ode_verification():
    rep = verify_cycles_ode(van_der_pol(1e-3))
    assert rep.count == 1
    assert abs(rep.radii[0] - 2.0) <= 0.05


def test_pure_damping_ode_verification():
    pc = PerturbationCoefficients.lienard(np.array([1.0]))
    rep = verify_cycles_ode(PerturbedSystem("lienard", pc))
    assert rep.count == 0
