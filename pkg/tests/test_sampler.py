import math

import numpy as np
import pytest

from kaccycles.coeffs import (CoeffScheme, trig_moment, variance_center_many,
                              variance_lienard_many)
from kaccycles.errors import DomainError
from kaccycles.sampler import (NoiseDistribution, PerturbationCoefficients,
                               SeedSpec, draw, melnikov_noise_from_lienard,
                               melnikov_noise_from_perturbation, pair_count,
                               pair_rank, sample_polynomial)

G = NoiseDistribution.GAUSSIAN
R = NoiseDistribution.RADEMACHER
U = NoiseDistribution.UNIFORM_SYM


def test_draw_supports_and_determinism():
    s = SeedSpec(99, experiment=1, trial=5, index=3)
    assert draw(R, s) in (-1.0, 1.0)
    assert abs(draw(U, s)) <= math.sqrt(3.0)
    assert draw(G, s) == draw(G, s)
    assert draw(G, s) != draw(G, SeedSpec(99, 1, 5, 4))


def test_sample_polynomial_deterministic_and_prefix_stable():
    seed = SeedSpec(7, trial=2)
    a = sample_polynomial(CoeffScheme.power_law(0.0), G, 50, seed)
    b = sample_polynomial(CoeffScheme.power_law(0.0), G, 50, seed)
    assert np.array_equal(a.realized, b.realized)
    assert np.array_equal(a.realized, a.coeffs.values * a.noise)
    # same stream prefix independent of the requested degree
    c = sample_polynomial(CoeffScheme.power_law(0.0), G, 20, seed)
    assert np.array_equal(a.noise[:21], c.noise)


def test_rademacher_degree_zero_support():
    p = sample_polynomial(CoeffScheme.power_law(0.0), R, 0, SeedSpec(3))
    assert p.realized[0] in (-1.0, 1.0)


def test_realized_variance_bands():
    # Kac scheme: Var(realized[m]) = 1; 1e4 trials, 3 sigma band ~ [0.95, 1.05]
    trials, n = 10**4, 1000
    picks = np.array([0, 500, 1000])
    acc = np.empty((trials, len(picks)))
    for t in range(trials):
        p = sample_polynomial(CoeffScheme.power_law(0.0), G, n, SeedSpec(404, trial=t))
        acc[t] = p.realized[picks]
    v = acc.var(axis=0)
    assert np.all(v > 0.95) and np.all(v < 1.05), v


def test_melnikov_entry_degree_one_hand_value():
    # only alpha_{1,0} and beta_{0,1} survive at d=1:
    # entry_0 = (8 pi)^{-1/2} (alpha_{1,0} a_{0,0} + beta_{0,1} a_{2,0})
    pc = PerturbationCoefficients.from_maps(
        1, {(1, 0): 2.0, (0, 1): 5.0}, {(1, 0): 7.0, (0, 1): 3.0})
    got = melnikov_noise_from_perturbation(pc)
    want = (8 * math.pi) ** -0.5 * (2.0 * trig_moment(0, 0) + 3.0 * trig_moment(2, 0))
    assert got.shape == (1,)
    assert abs(got[0] - want) < 1e-14


def test_melnikov_zero_perturbation():
    pc = PerturbationCoefficients.from_maps(5, {}, {})
    assert np.all(melnikov_noise_from_perturbation(pc) == 0.0)


def test_melnikov_variance_identity_full():
    # Var(c_m xi_m) must equal the perturbed-center variance (3 sigma band)
    d, trials = 201, 10**4
    n = (d - 1) // 2
    acc = np.empty((trials, n + 1))
    for t in range(trials):
        pc = PerturbationCoefficients.sample_full(d, G, SeedSpec(1234, trial=t))
        acc[t] = melnikov_noise_from_perturbation(pc)
    emp = acc.var(axis=0, ddof=1)
    theo = variance_center_many(np.arange(n + 1))
    for m in (1, 10, 50):
        assert 0.9 <= emp[m] / theo[m] <= 1.1, (m, emp[m] / theo[m])
    # distinct entries use disjoint perturbation indices: near-zero correlation
    for (a, b) in ((1, 10), (10, 50), (3, 17)):
        corr = np.corrcoef(acc[:, a], acc[:, b])[0, 1]
        assert abs(corr) <= 0.05, (a, b, corr)


def test_melnikov_lazy_matches_materialized():
    pc = PerturbationCoefficients.sample_full(9, G, SeedSpec(5))
    assert np.allclose(melnikov_noise_from_perturbation(pc),
                       melnikov_noise_from_perturbation(pc.materialized()),
                       rtol=0, atol=0)


def test_lienard_entries():
    pc = PerturbationCoefficients.lienard(np.array([1.0, 0.0, 0.0]))
    got = melnikov_noise_from_lienard(pc)
    assert abs(got[0] - math.sqrt(math.pi) / 2.0) < 1e-14
    assert got[1] == 0.0
    assert np.all(melnikov_noise_from_lienard(
        PerturbationCoefficients.lienard(np.zeros(7))) == 0.0)


def test_lienard_even_indices_never_enter():
    base = PerturbationCoefficients.sample_lienard(11, G, SeedSpec(21))
    modified = np.array(base.alpha)
    modified[1::2] = 123.456  # alpha_2, alpha_4, ... (even indices)
    other = PerturbationCoefficients.lienard(modified)
    assert np.array_equal(melnikov_noise_from_lienard(base),
                          melnikov_noise_from_lienard(other))


def test_lienard_variance_identity():
    d, trials = 201, 10**4
    n = (d - 1) // 2
    acc = np.empty((trials, n + 1))
    for t in range(trials):
        pc = PerturbationCoefficients.sample_lienard(d, G, SeedSpec(77, trial=t))
        acc[t] = melnikov_noise_from_lienard(pc)
    emp = acc.var(axis=0, ddof=1)
    theo = variance_lienard_many(np.arange(n + 1))
    for m in (1, 10, 50):
        assert 0.9 <= emp[m] / theo[m] <= 1.1, (m, emp[m] / theo[m])


def test_pair_bookkeeping():
    assert pair_rank(1, 0) == 0 and pair_rank(0, 1) == 1
    assert pair_rank(2, 0) == 2 and pair_rank(0, 2) == 4
    assert pair_count(1) == 2 and pair_count(2) == 5
    ranks = [pair_rank(s - k, k) for s in range(1, 6) for k in range(s + 1)]
    assert ranks == list(range(pair_count(5)))


def test_perturbation_validation():
    with pytest.raises(DomainError):
        PerturbationCoefficients.from_maps(2, {(3, 0): 1.0}, {})
    with pytest.raises(DomainError):
        PerturbationCoefficients(d=0, kind="full", dist=G, seed=SeedSpec(1))
    with pytest.raises(DomainError):
        melnikov_noise_from_lienard(PerturbationCoefficients.from_maps(1, {}, {}))
