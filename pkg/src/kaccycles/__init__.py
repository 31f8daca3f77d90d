"""Real zeros of generalized Kac random polynomials and the limit cycles
they induce in randomly perturbed planar centers.

The package covers four pipelines around one family of random polynomials
f_n(x) = sum c_{m,n} xi_m x^m:

* exact coefficient schemes (perturbed center, Lienard, power law),
* reproducible Monte Carlo root-count statistics,
* Gaussian Kac-Rice expected-count quadrature with asymptotic predictors,
* Melnikov / Poincare-return limit-cycle counting for the ODE side.
"""

__version__ = "0.1.0"

from .coeffs import (CoeffScheme, CoeffVector, coeff_vector, log_double_factorial,
                     trig_moment, variance_center, variance_lienard)
from .errors import (DegreeTooLargeError, DomainError, EscapeError,
                     InsufficientDataError, KaccyclesError, NonConvergentError,
                     NoReturnError, QuadratureFailureError, ZeroPolynomialError)
from .kacrice import (AsymptoticPrediction, CoreInterval, KacRiceIntegrand,
                      asymptotic_prediction, core_interval,
                      expected_roots_gaussian, expected_roots_gaussian_reversed,
                      expected_roots_region, pqr)
from .melnikov import (LimitCycleReport, MelnikovPoly, PerturbedSystem,
                       build_melnikov, count_bifurcating_cycles,
                       melnikov_flux_quadrature, poincare_return,
                       verify_cycles_ode)
from .rootcount import (Interval, RootCountReport, count_in_interval, real_roots,
                        reversed_poly, sturm_count, sweep_count)
from .sampler import (NoiseDistribution, PerturbationCoefficients, RandomPoly,
                      SeedSpec, draw, melnikov_noise_from_lienard,
                      melnikov_noise_from_perturbation, sample_polynomial)
from .experiment import (EstimateRow, ExperimentConfig, ExperimentResult,
                         MomentRow, compare_to_theory, run_experiment)
