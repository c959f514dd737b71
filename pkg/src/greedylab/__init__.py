"""Greedy approximation over Hilbert-space dictionaries.

Orthogonal, pure, shrinkage and relaxed greedy algorithms, an exact argmax
for planar Heaviside ridge atoms, and experiment drivers for convergence
rates, lower bounds and variation-norm growth.
"""

from .analysis import (RateEstimate, VariationNormResult, fit_rate, noise_robustness_check,
                       variation_norm_finite, verify_counterexample, verify_lower_bound)
from .dictionaries import (DictionaryElement, FiniteDictionary, RidgeDictionary,
                           SequenceDictionary, build_counterexample_dictionary, finite_argmax,
                           ridge2d_argmax, sequence_argmax)
from .greedy import GreedyState, StepRecord, oga_step, packing_sum, pga_step, rga_step, run
from .hilbert import (EmpiricalSpace, EuclideanSpace, OrthoBasis, SampleSet, SparseVector,
                      coefficients_wrt_atoms, empirical_inner_product, orthonormal_extend,
                      project_and_residual, sequence_inner_product)

__version__ = "0.1.0"
