"""Counterexample d-sets whose projected measures have densities outside L^p.

Blocks ``K_j`` (packed, shrunk Cantor products) of diameter ``<= r_j`` and
mass ``c_j r_j**d`` are combined into a scene; their natural measures are
sampled, projected onto l-planes and histogrammed, and the resulting L^p
norms are compared with the Hoelder lower bound
``C**(-1/q) c_j r_j**(d - l/q)``, which diverges along the block sequence.
"""

from .construct import (AmbientParams, BlockSpec, CantorFactorSpec, SceneSpec, SequenceLaw,
                        assemble_scene, build_block, cantor_digit_params, choose_subdivision,
                        homothety_ratio, validate_sequences)
from .errors import HypothesisError, InvariantError
from .projection import (DensityReport, Frame, GridHistogram, NormParams, divergence_series,
                         estimate_density, frame_from_angle, hoelder_bound, lp_norm,
                         marstrand_scan, per_block_report, project_batch, random_frame,
                         regularity_scan)
from .sampling import SampleBatch, sample_block, sample_scene

__version__ = "0.1.0"
