"""Target detection for multiband raster scenes.

Implements the constrained-energy-minimization and matched-filter detectors,
their origin-shifted generalization, the closed-form characterization of
optimal data origins with its gradient-ascent counterpart, and an evaluation
harness (energies, map correlation, ROC/AUC) with deterministic synthetic
scenes and file formats. The hot kernels run on a compiled backend when
available (`tdtk._kernels.BACKEND` says which).
"""

from ._kernels import BACKEND
from .detectors import (Detector, EquivalenceReport, ObjectiveReport, cem,
                        ce_detector, g_gradient, g_value, mf,
                        objective_report, verify_equivalence)
from .errors import (BadMagic, ConfigInvalid, DegenerateMask,
                     DegenerateTarget, DimensionMismatch, DimensionOverflow,
                     NonFinite, ParseError, PreconditionFailed, Singular,
                     TdtkError, TruncatedPayload, ZeroVariance)
from .evaluate import (DetectionMap, GroundTruthMask, RocCurve, detect,
                       output_energy, r_squared, roc)
from .solver import (AscentConfig, AscentTrace, BasicEquationSolution,
                     basic_equation_residual, g_surface_grid, gradient_ascent,
                     hyperplane_basis, hyperplane_line, plateau_value,
                     solve_basic_equation)
from .stats import (Scene, SceneStats, compute_stats, shifted_correlation,
                    shifted_correlation_inverse, sherman_morrison_inverse,
                    solve_spd)
from .synth import DEFAULT_SEED, SynthConfig, generate

__version__ = "0.1.0"
