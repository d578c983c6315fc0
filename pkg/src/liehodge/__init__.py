"""Hodge Laplacians on Lie algebra cohomology at finite dimension."""

from .errors import (CapError, ConvergenceWarning, FormError, FrameError, InputError,
                     LieHodgeError, MajorantError, ModelError, PrecisionWarning,
                     ScalingError)
from .lie_core import (AlgebraSpec, CartanFrame, ModuleRep, ValidationReport, ad_matrix,
                       build_frame, cadj_matrix, cadj_star_matrix, cartan_frame,
                       killing_form, metric_frame, validate_algebra, validate_module)

__version__ = "0.1.0"
