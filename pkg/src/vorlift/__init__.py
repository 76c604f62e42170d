"""Lifting L^p vector fields with quantized point divergence to
circle-valued phase maps, and back.

The package ties together: flux quantization on circles, level-set
currents and the coarea identity, ball covers with the boundary-flux
bound, approximation by fields with finitely many vortices, the lift /
unlift round trip, and the dipole-sequence counterexample showing which
currents admit no L^p companion field.
"""

from .errors import (AliasingError, DataError, DegenerateSliceError,
                     GeometryError, LiftError, QuantizationError,
                     ToleranceError, VorliftError)
from .grid import (CircleValuedField, GridSpec, VectorField2D, c_p,
                   check_exponent, directional_norm_check, lp_norm,
                   sample_angle, sample_vector, wrap)
from .fileio import (read_circle_field, read_vector_field,
                     write_circle_field, write_vector_field)
from .flux import Circle, FluxResult, boundary_degree, circle_flux, winding_degree
from .currents import (CoareaResult, Piece, PolylineCurrent, SliceResult,
                       boundary, coarea_check, interior_boundary,
                       level_set_current, slice_by_circle)
from .cover import (BallCover, bad_ball_scaling, classify_balls,
                    maximal_separated_set, shifted_cover)
from .approx import (ApproxReport, CircleTrace, approximate,
                     harmonic_extension, mollify_trace, radial_extension,
                     trace_circle)
from .lifting import (ChargeSet, LiftResult, green_field, lift,
                      lift_with_current, roundtrip, unlift)
from .counterexample import (DipoleSequence, build_sequence,
                             divergence_certificate, min_norm_lower_bound)

__version__ = "0.1.0"
