"""Phase-only acoustic hologram optimisation by gradient descent.

Transducer arrays are optimised against control-point amplitudes with Adam on an
exact phase gradient; phase plates are optimised against target images through
angular spectrum propagation, with an iterative angular spectrum baseline.
"""

from ._backend import BACKEND
from .asm import AngularSpectrum, AsmOptions, ComplexPlane, adjoint_propagate_cw, propagate_cw
from .field import (AIR, MediumConfig, bessel_j1, calibrate_total_amplitude, directivity,
                    element_pressure, focal_amplitude, focal_phases, propagation_matrix,
                    total_pressure)
from .geometry import (ArrayLayout, ControlPointSet, Roi, Transducer, build_single_axis,
                       build_single_sided, default_roi, generate_random_geometry, named_array,
                       roi_vertices)
from .grad import (PatLossReport, PlateObjective, pat_loss, pat_loss_gradient, plate_loss,
                   plate_loss_gradient)
from .metrics import BoxStats, box_stats, psnr, rp
from .optim import (AdamConfig, AdamState, PlateConfig, RunRecord, adam_step, iasa,
                    optimize_pat, optimize_plate)

__version__ = "0.1.0"
