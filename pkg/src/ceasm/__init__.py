"""Angular-spectrum diffraction with an energy-controlled frequency band.

The package propagates sampled complex fields with the plain and
band-limited angular spectrum methods, the adaptive-sampling and
band-extended NUFFT variants, and a variant whose band is the smallest one
holding a chosen fraction of the source's spectral energy.  Direct
Rayleigh-Sommerfeld oracles and SNR/timing helpers are included for
evaluation.
"""
from .errors import InvalidArgumentError, ResourceLimitError
from .evaluation import EvaluationReport, benchmark, parseval_residual, snr
from .field import (
    ComplexField,
    GridSpec,
    crop_center,
    make_grid,
    rect_aperture,
    triangle_aperture,
    zero_pad,
)
from .fileio import dump_field, read_ceaf, write_ceaf, write_pgm
from .propagation import (
    Method,
    OpticalConfig,
    PropagationPlan,
    ReferenceMode,
    boundary_be,
    boundary_bl,
    critical_distance,
    plan,
    propagate,
    samples_bl,
    samples_ce,
    search_fce,
    transfer_function,
)
from .reference import OracleBudget, propagate_conv, rs_direct
from .transforms import TransformAccuracy, dft_direct, nufft3_forward, nufft3_inverse

__version__ = "0.1.0"
