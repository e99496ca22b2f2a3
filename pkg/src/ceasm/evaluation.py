"""Accuracy metrics and the timing harness behind the sweep reports."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .field import ComplexField
from .propagation import OpticalConfig, PropagationPlan, critical_distance, propagate
from .transforms import DEFAULT_ACCURACY, TransformAccuracy, fft_uniform

__all__ = [
    "SNR_CAP_DB",
    "CSV_COLUMNS",
    "EvaluationReport",
    "snr",
    "parseval_residual",
    "benchmark",
]

SNR_CAP_DB = 300.0

CSV_COLUMNS = (
    "z_m",
    "z_over_zc",
    "method",
    "eta",
    "f_boundary_cyc_per_m",
    "n_freq_axis",
    "snr_db",
    "elapsed_s",
)


def snr(reference: ComplexField, test: ComplexField) -> float:
    """Amplitude signal-to-noise ratio in dB.

    ``10 log10(sum |a_ref|^2 / sum (|a_ref| - |a_test|)^2)`` with ``a`` the
    modulus, so a global phase does not count as noise.  Identical
    amplitudes give :data:`SNR_CAP_DB`.
    """
    if reference.grid != test.grid:
        raise InvalidArgumentError("SNR needs both fields on the same grid")
    a_ref = np.abs(reference.data)
    a_test = np.abs(test.data)
    signal = float(np.sum(a_ref ** 2))
    if signal == 0:
        raise InvalidArgumentError("reference field has zero energy")
    noise = float(np.sum((a_ref - a_test) ** 2))
    if noise == 0:
        return SNR_CAP_DB
    return min(SNR_CAP_DB, 10.0 * np.log10(signal / noise))


def parseval_residual(field: ComplexField) -> float:
    """Relative mismatch between spatial and spectral energy of a field.

    Both sides carry their physical weights (``dx^d`` and ``df^d``) and the
    spectrum is the unitary FFT rescaled to a Fourier integral.
    """
    g = field.grid
    live = [n for n in (g.n_x, g.n_y) if n > 1]
    spatial = field.energy * g.pitch ** len(live)
    if spatial == 0:
        return 0.0
    spectrum = fft_uniform(field).data * g.pitch ** len(live) * np.sqrt(float(np.prod(live)))
    df = np.prod([1.0 / (n * g.pitch) for n in live])
    spectral = float(np.sum(np.abs(spectrum) ** 2)) * df
    return abs(spatial - spectral) / spatial


@dataclass
class EvaluationReport:
    """One row of a distance/eta sweep.

    ``n_freq_axis`` and ``f_boundary`` describe the x axis; the y-axis
    values are kept alongside for non-square bands.  ``snr_db`` is ``None``
    when no reference was supplied.
    """

    z: float
    method: str
    eta: Optional[float]
    snr_db: Optional[float]
    n_freq_axis: int
    f_boundary: float
    elapsed_s: float
    z_over_zc: float = float("nan")
    n_freq_y: int = 1
    f_boundary_y: float = 0.0
    output: Optional[ComplexField] = dc_field(default=None, repr=False, compare=False)

    def csv_row(self) -> list:
        return [
            f"{self.z:.10g}",
            f"{self.z_over_zc:.10g}",
            self.method,
            "" if self.eta is None else f"{self.eta:.10g}",
            f"{self.f_boundary:.10g}",
            str(self.n_freq_axis),
            "" if self.snr_db is None else f"{self.snr_db:.6f}",
            f"{self.elapsed_s:.6f}",
        ]


def benchmark(
    plan: PropagationPlan,
    field: ComplexField,
    config: OpticalConfig,
    repeats: int = 1,
    reference: Optional[ComplexField] = None,
    accuracy: TransformAccuracy = DEFAULT_ACCURACY,
) -> EvaluationReport:
    """Time ``repeats`` sequential propagations and report the median.

    The propagated field of the last run is attached as ``report.output``.
    """
    if repeats < 1:
        raise InvalidArgumentError(f"repeats must be >= 1, got {repeats}")
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = propagate(field, config, plan, accuracy)
        times.append(time.perf_counter() - t0)
    zc = critical_distance(config.grid, config.wavelength)
    return EvaluationReport(
        z=config.distance,
        method=plan.method.value,
        eta=plan.eta,
        snr_db=None if reference is None else snr(reference, out),
        n_freq_axis=plan.x.n_freq,
        f_boundary=plan.x.f_boundary,
        elapsed_s=statistics.median(times),
        z_over_zc=config.distance / zc,
        n_freq_y=plan.y.n_freq,
        f_boundary_y=plan.y.f_boundary,
        output=out,
    )
