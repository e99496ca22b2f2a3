"""Ground-truth propagators built on the Rayleigh-Sommerfeld impulse response.

Both oracles use the first Rayleigh-Sommerfeld kernel sampled at pixel
centers with the pixel area as quadrature weight:

* 2D fields: ``h = z / (2 pi) * (1 / r - j k) * exp(j k r) / r**2``
* 1D fields (``n_y == 1``, a line aperture invariant along y):
  ``h = j k z / (2 r) * H1(k r)`` with ``H1`` the Hankel function of the
  first kind, order 1.  This is the kernel whose angular spectrum is the
  1D transfer function.

:func:`rs_direct` sums the kernel directly; :func:`propagate_conv` does the
same linear convolution with three FFTs on the zero-padded window.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.special import hankel1e

from .errors import InvalidArgumentError, ResourceLimitError
from .field import ComplexField, crop_center, zero_pad
from .propagation import OpticalConfig

__all__ = ["OracleBudget", "DEFAULT_BUDGET", "rs_kernel", "rs_direct", "propagate_conv"]


@dataclass(frozen=True)
class OracleBudget:
    """Maximum number of kernel-times-sample products a direct sum may take."""

    max_work: int = 2 ** 31

    def __post_init__(self):
        if self.max_work <= 0:
            raise InvalidArgumentError(f"max_work must be positive, got {self.max_work}")


DEFAULT_BUDGET = OracleBudget()


def rs_kernel(config: OpticalConfig, offset_x: np.ndarray, offset_y: np.ndarray) -> np.ndarray:
    """Quadrature-weighted impulse response at lateral offsets (meters).

    ``offset_y`` is ignored for 1D grids.
    """
    z = config.distance
    if z == 0:
        raise InvalidArgumentError("the Rayleigh-Sommerfeld kernel is singular at z = 0")
    k = config.k
    lam = config.wavelength
    dx = config.grid.pitch
    az = abs(z)
    if config.grid.is_1d:
        rho2 = np.asarray(offset_x, dtype=np.float64) ** 2
    else:
        rho2 = np.asarray(offset_x, dtype=np.float64) ** 2 + np.asarray(offset_y, dtype=np.float64) ** 2
    r = np.sqrt(rho2 + z * z)
    # exp(j k r) split into exp(j k |z|) exp(j k (r - |z|)), each reduced modulo a cycle
    c0 = az / lam
    c1 = rho2 / (r + az) / lam
    phase = np.exp(2j * np.pi * (c0 - np.round(c0))) * np.exp(2j * np.pi * (c1 - np.round(c1)))
    if config.grid.is_1d:
        return (1j * k * z / (2.0 * r)) * hankel1e(1, k * r) * phase * dx
    return (z / (2.0 * np.pi)) * (1.0 / r - 1j * k) * phase / r ** 2 * dx * dx


def rs_direct(
    field: ComplexField,
    config: OpticalConfig,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> ComplexField:
    """Direct Rayleigh-Sommerfeld summation onto the source grid.

    Every target is accumulated source by source in row-major order with
    Kahan compensation, so the result does not depend on how the targets
    are batched.  Work is ``N_src * N_dst``.
    """
    if field.grid != config.grid:
        raise InvalidArgumentError("field grid differs from the configuration grid")
    if config.distance == 0:
        raise InvalidArgumentError("the Rayleigh-Sommerfeld kernel is singular at z = 0")
    g = field.grid
    n_pts = g.n_x * g.n_y
    if n_pts * n_pts > budget.max_work:
        raise ResourceLimitError(
            f"direct summation needs {n_pts * n_pts} kernel products, budget is {budget.max_work}"
        )
    # source and target grids coincide, so the kernel only depends on the index offset
    ox = np.arange(-(g.n_x - 1), g.n_x) * g.pitch
    oy = np.arange(-(g.n_y - 1), g.n_y) * g.pitch
    table = rs_kernel(config, ox[None, :], oy[:, None])

    total = np.zeros(g.shape, dtype=np.complex128)
    comp = np.zeros(g.shape, dtype=np.complex128)
    src = field.data
    for qy, qx in zip(*np.nonzero(src)):
        block = table[g.n_y - 1 - qy : 2 * g.n_y - 1 - qy, g.n_x - 1 - qx : 2 * g.n_x - 1 - qx]
        y = src[qy, qx] * block - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return field.with_data(total)


def propagate_conv(field: ComplexField, config: OpticalConfig) -> ComplexField:
    """Convolution (three-FFT) method with the sampled impulse response.

    The kernel is sampled over the whole ``2N`` padded window with zero
    offset at index ``N``, which makes the circular convolution linear on
    the central window.
    """
    if field.grid != config.grid:
        raise InvalidArgumentError("field grid differs from the configuration grid")
    if config.distance == 0:
        raise InvalidArgumentError("the Rayleigh-Sommerfeld kernel is singular at z = 0")
    g = field.grid
    padded = zero_pad(field)
    pg = padded.grid
    ox = (np.arange(pg.n_x) - pg.n_x // 2) * g.pitch
    oy = (np.arange(pg.n_y) - pg.n_y // 2) * g.pitch
    kernel = rs_kernel(config, ox[None, :], oy[:, None])
    axes = (1,) if g.is_1d else (0, 1)
    kernel_ft = scipy.fft.fftn(scipy.fft.ifftshift(kernel, axes=axes), axes=axes)
    out = scipy.fft.ifftn(scipy.fft.fftn(padded.data, axes=axes) * kernel_ft, axes=axes)
    return crop_center(padded.with_data(out), g.n_x, g.n_y)
