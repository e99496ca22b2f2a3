"""Uniform FFT, direct DFT summation and the type-3 nonuniform FFT.

The type-3 transform evaluates

    out[k] = sum_j c[j] * exp(sign * 2j*pi * x[j] * f[k])

for arbitrary real ``x`` and ``f``.  It is computed in two Gaussian
gridding stages with oversampling factor 2:

1. sources are spread with a Gaussian onto a uniform auxiliary grid in
   ``x``; the Fourier integral of the spread function at ``f[k]`` becomes a
   trapezoid sum over that grid,
2. that trapezoid sum is a trigonometric polynomial evaluated at
   nonuniform points, done by deconvolving, one FFT on a twice oversampled
   grid and Gaussian interpolation to the targets.

Finally both kernel transforms are divided out.  All spreading and
interpolation is stored as sparse matrices so one plan can be applied to
many vectors (one per row of a 2D field) at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import scipy.fft
import scipy.sparse

from .errors import InvalidArgumentError, ResourceLimitError
from .field import ComplexField

__all__ = [
    "NonuniformPoints",
    "TransformAccuracy",
    "DEFAULT_ACCURACY",
    "fft_uniform",
    "centered_fft",
    "dft_direct",
    "Nufft3Plan",
    "nufft3_forward",
    "nufft3_inverse",
    "spreading_width",
]

# oracle guard: sources * targets
DFT_WORK_LIMIT = 2 ** 26
# largest auxiliary grid a plan may allocate
NUFFT_GRID_LIMIT = 2 ** 24

# Half-width (grid cells) of the truncated Gaussian per tolerance.  With
# oversampling 2 and tau = w / (3 pi) the measured max relative error is
# about 10**(-0.9 w); each entry keeps one to two decades of margin.  Below
# ~1e-12 the floor is set by phase rounding, not the kernel.
_WIDTH_TABLE = {1e-4: 6, 1e-6: 9, 1e-9: 12, 1e-12: 15}


@dataclass(frozen=True)
class NonuniformPoints:
    """Real sample locations along one axis (meters or cycles/m)."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64, copy=True).reshape(-1)
        if arr.size == 0:
            raise InvalidArgumentError("point set must not be empty")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("point coordinates must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def __len__(self):
        return self.coords.size


@dataclass(frozen=True)
class TransformAccuracy:
    """Requested relative tolerance of a nonuniform transform."""

    epsilon: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1e-1):
            raise InvalidArgumentError(f"epsilon must lie in (0, 0.1), got {self.epsilon}")


DEFAULT_ACCURACY = TransformAccuracy(1e-9)


def spreading_width(epsilon: float) -> int:
    """Gaussian half-width (grid cells) that meets ``epsilon``."""
    tabulated = [eps for eps in _WIDTH_TABLE if eps <= epsilon]
    if tabulated and max(tabulated) == max(_WIDTH_TABLE):
        # looser than every table entry
        return int(math.ceil(-math.log10(epsilon) / 0.9)) + 1
    if tabulated:
        return _WIDTH_TABLE[max(tabulated)]
    return int(math.ceil(-math.log10(epsilon) / 0.9)) + 2


def centered_fft(data: np.ndarray, axes=(-2, -1), inverse: bool = False, norm: str = "backward") -> np.ndarray:
    """FFT with the origin sample and the DC bin at index ``n // 2``."""
    shifted = scipy.fft.ifftshift(data, axes=axes)
    if inverse:
        out = scipy.fft.ifftn(shifted, axes=axes, norm=norm)
    else:
        out = scipy.fft.fftn(shifted, axes=axes, norm=norm)
    return scipy.fft.fftshift(out, axes=axes)


def fft_uniform(field: ComplexField, direction: str = "forward") -> ComplexField:
    """Unitary centered DFT of a field; ``inverse(forward(u)) == u``.

    The returned field reuses the input grid as a container; its samples are
    spectrum bins with DC at index ``n // 2`` on every axis.
    """
    if direction not in ("forward", "inverse"):
        raise InvalidArgumentError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    out = centered_fft(field.data, inverse=(direction == "inverse"), norm="ortho")
    return field.with_data(out)


def _points(p) -> np.ndarray:
    if isinstance(p, NonuniformPoints):
        return p.coords
    return NonuniformPoints(p).coords


def _unit_phase(x: np.ndarray, f: np.ndarray, sign: int) -> np.ndarray:
    # reduce x*f to [-0.5, 0.5] cycles before scaling by 2 pi
    p = np.multiply.outer(x, f) if np.ndim(x) and np.ndim(f) else x * f
    p = p - np.round(p)
    return np.exp((sign * 2j * np.pi) * p)


def dft_direct(
    sources,
    strengths: Iterable[complex],
    targets,
    sign: int = -1,
) -> np.ndarray:
    """Reference O(M*K) evaluation of ``sum_j c_j exp(sign 2j pi x_j f_k)``.

    Terms are accumulated source by source, so every output is summed in
    source order.
    """
    if sign not in (-1, 1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign}")
    x = _points(sources)
    f = _points(targets)
    c = np.asarray(strengths, dtype=np.complex128).reshape(-1)
    if c.size != x.size:
        raise InvalidArgumentError(f"{c.size} strengths for {x.size} sources")
    if x.size * f.size > DFT_WORK_LIMIT:
        raise ResourceLimitError(
            f"direct DFT of {x.size} x {f.size} terms exceeds the limit of {DFT_WORK_LIMIT}"
        )
    out = np.zeros(f.size, dtype=np.complex128)
    for xj, cj in zip(x, c):
        if cj != 0:
            out += cj * _unit_phase(xj, f, sign)
    return out


class Nufft3Plan:
    """Precomputed type-3 transform from fixed sources to fixed targets.

    Parameters
    ----------
    sources : array_like
        Real source locations ``x_j``.
    targets : array_like
        Real target frequencies ``f_k`` (the roles of space and frequency are
        interchangeable; the inverse transform swaps them).
    sign : {-1, +1}
        Sign of the exponent.
    accuracy : TransformAccuracy
        Requested relative tolerance.

    The plan holds only read-only arrays; :meth:`apply` allocates its own
    work buffers, so a plan may be shared between threads.
    """

    def __init__(self, sources, targets, sign: int = -1, accuracy: TransformAccuracy = DEFAULT_ACCURACY):
        if sign not in (-1, 1):
            raise InvalidArgumentError(f"sign must be +1 or -1, got {sign}")
        x = _points(sources)
        f = _points(targets)
        self.n_sources = x.size
        self.n_targets = f.size
        self.sign = sign
        self.accuracy = accuracy

        w = spreading_width(accuracy.epsilon)
        tau = w / (3.0 * np.pi)

        x_center = 0.5 * (x.max() + x.min())
        x_half = 0.5 * (x.max() - x.min())
        f_center = 0.5 * (f.max() + f.min())
        f_half = 0.5 * (f.max() - f.min())
        x_rel = x - x_center
        f_rel = f - f_center

        # auxiliary grid spacing: target angular frequencies land in [-pi/2, pi/2]
        s_half = 2.0 * np.pi * f_half
        if s_half > 0:
            h = np.pi / (2.0 * s_half)
        else:
            h = x_half if x_half > 0 else 1.0
        if x_half / h > NUFFT_GRID_LIMIT:
            raise ResourceLimitError(
                f"space-bandwidth product {x_half * f_half:.3g} is too large for a {NUFFT_GRID_LIMIT} grid"
            )
        half_modes = int(math.ceil(x_half / h)) + w + 1
        n_modes = 2 * half_modes + 1
        n_fine = scipy.fft.next_fast_len(2 * n_modes)
        if n_fine > NUFFT_GRID_LIMIT:
            raise ResourceLimitError(f"oversampled grid of {n_fine} points exceeds {NUFFT_GRID_LIMIT}")
        self.n_fine = n_fine
        self.spread_width = w

        # stage 1: spread sources onto modes l in [-half_modes, half_modes]
        u = x_rel / h
        offsets = np.arange(-w + 1, w + 1)
        l_idx = np.floor(u)[:, None].astype(np.int64) + offsets[None, :]
        psi = np.exp(-((l_idx - u[:, None]) ** 2) / (4.0 * tau))
        pre_phase = _unit_phase(x_rel, np.array(f_center), sign)
        # stage-2 deconvolution of the periodic Gaussian, folded into the rows
        tau2 = tau * (2.0 * np.pi / n_fine) ** 2
        g_hat = np.sqrt(tau2 / np.pi) * np.exp(-tau2 * l_idx.astype(np.float64) ** 2)
        vals = psi * pre_phase[:, None] / g_hat
        cols = np.repeat(np.arange(x.size), offsets.size)
        self._spread = scipy.sparse.csr_matrix(
            (vals.ravel(), (np.mod(l_idx, n_fine).ravel(), cols)), shape=(n_fine, x.size)
        )

        # stage 2: interpolate the oversampled periodic grid at t_k = 2 pi f_k h
        t = 2.0 * np.pi * f_rel * h
        v = t * n_fine / (2.0 * np.pi)
        m_idx = np.floor(v)[:, None].astype(np.int64) + offsets[None, :]
        gauss = np.exp(-((v[:, None] - m_idx) ** 2) / (4.0 * tau))
        rows = np.repeat(np.arange(f.size), offsets.size)
        self._interp = scipy.sparse.csr_matrix(
            (gauss.ravel().astype(np.complex128), (rows, np.mod(m_idx, n_fine).ravel())),
            shape=(f.size, n_fine),
        )
        psi_hat = np.sqrt(4.0 * np.pi * tau) * np.exp(-tau * t ** 2)
        self._post = _unit_phase(np.array(x_center), f, sign) / (psi_hat * n_fine)

    def apply(self, data: np.ndarray, axis: int = -1) -> np.ndarray:
        """Transform ``data`` along ``axis`` (length ``n_sources``)."""
        arr = np.asarray(data, dtype=np.complex128)
        if arr.shape[axis] != self.n_sources:
            raise InvalidArgumentError(
                f"axis {axis} has length {arr.shape[axis]}, plan expects {self.n_sources}"
            )
        moved = np.moveaxis(arr, axis, 0)
        batch_shape = moved.shape[1:]
        flat = np.ascontiguousarray(moved.reshape(self.n_sources, -1))
        grid = self._spread @ flat
        if self.sign < 0:
            grid = scipy.fft.fft(grid, axis=0, overwrite_x=True)
        else:
            grid = scipy.fft.ifft(grid, axis=0, overwrite_x=True, norm="forward")
        out = self._interp @ grid
        out *= self._post[:, None]
        out = out.reshape((self.n_targets,) + batch_shape)
        return np.moveaxis(out, 0, axis)


def nufft3_forward(
    sources,
    strengths,
    targets,
    accuracy: TransformAccuracy = DEFAULT_ACCURACY,
) -> np.ndarray:
    """``out_k = sum_j strengths_j exp(-2j pi x_j f_k)`` to relative tolerance ``accuracy``."""
    c = np.asarray(strengths, dtype=np.complex128).reshape(-1)
    plan = Nufft3Plan(sources, targets, sign=-1, accuracy=accuracy)
    return plan.apply(c)


def nufft3_inverse(
    freqs,
    spectrum,
    targets,
    quad_weight: Union[float, np.ndarray] = 1.0,
    accuracy: TransformAccuracy = DEFAULT_ACCURACY,
) -> np.ndarray:
    """``out_i = sum_m w_m A_m exp(+2j pi f_m x_i)``.

    ``quad_weight`` is the frequency quadrature step (scalar or one weight
    per frequency sample).
    """
    a = np.asarray(spectrum, dtype=np.complex128).reshape(-1)
    plan = Nufft3Plan(freqs, targets, sign=1, accuracy=accuracy)
    return plan.apply(a * np.asarray(quad_weight))
