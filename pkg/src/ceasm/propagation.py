"""Angular spectrum propagators and their frequency-boundary rules.

Five methods share one entry point, :func:`propagate`:

``AS``
    plain angular spectrum on the zero-padded window (FFT).
``BL``
    band-limited: as ``AS`` but the transfer function is zeroed beyond
    ``f_BL = N dx / (z lambda)``.
``ADAPTIVE``
    only the ``N_BL`` native frequency bins inside ``f_BL`` (NUFFT).
``BE``
    band-extended: ``2N`` frequencies spanning ``[-f_BE, f_BE)`` with
    ``f_BE = sqrt(N / (2 lambda z))`` (NUFFT).
``CE``
    controllable energy: the band is cut where the source spectrum has
    accumulated a fraction ``eta`` of a reference energy, and sampled with
    the fewest points the transfer function allows (NUFFT).

Two-dimensional fields use one band per axis.  By default the energy
search measures the energy inside a square band ``|f_x|, |f_y| <= f``, which
gives one boundary for both axes; ``band_shape="marginal"`` searches each
axis on its marginal energy profile instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .errors import InvalidArgumentError
from .field import ComplexField, GridSpec, crop_center, zero_pad
from .transforms import DEFAULT_ACCURACY, Nufft3Plan, TransformAccuracy, centered_fft

__all__ = [
    "Method",
    "ReferenceMode",
    "OpticalConfig",
    "AxisBand",
    "PropagationPlan",
    "SpectrumProfile",
    "transfer_function",
    "critical_distance",
    "boundary_bl",
    "samples_bl",
    "boundary_be",
    "source_spectrum",
    "energy_profile",
    "marginal_profiles",
    "square_profile",
    "search_fce",
    "samples_ce",
    "ce_boundaries",
    "plan",
    "propagate",
]

AXES = ("x", "y")
_ARRAY_AXIS = {"x": 1, "y": 0}


class Method(str, Enum):
    AS = "as"
    BL = "bl"
    ADAPTIVE = "adaptive"
    BE = "be"
    CE = "ce"


class ReferenceMode(str, Enum):
    """Energy the controllable-energy band is measured against."""

    E_BE = "be"
    E_BL = "bl"


NUFFT_METHODS = (Method.ADAPTIVE, Method.BE, Method.CE)


def _ceil(value: float) -> int:
    # ceiling that ignores rounding noise just above an integer
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return int(math.ceil(value))


def _even_up(n: int) -> int:
    return n + (n % 2)


@dataclass(frozen=True)
class OpticalConfig:
    """Wavelength, signed propagation distance and source grid."""

    wavelength: float
    distance: float
    grid: GridSpec

    def __post_init__(self):
        if not (np.isfinite(self.wavelength) and self.wavelength > 0):
            raise InvalidArgumentError(f"wavelength must be positive, got {self.wavelength}")
        if not np.isfinite(self.distance):
            raise InvalidArgumentError(f"distance must be finite, got {self.distance}")

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.wavelength

    def with_distance(self, distance: float) -> "OpticalConfig":
        return replace(self, distance=float(distance))


def _cycles_phase(cycles) -> np.ndarray:
    cycles = np.asarray(cycles, dtype=np.float64)
    return np.exp(2j * np.pi * (cycles - np.round(cycles)))


def transfer_function(config: OpticalConfig, f_x, f_y=0.0):
    """``exp(j k z sqrt(1 - (lambda f_x)^2 - (lambda f_y)^2))``, zero where evanescent.

    Broadcasts over array arguments.  The phase is split as
    ``k z + k z (sqrt(1 - q) - 1)`` and both terms are reduced modulo one
    cycle, which keeps long distances accurate.
    """
    lam, z = config.wavelength, config.distance
    fx = np.asarray(f_x, dtype=np.float64)
    fy = np.asarray(f_y, dtype=np.float64)
    q = (lam * fx) ** 2 + (lam * fy) ** 2
    propagating = q <= 1.0
    qc = np.where(propagating, q, 0.0)
    root_minus_one = -qc / (1.0 + np.sqrt(1.0 - qc))
    z_cycles = z / lam
    h = _cycles_phase(z_cycles) * _cycles_phase(z_cycles * root_minus_one)
    h = np.where(propagating, h, 0.0)
    if h.ndim == 0:
        return complex(h)
    return h


def critical_distance(grid: GridSpec, wavelength: float) -> float:
    """``z_c = 2 N dx^2 / lambda`` with ``N`` the larger unpadded axis."""
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be positive, got {wavelength}")
    n = max(grid.n_x, grid.n_y)
    return 2.0 * n * grid.pitch ** 2 / wavelength


def boundary_bl(config: OpticalConfig, axis: str = "x") -> float:
    """Alias-free band limit ``N dx / (|z| lambda)``, clamped to ``f_max``."""
    if config.distance == 0:
        raise InvalidArgumentError("band limit is undefined at z = 0")
    g = config.grid
    n = g.axis_size(axis)
    f = n * g.pitch / (abs(config.distance) * config.wavelength)
    return min(f, g.f_max)


def samples_bl(config: OpticalConfig, axis: str = "x") -> int:
    """Valid native-pitch sample count ``ceil(4 (N dx)^2 / (|z| lambda))``, capped at ``2N``."""
    if config.distance == 0:
        raise InvalidArgumentError("band limit is undefined at z = 0")
    g = config.grid
    n = g.axis_size(axis)
    count = _ceil(4.0 * (n * g.pitch) ** 2 / (abs(config.distance) * config.wavelength))
    return min(count, 2 * n)


def boundary_be(config: OpticalConfig, axis: str = "x") -> float:
    """Band-extended boundary ``sqrt(N / (2 lambda z))``, clamped to ``f_max``.

    Only defined for ``z > 0``; callers propagating backwards pass ``|z|``.
    """
    if config.distance <= 0:
        raise InvalidArgumentError(f"band-extended boundary needs z > 0, got {config.distance}")
    g = config.grid
    n = g.axis_size(axis)
    return min(math.sqrt(n / (2.0 * config.wavelength * config.distance)), g.f_max)


@dataclass(frozen=True, eq=False)
class SpectrumProfile:
    """One-sided energy spectral density and its running integral.

    ``density[m]`` holds the energy of the bins at ``+m df`` and ``-m df``
    (DC once), so ``cumulative[-1]`` is the total signal energy for any
    complex field.  For a symmetric spectrum this equals doubling the
    positive half.
    """

    freqs: np.ndarray
    density: np.ndarray
    cumulative: np.ndarray
    f_interval: float

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def index_of(self, f: float) -> int:
        """Bin ``ceil(f / df)``, clipped to the profile."""
        return min(max(_ceil(f / self.f_interval), 0), self.cumulative.size - 1)

    def energy_at(self, f: float) -> float:
        """Energy enclosed in ``[-f, f]`` rounded up to whole bins."""
        if f < 0:
            return 0.0
        return float(self.cumulative[self.index_of(f)])


def _profile_from_density(density: np.ndarray, f_interval: float) -> SpectrumProfile:
    n = density.size
    center = n // 2
    m_max = max(center, n - 1 - center)
    folded = np.zeros(m_max + 1)
    folded[: n - center] += density[center:]
    folded[1 : center + 1] += density[center - 1 :: -1]
    freqs = np.arange(m_max + 1) * f_interval
    cumulative = np.cumsum(folded) * f_interval
    return SpectrumProfile(freqs, folded, cumulative, float(f_interval))


def energy_profile(spectrum, f_interval: float) -> SpectrumProfile:
    """Profile of a centered 1D spectrum (DC at index ``n // 2``)."""
    a = np.asarray(spectrum, dtype=np.complex128).reshape(-1)
    if not f_interval > 0:
        raise InvalidArgumentError(f"frequency interval must be positive, got {f_interval}")
    return _profile_from_density(np.abs(a) ** 2, f_interval)


def source_spectrum(field: ComplexField) -> Tuple[np.ndarray, Dict[str, float]]:
    """Angular spectrum of the zero-padded field on the native frequency grid.

    Scaled as a Fourier integral (``dx`` per transformed axis), so the
    spectral energy equals ``sum |u|^2 dx^d``.  Returns the centered
    spectrum and the frequency pitch per axis.
    """
    g = field.grid
    padded = zero_pad(field)
    axes = tuple(_ARRAY_AXIS[a] for a in AXES if g.axis_size(a) > 1)
    spec = centered_fft(padded.data, axes=axes) * g.pitch ** len(axes)
    df = {a: 1.0 / (2 * g.axis_size(a) * g.pitch) for a in AXES if g.axis_size(a) > 1}
    return spec, df


def marginal_profiles(field: ComplexField) -> Dict[str, SpectrumProfile]:
    """Per-axis energy profiles of the padded source spectrum.

    The density along one axis is the spectral energy density summed over
    the other axis, so every profile integrates to the full signal energy.
    """
    spec, df = source_spectrum(field)
    s = np.abs(spec) ** 2
    out = {}
    for axis in df:
        other = "y" if axis == "x" else "x"
        dens = s.sum(axis=_ARRAY_AXIS[other]) * df.get(other, 1.0)
        out[axis] = _profile_from_density(dens, df[axis])
    return out


def square_profile(field: ComplexField) -> SpectrumProfile:
    """Energy inside the square band ``max(|f_x|, |f_y|) <= f``.

    Bins use the finer of the two native frequency pitches.  For a 1D grid
    this is the ordinary one-sided profile.
    """
    spec, df = source_spectrum(field)
    energy = np.abs(spec) ** 2
    for step in df.values():
        energy = energy * step
    df_ref = min(df.values())
    radius = np.zeros(spec.shape)
    for axis, step in df.items():
        n = spec.shape[_ARRAY_AXIS[axis]]
        f = np.abs(np.arange(n) - n // 2) * (step / df_ref)
        f = f[None, :] if axis == "x" else f[:, None]
        radius = np.maximum(radius, f)
    bins = np.ceil(radius - 1e-9).astype(np.int64)
    density = np.bincount(bins.ravel(), weights=energy.ravel()) / df_ref
    cumulative = np.cumsum(density) * df_ref
    return SpectrumProfile(np.arange(density.size) * df_ref, density, cumulative, float(df_ref))


def _abs_config(config: OpticalConfig) -> OpticalConfig:
    return config.with_distance(abs(config.distance))


def search_fce(
    profile: SpectrumProfile,
    config: OpticalConfig,
    eta: float,
    reference_mode: Union[ReferenceMode, str] = ReferenceMode.E_BE,
    axis: str = "x",
) -> float:
    """Smallest band edge enclosing ``eta`` times the reference energy.

    With ``E_BE`` the reference is the energy inside the band-extended
    boundary and the scan starts at ``ceil(f_BL / df)``; the result lies in
    ``[f_BL, f_BE]``.  With ``E_BL`` the reference is the energy inside
    ``f_BL`` and the scan starts at DC, so the band may end below ``f_BL``.
    """
    mode = ReferenceMode(reference_mode)
    if not (0.0 <= eta <= 1.0):
        raise InvalidArgumentError(f"eta must lie in [0, 1], got {eta}")
    if not profile.total > 0:
        raise InvalidArgumentError("source spectrum carries no energy")
    cfg = _abs_config(config)
    f_bl = boundary_bl(cfg, axis)
    df = profile.f_interval
    if mode is ReferenceMode.E_BE:
        f_be = boundary_be(cfg, axis)
        e_ref = profile.energy_at(f_be)
        start = profile.index_of(f_bl)
        upper = f_be
    else:
        e_ref = profile.energy_at(f_bl)
        start = 0
        upper = cfg.grid.f_max
    target = eta * e_ref
    tail = profile.cumulative[start:]
    reached = tail >= target
    j = start + (int(np.argmax(reached)) if reached.any() else tail.size - 1)
    return min(j * df, upper, cfg.grid.f_max)


def samples_ce(config: OpticalConfig, f_ce: float) -> int:
    """Minimum alias-free sample count ``ceil(4 lambda |z| f_ce^2)``, at least 1."""
    if not (f_ce > 0 and f_ce <= config.grid.f_max * (1 + 1e-12)):
        raise InvalidArgumentError(f"f_ce must lie in (0, f_max], got {f_ce}")
    return max(1, _ceil(4.0 * config.wavelength * abs(config.distance) * f_ce ** 2))


@dataclass(frozen=True)
class AxisBand:
    """Frequency sampling along one axis.

    Samples sit at ``(m - n_freq // 2) * f_interval`` for ``m`` in
    ``[0, n_freq)``.  ``h_cutoff`` (band-limited method only) zeroes the
    transfer function beyond that frequency.
    """

    f_boundary: float
    n_freq: int
    f_interval: float
    h_cutoff: Optional[float] = None

    def frequencies(self) -> np.ndarray:
        return (np.arange(self.n_freq) - self.n_freq // 2) * self.f_interval


_FLAT = AxisBand(0.0, 1, 0.0)


@dataclass(frozen=True)
class PropagationPlan:
    """A resolved method choice for one ``(method, z, eta)`` triple."""

    method: Method
    x: AxisBand
    y: AxisBand = _FLAT
    eta: Optional[float] = None
    reference_mode: Optional[ReferenceMode] = None

    @property
    def f_boundary(self) -> float:
        return self.x.f_boundary

    @property
    def n_freq(self) -> int:
        return self.x.n_freq

    @property
    def f_interval(self) -> float:
        return self.x.f_interval

    def band(self, axis: str) -> AxisBand:
        return self.x if axis == "x" else self.y


def _axis_band(method, config, axis, f_ce=None) -> AxisBand:
    g = config.grid
    n = g.axis_size(axis)
    if n == 1:
        return _FLAT
    df = 1.0 / (2 * n * g.pitch)
    if method is Method.AS:
        return AxisBand(g.f_max, 2 * n, df)
    if method is Method.BL:
        cutoff = g.f_max if config.distance == 0 else boundary_bl(config, axis)
        return AxisBand(g.f_max, 2 * n, df, h_cutoff=cutoff)
    cfg = _abs_config(config)
    if method is Method.ADAPTIVE:
        count = min(_even_up(samples_bl(cfg, axis)), 2 * n)
        return AxisBand(count * df / 2, count, df)
    if method is Method.BE:
        f_be = boundary_be(cfg, axis)
        return AxisBand(f_be, 2 * n, f_be / n)
    count = min(_even_up(samples_ce(cfg, f_ce)), 2 * n)
    return AxisBand(f_ce, count, 2 * f_ce / count)


def _dominant_axis(grid: GridSpec) -> str:
    return "x" if grid.n_x >= grid.n_y else "y"


def ce_boundaries(
    config: OpticalConfig,
    eta: float,
    reference_mode: Union[ReferenceMode, str] = ReferenceMode.E_BE,
    source: Optional[ComplexField] = None,
    band_shape: str = "square",
    profiles: Optional[Dict[str, SpectrumProfile]] = None,
) -> Dict[str, float]:
    """Controllable-energy boundary for every non-flat axis.

    ``profiles`` maps axis names to precomputed profiles (both axes share
    one :func:`square_profile` in square mode); otherwise they are computed
    from ``source``.
    """
    if band_shape not in ("square", "marginal"):
        raise InvalidArgumentError(f"band_shape must be 'square' or 'marginal', got {band_shape!r}")
    g = config.grid
    live = [a for a in AXES if g.axis_size(a) > 1]
    if profiles is None:
        if source is None:
            raise InvalidArgumentError("controllable-energy plan needs the source field")
        if source.grid != g:
            raise InvalidArgumentError("source field grid differs from the configuration grid")
        if band_shape == "square":
            sq = square_profile(source)
            profiles = {a: sq for a in live}
        else:
            profiles = marginal_profiles(source)
    cfg = _abs_config(config)
    if band_shape == "square":
        axis = _dominant_axis(g)
        f = search_fce(profiles[axis], cfg, eta, reference_mode, axis)
        return {a: f for a in live}
    return {a: search_fce(profiles[a], cfg, eta, reference_mode, a) for a in live}


def plan(
    method: Union[Method, str],
    config: OpticalConfig,
    eta: Optional[float] = None,
    reference_mode: Union[ReferenceMode, str] = ReferenceMode.E_BE,
    source: Optional[ComplexField] = None,
    band_shape: str = "square",
    profiles: Optional[Dict[str, SpectrumProfile]] = None,
) -> PropagationPlan:
    """Resolve boundary, sample count and frequency interval per axis.

    ``CE`` needs ``eta`` and either the ``source`` field or precomputed
    ``profiles`` (see :func:`ce_boundaries`); the other methods ignore them.
    Sample counts are rounded up to even numbers and capped at ``2N``.
    """
    method = Method(method)
    mode = None
    f_ce = {}
    if method is Method.CE:
        if eta is None:
            raise InvalidArgumentError("controllable-energy plan needs eta")
        mode = ReferenceMode(reference_mode)
        f_ce = ce_boundaries(config, eta, mode, source, band_shape, profiles)
    else:
        eta = None
    bands = [_axis_band(method, config, a, f_ce.get(a)) for a in AXES]
    return PropagationPlan(method, bands[0], bands[1], eta=eta, reference_mode=mode)


def _check_plan(config: OpticalConfig, p: PropagationPlan) -> None:
    g = config.grid
    for axis in AXES:
        n = g.axis_size(axis)
        band = p.band(axis)
        if n == 1:
            if band.n_freq != 1:
                raise InvalidArgumentError(f"axis {axis} is flat but the plan samples {band.n_freq} frequencies")
            continue
        if band.n_freq < 1 or not band.f_interval > 0:
            raise InvalidArgumentError(f"plan for axis {axis} has no frequency samples")
        if p.method in (Method.AS, Method.BL) and band.n_freq != 2 * n:
            raise InvalidArgumentError(
                f"{p.method.value} plan must sample 2N = {2 * n} frequencies along {axis}, got {band.n_freq}"
            )
        if band.f_boundary > g.f_max * (1 + 1e-9):
            raise InvalidArgumentError(f"plan boundary {band.f_boundary} exceeds f_max {g.f_max}")


def _propagate_fft(field: ComplexField, config: OpticalConfig, p: PropagationPlan) -> ComplexField:
    g = field.grid
    padded = zero_pad(field)
    axes = tuple(_ARRAY_AXIS[a] for a in AXES if g.axis_size(a) > 1)
    spec = centered_fft(padded.data, axes=axes)
    freqs = {}
    for axis in AXES:
        band = p.band(axis)
        freqs[axis] = band.frequencies() if g.axis_size(axis) > 1 else np.zeros(1)
    fy, fx = np.meshgrid(freqs["y"], freqs["x"], indexing="ij", sparse=True)
    h = transfer_function(config, fx, fy)
    if p.method is Method.BL:
        cx = p.x.h_cutoff if p.x.h_cutoff is not None else np.inf
        cy = p.y.h_cutoff if p.y.h_cutoff is not None else np.inf
        h = h * ((np.abs(fx) <= cx) & (np.abs(fy) <= cy))
    out = centered_fft(spec * h, axes=axes, inverse=True)
    return crop_center(padded.with_data(out), g.n_x, g.n_y)


def _propagate_nufft(
    field: ComplexField, config: OpticalConfig, p: PropagationPlan, accuracy: TransformAccuracy
) -> ComplexField:
    g = field.grid
    live = [a for a in AXES if g.axis_size(a) > 1]
    freqs = {a: (p.band(a).frequencies() if a in live else np.zeros(1)) for a in AXES}
    spec = field.data
    for axis in live:
        fwd = Nufft3Plan(g.coords(axis), freqs[axis], sign=-1, accuracy=accuracy)
        spec = fwd.apply(spec, axis=_ARRAY_AXIS[axis]) * g.pitch
    fy, fx = np.meshgrid(freqs["y"], freqs["x"], indexing="ij", sparse=True)
    out = spec * transfer_function(config, fx, fy)
    for axis in live:
        inv = Nufft3Plan(freqs[axis], g.coords(axis), sign=1, accuracy=accuracy)
        out = inv.apply(out, axis=_ARRAY_AXIS[axis]) * p.band(axis).f_interval
    return field.with_data(out)


def propagate(
    field: ComplexField,
    config: OpticalConfig,
    plan: PropagationPlan,
    accuracy: TransformAccuracy = DEFAULT_ACCURACY,
) -> ComplexField:
    """Propagate ``field`` by ``config.distance`` following ``plan``.

    ``AS`` and ``BL`` pad to ``2N``, multiply the FFT spectrum by the
    transfer function and crop.  The NUFFT methods evaluate the spectrum as
    a Fourier integral (weight ``dx``) at the plan's frequencies, apply the
    transfer function and sum back with weight ``f_interval``; with the
    native ``2N`` grid this reproduces the FFT route exactly.
    """
    if field.grid != config.grid:
        raise InvalidArgumentError("field grid differs from the configuration grid")
    _check_plan(config, plan)
    if plan.method in (Method.AS, Method.BL):
        return _propagate_fft(field, config, plan)
    return _propagate_nufft(field, config, plan, accuracy)
