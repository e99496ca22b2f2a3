import numpy as np
import pytest

from ceasm.errors import InvalidArgumentError, ResourceLimitError
from ceasm.evaluation import snr
from ceasm.field import ComplexField, make_grid, rect_aperture
from ceasm.propagation import OpticalConfig, critical_distance
from ceasm.reference import OracleBudget, propagate_conv, rs_direct, rs_kernel

LAM = 532e-9


def _cfg(n, n_y, zf):
    g = make_grid(n, n_y, 1e-6)
    return OpticalConfig(LAM, zf * critical_distance(g, LAM), g)


@pytest.mark.parametrize("n_y", [1, 32])
def test_direct_and_convolution_agree(n_y):
    cfg = _cfg(32, n_y, 2.0)
    src = rect_aperture(cfg.grid, 12, min(n_y, 8))
    assert snr(rs_direct(src, cfg), propagate_conv(src, cfg)) > 100


def test_linearity():
    cfg = _cfg(24, 24, 1.0)
    rng = np.random.default_rng(0)
    a = ComplexField(cfg.grid, rng.normal(size=cfg.grid.shape))
    b = ComplexField(cfg.grid, 1j * rng.normal(size=cfg.grid.shape))
    for op in (rs_direct, propagate_conv):
        lhs = op(a.with_data(2 * a.data - b.data), cfg).data
        rhs = 2 * op(a, cfg).data - op(b, cfg).data
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_direct_sum_order_independent():
    cfg = _cfg(16, 16, 1.0)
    rng = np.random.default_rng(5)
    u = ComplexField(cfg.grid, rng.normal(size=cfg.grid.shape) + 1j * rng.normal(size=cfg.grid.shape))
    out = rs_direct(u, cfg).data
    # mirroring the source mirrors the target; the kernel is even in the offset
    flipped = rs_direct(u.with_data(u.data[::-1, ::-1]), cfg).data[::-1, ::-1]
    assert np.max(np.abs(out - flipped)) <= 1e-12 * np.max(np.abs(out))


def test_kernel_far_field_decay():
    cfg = _cfg(8, 8, 1.0)
    h = rs_kernel(cfg, np.array([0.0]), np.array([0.0]))
    # on axis |h| = z/(2 pi) |1/z - jk| / z^2 dx^2
    z = cfg.distance
    want = z / (2 * np.pi) * abs(1 / z - 1j * cfg.k) / z ** 2 * 1e-12
    assert abs(h[0]) == pytest.approx(want, rel=1e-12)


def test_budget_and_zero_distance():
    cfg = _cfg(64, 64, 1.0)
    src = rect_aperture(cfg.grid, 4, 4)
    with pytest.raises(ResourceLimitError):
        rs_direct(src, cfg, OracleBudget(1000))
    with pytest.raises(InvalidArgumentError):
        rs_direct(src, cfg.with_distance(0.0))
    with pytest.raises(InvalidArgumentError):
        propagate_conv(src, cfg.with_distance(0.0))
