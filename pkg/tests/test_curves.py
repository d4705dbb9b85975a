"""Discrete curve calculus: derivatives, arc-length quantities, norms, I/O."""

import json

import numpy as np
import pytest

import sobocurve as sc
from sobocurve.curves import TWO_PI, scalar_l2_ds, scalar_l2_dtheta
from sobocurve.errors import ContractError, ImmersionError
from sobocurve.sampling import random_curve, random_field


def test_grid_validation():
    sc.Grid(16)
    sc.Grid(64, scheme_order=2)
    with pytest.raises(ContractError):
        sc.Grid(8)
    with pytest.raises(ContractError):
        sc.Grid(33)
    with pytest.raises(ContractError):
        sc.Grid(64, scheme_order=3)


def test_derivative_constant_is_zero():
    grid = sc.Grid(32)
    vals = np.full((32, 2), 3.7)
    assert np.max(np.abs(sc.derivative(vals, grid))) == 0.0


def test_derivative_circle_oracle():
    # Order-4 truncation of d/dtheta cos is h^4/30 = 1.21e-8 at N=256.
    grid = sc.Grid(256)
    th = grid.theta
    vals = np.stack([np.cos(th), np.sin(th)], axis=1)
    expect = np.stack([-np.sin(th), np.cos(th)], axis=1)
    assert np.max(np.abs(sc.derivative(vals, grid) - expect)) <= 1.3e-8


def test_derivative_fourth_order_convergence():
    errs = []
    for n in (64, 128):
        grid = sc.Grid(n)
        vals = np.sin(3 * grid.theta)[:, None] * np.ones((1, 2))
        expect = 3 * np.cos(3 * grid.theta)[:, None] * np.ones((1, 2))
        errs.append(np.max(np.abs(sc.derivative(vals, grid) - expect)))
    ratio = errs[0] / errs[1]
    assert 12.0 <= ratio <= 20.0


def test_derivative_length_mismatch():
    with pytest.raises(ContractError):
        sc.derivative(np.zeros((20, 2)), sc.Grid(32))


def test_arc_speed_circle():
    # The speed is constant to rounding at any N; its value carries the
    # order-4 truncation error, which drops below 1e-10 by N=1024.
    c = sc.make_circle(2.0, (0.5, -1.0), sc.Grid(64))
    assert np.max(c.arc_speed) - np.min(c.arc_speed) <= 1e-12
    fine = sc.make_circle(2.0, (0.5, -1.0), sc.Grid(1024))
    assert np.max(np.abs(fine.arc_speed - 2.0)) <= 1e-10 * 2.0


def test_arc_speed_bumpy_at_theta0():
    # |c'(0)| = r*sqrt(1 + eps^2 lam^2) from the explicit derivative.
    r, eps, lam = 1.5, 0.2, 4
    c = sc.make_bumpy_circle(r, eps, lam, sc.Grid(256))
    expect = r * np.sqrt(1.0 + eps**2 * lam**2)
    assert abs(c.arc_speed[0] - expect) <= 1e-5 * expect


def test_degenerate_curve_rejected():
    # A "curve" collapsing to a point has zero derivative everywhere.
    grid = sc.Grid(32)
    with pytest.raises(ImmersionError, match="not an immersion at resolution N=32"):
        sc.DiscreteCurve(grid, np.zeros((32, 2)))


def test_cusp_rejected():
    # Stall the parametrization: five consecutive equal samples force a
    # zero derivative at the middle one.
    grid = sc.Grid(64)
    samples = sc.make_circle(1.0, (0, 0), grid).samples.copy()
    samples[0:5] = samples[2]
    with pytest.raises(ImmersionError):
        sc.DiscreteCurve(grid, samples)


def test_arc_derivative_unit_tangent_and_curvature():
    grid = sc.Grid(256)
    r = 2.5
    c = sc.make_circle(r, (0, 0), grid)
    h = sc.TangentField(grid, c.samples)
    th = grid.theta
    tangent = sc.arc_derivative(c, h, 1).values
    expect = np.stack([-np.sin(th), np.cos(th)], axis=1)
    assert np.max(np.abs(tangent - expect)) <= 1e-8
    second = sc.arc_derivative(c, h, 2).values
    expect2 = -np.stack([np.cos(th), np.sin(th)], axis=1) / r
    assert np.max(np.abs(second - expect2)) <= 1e-8


def test_arc_derivative_k0_identity_and_errors():
    grid = sc.Grid(32)
    c = sc.make_circle(1.0, (0, 0), grid)
    h = sc.TangentField(grid, np.ones((32, 2)))
    assert sc.arc_derivative(c, h, 0).values is h.values
    with pytest.raises(ContractError):
        sc.arc_derivative(c, h, -1)
    h_other = sc.TangentField(sc.Grid(64), np.ones((64, 2)))
    with pytest.raises(ContractError):
        sc.arc_derivative(c, h_other, 1)


def test_arc_derivative_scaling_law():
    rng = np.random.default_rng(3)
    grid = sc.Grid(128)
    for _ in range(20):
        c = random_curve(grid, rng)
        h = random_field(grid, rng)
        rho = float(rng.uniform(0.2, 5.0))
        c_scaled = sc.DiscreteCurve(grid, rho * c.samples)
        for k in (1, 2, 3):
            lhs = sc.arc_derivative(c_scaled, h, k).values
            rhs = rho ** (-k) * sc.arc_derivative(c, h, k).values
            denom = np.max(np.abs(rhs))
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * denom


def test_integrate_ds_and_length():
    grid = sc.Grid(128)
    r = 3.0
    c = sc.make_circle(r, (0, 0), grid)
    assert sc.integrate_ds(c, np.ones(128)) == sc.curve_length(c)
    a = 2.5
    assert abs(sc.integrate_ds(c, np.full(128, a)) - a * sc.curve_length(c)) <= 1e-12
    fine = sc.make_circle(r, (0, 0), sc.Grid(4096))
    assert abs(sc.curve_length(fine) - TWO_PI * r) <= 1e-12 * TWO_PI * r
    # |D_s^2 c|^2 = 1 on the unit circle, so it integrates to 2*pi.
    c1 = sc.make_circle(1.0, (0, 0), sc.Grid(1024))
    h = sc.TangentField(c1.grid, c1.samples)
    d2 = sc.arc_derivative(c1, h, 2).values
    val = sc.integrate_ds(c1, np.sum(d2 * d2, axis=1))
    assert abs(val - TWO_PI) <= 1e-8


def test_length_homogeneity():
    rng = np.random.default_rng(5)
    grid = sc.Grid(64)
    c = random_curve(grid, rng)
    rho = 7.25
    scaled = sc.DiscreteCurve(grid, rho * c.samples)
    assert abs(sc.curve_length(scaled) - rho * sc.curve_length(c)) <= 1e-12 * sc.curve_length(scaled)


def test_bumpy_circle_length_window():
    # High-resolution quadrature oracle: 10.565597630116 (adaptive quad of
    # the analytic speed, abs err 3e-13).
    oracle = 10.565597630116
    c = sc.make_bumpy_circle(1.0, 0.25, 8, sc.Grid(1024))
    assert abs(sc.curve_length(c) - oracle) <= 1e-5
    c_fine = sc.make_bumpy_circle(1.0, 0.25, 8, sc.Grid(8192))
    assert abs(sc.curve_length(c_fine) - oracle) <= 1e-8
    # lower bound ell >= 4 eps r lam from integrating the |cos| part
    assert sc.curve_length(c) >= 4 * 0.25 * 1.0 * 8


def test_norms_on_circle():
    grid = sc.Grid(256)
    c = sc.make_circle(1.0, (0, 0), grid)
    h = sc.TangentField(grid, c.samples)
    assert abs(sc.norm(c, h, sc.NormKind.L2_DS) - np.sqrt(TWO_PI)) <= 1e-7
    assert abs(sc.norm(c, h, sc.NormKind.HN_DS, n=2) - np.sqrt(4 * np.pi)) <= 1e-7


def test_weight_identity():
    rng = np.random.default_rng(11)
    grid = sc.Grid(128)
    for _ in range(20):
        c = random_curve(grid, rng)
        u = rng.standard_normal(128)
        lhs = scalar_l2_dtheta(grid, u * np.sqrt(c.arc_speed))
        rhs = scalar_l2_ds(c, u)
        assert abs(lhs - rhs) <= 1e-13 * rhs


def test_norm_requires_positive_order():
    grid = sc.Grid(32)
    c = sc.make_circle(1.0, (0, 0), grid)
    h = sc.TangentField(grid, c.samples)
    with pytest.raises(ContractError):
        sc.norm(c, h, sc.NormKind.HN_DS, n=0)


def test_translation_and_rotation_invariance():
    rng = np.random.default_rng(17)
    grid = sc.Grid(64)
    c = random_curve(grid, rng)
    h = random_field(grid, rng)
    shifted = sc.DiscreteCurve(grid, c.samples + np.array([4.0, -2.0]))
    assert np.max(np.abs(c.arc_speed - shifted.arc_speed)) <= 1e-13
    ang = 0.77
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    c_rot = sc.DiscreteCurve(grid, c.samples @ rot.T)
    h_rot = sc.TangentField(grid, h.values @ rot.T)
    for k in (1, 2):
        lhs = sc.arc_derivative(c_rot, h_rot, k).values
        rhs = sc.arc_derivative(c, h, k).values @ rot.T
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_make_bumpy_circle_contracts():
    grid = sc.Grid(256)
    with pytest.raises(ContractError):
        sc.make_bumpy_circle(1.0, 0.4, 4, grid)
    with pytest.raises(ContractError):
        sc.make_bumpy_circle(1.0, 0.25, 9, grid)  # needs N >= 288
    with pytest.raises(ContractError):
        sc.make_bumpy_circle(-1.0, 0.25, 4, grid)
    with pytest.raises(ContractError):
        sc.make_bumpy_circle(1.0, 0.0, 4, grid)
    flat = sc.make_bumpy_circle(1.0, 0.0, 5, grid, allow_flat=True)
    assert abs(sc.curve_length(flat) - TWO_PI) <= 2e-7
    bumpy = sc.make_bumpy_circle(1.0, 0.25, 4, grid)
    assert float(np.min(bumpy.arc_speed)) >= 0.75


def test_reparametrize():
    grid = sc.Grid(512)
    c = sc.make_circle(1.0, (0, 0), grid)
    same = sc.reparametrize(c, grid.theta)
    assert np.max(np.abs(same.samples - c.samples)) <= 1e-12
    rotated = sc.reparametrize(c, grid.theta + 0.5)
    assert abs(sc.curve_length(rotated) - TWO_PI) <= 1e-8
    smooth = sc.reparametrize(c, grid.theta + 0.3 * np.sin(grid.theta))
    assert abs(sc.curve_length(smooth) - TWO_PI) <= 1e-6
    with pytest.raises(ContractError):
        sc.reparametrize(c, -grid.theta)


def test_curve_io_roundtrip(tmp_path):
    rng = np.random.default_rng(23)
    grid = sc.Grid(64)
    c = random_curve(grid, rng)
    path = tmp_path / "curve.json"
    sc.save_curve(c, path)
    back = sc.load_curve(path)
    assert np.max(np.abs(back.samples - c.samples)) <= 1e-15


def test_curve_csv_load(tmp_path):
    grid = sc.Grid(32)
    c = sc.make_circle(1.0, (0, 0), grid)
    path = tmp_path / "curve.csv"
    with open(path, "w") as fh:
        fh.write("theta,x,y\n")
        for th, (x, y) in zip(grid.theta, c.samples):
            fh.write(f"{th},{x},{y}\n")
    back = sc.load_curve(path)
    assert np.max(np.abs(back.samples - c.samples)) <= 1e-12


def test_malformed_curve_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"N": 32, "samples": [[0, 0]]}))
    with pytest.raises(ContractError):
        sc.load_curve(path)
