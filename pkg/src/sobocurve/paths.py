"""Paths of curves: energy, length, radial closed forms, geodesic BVP.

A path is T+1 curve slices on a shared grid over the unit time
interval.  Energy uses the midpoint discretization

    E = dt * sum_m G_{(c_m + c_{m+1})/2}(v_m, v_m),   v_m = (c_{m+1} - c_m)/dt,

which is second-order in T and symmetric under time reversal.  The
solver minimizes E over the interior slices by limited-memory
quasi-Newton descent, seeded with a frozen-coefficient spectral
preconditioner and guarded by a monotone backtracking line search; the
analytic gradient is the production path and is certified against
finite differences by gradient_check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.integrate import quad

from .curves import (
    DiscreteCurve,
    Grid,
    TangentField,
    arc_derivative,
    curve_length,
    integrate_ds,
)
from .errors import ContractError, ImmersionError, NumericalError
from .metric import MetricConfig, coefficient_deriv, coefficient_eval


@dataclass(frozen=True)
class CurvePath:
    """T+1 curve slices over [0, 1] on a shared grid."""

    grid: Grid
    slices: tuple

    def __post_init__(self):
        if len(self.slices) < 2:
            raise ContractError("a path needs at least two slices")
        for c in self.slices:
            if c.grid != self.grid:
                raise ContractError("all slices must share the path grid")
        object.__setattr__(self, "slices", tuple(self.slices))

    @property
    def T(self) -> int:
        return len(self.slices) - 1

    @property
    def dt(self) -> float:
        return 1.0 / self.T


@dataclass
class SolverOptions:
    max_iters: int = 500
    grad_tol: float = 1e-6
    T: int = 32
    armijo: float = 1e-4
    backtrack_factor: float = 0.5
    initial_path: CurvePath | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ContractError("max_iters must be >= 1")
        if self.grad_tol <= 0:
            raise ContractError("grad_tol must be positive")
        if self.T < 2:
            raise ContractError("T must be >= 2 so the path has interior slices")


@dataclass
class GeodesicResult:
    path: CurvePath
    energy: float
    length: float
    iterations: int
    converged: bool
    gradient_norm_final: float
    energy_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "length": self.length,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_norm_final": self.gradient_norm_final,
            "energy_trace": self.energy_trace,
        }


def linear_path(c0: DiscreteCurve, c1: DiscreteCurve, T: int) -> CurvePath:
    """Slice-wise convex combination; errors if a slice degenerates."""
    if c0.grid != c1.grid:
        raise ContractError("endpoint curves live on different grids")
    if T < 1:
        raise ContractError("T must be >= 1")
    slices = []
    for m in range(T + 1):
        t = m / T
        try:
            slices.append(DiscreteCurve(c0.grid, (1.0 - t) * c0.samples + t * c1.samples))
        except ImmersionError as exc:
            raise ImmersionError(
                f"linear path degenerates at t={t:.6g}: {exc}"
            ) from exc
    return CurvePath(c0.grid, tuple(slices))


def _dtheta(values: np.ndarray, grid: Grid) -> np.ndarray:
    """derivative() along axis 1 of a stacked (T, N, ...) array."""
    h = grid.spacing
    if grid.scheme_order == 2:
        return (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2.0 * h)
    return (
        8.0 * (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1))
        - (np.roll(values, -2, axis=1) - np.roll(values, 2, axis=1))
    ) / (12.0 * h)


def _stack(path: CurvePath) -> np.ndarray:
    return np.stack([c.samples for c in path.slices])


def _interval_energies(cfg: MetricConfig, grid: Grid, stacked, dt: float) -> np.ndarray:
    """Per-interval G values for all T intervals at once; shape (T,)."""
    w = grid.weight
    cb = 0.5 * (stacked[:-1] + stacked[1:])
    v = (stacked[1:] - stacked[:-1]) / dt
    dcb = _dtheta(cb, grid)
    s = np.sqrt(np.sum(dcb * dcb, axis=2))
    if np.any(np.min(s, axis=1) < 1e-12 * np.max(s, axis=1)):
        raise ImmersionError(f"midpoint slice not an immersion at N={grid.n_points}")
    inv_s = 1.0 / s
    lengths = w * np.sum(s, axis=1)
    values = np.zeros(len(lengths))
    u = v
    for k in range(cfg.n + 1):
        if k > 0:
            u = _dtheta(u, grid) * inv_s[:, :, None]
        term = cfg.terms.get(k)
        if term is None:
            continue
        a_k = np.array([coefficient_eval(term, L) for L in lengths])
        values += a_k * (w * np.einsum("tnd,tnd,tn->t", u, u, s))
    return values


def path_energy(cfg: MetricConfig, path: CurvePath) -> float:
    """Midpoint-discretized Riemannian path energy."""
    return path.dt * float(
        np.sum(_interval_energies(cfg, path.grid, _stack(path), path.dt))
    )


def path_length(cfg: MetricConfig, path: CurvePath) -> float:
    """Midpoint-discretized path length; length^2 <= energy on [0,1]."""
    g = _interval_energies(cfg, path.grid, _stack(path), path.dt)
    return path.dt * float(np.sum(np.sqrt(np.maximum(g, 0.0))))


def reverse_path(path: CurvePath) -> CurvePath:
    return CurvePath(path.grid, tuple(reversed(path.slices)))


def moments(c0: DiscreteCurve, n: int) -> np.ndarray:
    """M_k = integral |D_s^k c0|^2 ds for k = 0..n; all strictly positive."""
    out = np.empty(n + 1)
    h = TangentField(c0.grid, c0.samples)
    for k in range(n + 1):
        dk = arc_derivative(c0, h, k)
        out[k] = integrate_ds(c0, np.sum(dk.values**2, axis=1))
    if np.any(out <= 0):
        raise NumericalError(f"nonpositive curve moment: {out}")
    return out


def radial_path_length(
    cfg: MetricConfig, c0: DiscreteCurve, R_from: float, R_to: float
) -> float:
    """Length of the scaling path r*c0, r from R_from to R_to.

    Closed form: integral sqrt(sum_k a_k(r*ell0) r^(1-2k) M_k) dr with the
    moments M_k of the base curve.
    """
    if R_from <= 0 or R_to <= 0:
        raise ContractError("radial endpoints must be positive")
    if R_from == R_to:
        return 0.0
    ell0 = curve_length(c0)
    mk = moments(c0, cfg.n)

    def speed(r: float) -> float:
        total = 0.0
        for k in range(cfg.n + 1):
            a_k = cfg.coefficient(k, r * ell0)
            if a_k != 0.0:
                total += a_k * r ** (1 - 2 * k) * mk[k]
        return math.sqrt(total)

    lo, hi = min(R_from, R_to), max(R_from, R_to)
    value, err = quad(speed, lo, hi, epsrel=1e-8, limit=200)
    if not math.isfinite(value) or err > 1e-4 * max(1.0, abs(value)):
        raise NumericalError(
            f"radial length quadrature failed on [{lo}, {hi}] (err={err})"
        )
    return value


# ---------------------------------------------------------------------------
# Analytic gradient of the discrete energy.
#
# Per interval, with midpoint curve cb, speed s = |D cb|, length
# L = w * sum s, arc-derivative fields u_k = (diag(1/s) D)^k v and
# Q_k = w * sum |u_k|^2 s:
#
#   G = sum_k a_k(L) Q_k
#
# The v-gradient is 2 sum_k a_k (M^T)^k (w s u_k) with M = diag(1/s) D and
# M^T x = -D(x / s) (the periodic central-difference matrix is
# antisymmetric).  The cb-gradient flows through s only: collect the
# sensitivity phi_j = dG/ds_j and push it back via
# ds_j = <t_j, (D dcb)_j>, t = D cb / s, giving grad_cb = -D(phi * t).
# ---------------------------------------------------------------------------


def _stacked_energy_and_gradient(cfg: MetricConfig, grid: Grid, stacked, dt: float):
    """Energy and per-interval gradients for a stacked (T+1, N, d) path.

    Vectorized across the T intervals; returns (energy, grad) with grad
    of shape (T-1, N, d) for the interior slices.
    """
    w = grid.weight
    cb = 0.5 * (stacked[:-1] + stacked[1:])
    v = (stacked[1:] - stacked[:-1]) / dt
    dcb = _dtheta(cb, grid)
    s = np.sqrt(np.sum(dcb * dcb, axis=2))
    if np.any(np.min(s, axis=1) < 1e-12 * np.max(s, axis=1)):
        raise ImmersionError(f"midpoint slice not an immersion at N={grid.n_points}")
    inv_s = 1.0 / s
    lengths = w * np.sum(s, axis=1)

    u = [v]
    for _ in range(cfg.n):
        u.append(_dtheta(u[-1], grid) * inv_s[:, :, None])
    coeffs = {}
    dcoeffs = {}
    q = {}
    for k, term in cfg.terms.items():
        coeffs[k] = np.array([coefficient_eval(term, L) for L in lengths])
        dcoeffs[k] = np.array([coefficient_deriv(term, L) for L in lengths])
        q[k] = w * np.einsum("tnd,tnd,tn->t", u[k], u[k], s)

    values = sum(coeffs[k] * q[k] for k in coeffs)

    grad_v = np.zeros_like(v)
    phi = np.broadcast_to(
        (w * sum(dcoeffs[k] * q[k] for k in coeffs))[:, None], s.shape
    ).copy()
    for k in coeffs:
        a_k = coeffs[k][:, None]
        if np.all(a_k == 0.0) and np.all(dcoeffs[k] == 0.0):
            continue
        y = (w * s)[:, :, None] * u[k]
        for j in range(k):
            # y = (M^T)^j (w s u_k); pair with u_{k-j} before applying M^T.
            phi += a_k * (-2.0 * inv_s) * np.einsum("tnd,tnd->tn", y, u[k - j])
            y = -_dtheta(y * inv_s[:, :, None], grid)
        grad_v += 2.0 * a_k[:, :, None] * y
        phi += a_k * w * np.sum(u[k] * u[k], axis=2)

    tangent = dcb * inv_s[:, :, None]
    grad_cb = -_dtheta(phi[:, :, None] * tangent, grid)

    energy = dt * float(np.sum(values))
    grad = dt * 0.5 * (grad_cb[:-1] + grad_cb[1:]) + (grad_v[:-1] - grad_v[1:])
    return energy, grad


def energy_and_gradient(cfg: MetricConfig, path: CurvePath):
    """Energy plus its Euclidean gradient w.r.t. the interior slices.

    Returns (energy, grad) with grad of shape (T-1, N, d); the endpoint
    slices are fixed and carry no gradient.
    """
    return _stacked_energy_and_gradient(cfg, path.grid, _stack(path), path.dt)


def gradient_check(
    cfg: MetricConfig,
    path: CurvePath,
    n_coords: int = 20,
    step: float = 1e-6,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative deviation of the analytic gradient vs central FD."""
    if rng is None:
        rng = np.random.default_rng(0)
    if path.T < 2:
        raise ContractError("gradient check needs at least one interior slice")
    _, grad = energy_and_gradient(cfg, path)
    scale = np.max(np.abs(grad))
    base = [c.samples.copy() for c in path.slices]
    n, d = base[0].shape
    worst = 0.0
    for _ in range(n_coords):
        m = int(rng.integers(1, path.T))
        j = int(rng.integers(0, n))
        axis = int(rng.integers(0, d))

        def energy_at(delta):
            slices = [s.copy() for s in base]
            slices[m][j, axis] += delta
            p = CurvePath(path.grid, tuple(DiscreteCurve(path.grid, s) for s in slices))
            return path_energy(cfg, p)

        # Richardson-extrapolated central differences: spike perturbations
        # are rough fields, so the plain h^2 truncation term is large.
        fd_h = (energy_at(step) - energy_at(-step)) / (2.0 * step)
        fd_2h = (energy_at(2 * step) - energy_at(-2 * step)) / (4.0 * step)
        fd = (4.0 * fd_h - fd_2h) / 3.0
        an = grad[m - 1, j, axis]
        # Normalize against the gradient's sup norm so the FD oracle's own
        # roundoff floor on near-zero entries does not register as error.
        denom = max(abs(fd), abs(an), scale, 1e-12)
        worst = max(worst, abs(fd - an) / denom)
    return worst


def _spectral_preconditioner(cfg: MetricConfig, grid: Grid, c0, c1, T: int, dt: float):
    """Inverse of the frozen-coefficient energy Hessian, as a linear map.

    The Hessian of the discrete energy is approximately
    (2/dt) L_time (x) A, with L_time the Dirichlet second-difference
    matrix in t and A the spatial operator sum_k a_k (-D_s^2)^k weighted
    by ds.  Freezing speed and length at their endpoint means makes both
    factors diagonal under a DST in time and an FFT in theta, so the
    inverse is a cheap fixed SPD map.  It is only used to seed the
    quasi-Newton direction, so the approximation does not affect what
    the solver converges to.
    """
    n_pts = grid.n_points
    s_bar = 0.5 * (float(np.mean(c0.arc_speed)) + float(np.mean(c1.arc_speed)))
    l_bar = 0.5 * (curve_length(c0) + curve_length(c1))
    modes = np.fft.rfftfreq(n_pts, d=1.0 / n_pts)
    symbol = np.zeros_like(modes)
    for k, term in cfg.terms.items():
        symbol += coefficient_eval(term, l_bar) * (modes / s_bar) ** (2 * k)
    symbol *= s_bar * grid.weight * n_pts
    j = np.arange(1, T)
    lam_t = (2.0 / dt) * 4.0 * np.sin(np.pi * j / (2 * T)) ** 2
    denom = lam_t[:, None, None] * symbol[None, :, None]

    def apply(grad):
        out = scipy.fft.dst(grad, type=1, axis=0)
        spec = np.fft.rfft(out, axis=1)
        spec /= denom
        out = np.fft.irfft(spec, n=n_pts, axis=1)
        return scipy.fft.idst(out, type=1, axis=0)

    return apply


def _rebuild(grid: Grid, endpoints, interior) -> CurvePath:
    c0, c1 = endpoints
    slices = [c0]
    for samples in interior:
        slices.append(DiscreteCurve(grid, samples))
    slices.append(c1)
    return CurvePath(grid, tuple(slices))


def geodesic_bvp(
    cfg: MetricConfig,
    c0: DiscreteCurve,
    c1: DiscreteCurve,
    opts: SolverOptions | None = None,
) -> GeodesicResult:
    """Minimize path energy over interior slices with fixed endpoints."""
    if opts is None:
        opts = SolverOptions()
    if c0.grid != c1.grid:
        raise ContractError("endpoint curves live on different grids")
    if np.array_equal(c0.samples, c1.samples):
        path = CurvePath(c0.grid, tuple([c0] * (opts.T + 1)))
        return GeodesicResult(
            path=path,
            energy=0.0,
            length=0.0,
            iterations=0,
            converged=True,
            gradient_norm_final=0.0,
            energy_trace=[0.0],
        )
    path = opts.initial_path
    if path is None:
        path = linear_path(c0, c1, opts.T)
    elif path.slices[0] is not c0 or path.slices[-1] is not c1:
        if not (
            np.array_equal(path.slices[0].samples, c0.samples)
            and np.array_equal(path.slices[-1].samples, c1.samples)
        ):
            raise ContractError("initial path endpoints do not match c0, c1")
    grid = path.grid
    dt = path.dt
    speed_floor = 1e-6 * float(
        np.mean([np.mean(c.arc_speed) for c in path.slices])
    )

    x = np.stack([c.samples for c in path.slices[1:-1]])
    endpoints = (path.slices[0], path.slices[-1])
    end_lo = endpoints[0].samples[None]
    end_hi = endpoints[1].samples[None]

    def eval_at(x_arr):
        speeds = np.sqrt(np.sum(_dtheta(x_arr, grid) ** 2, axis=2))
        if np.min(speeds) < speed_floor:
            raise ImmersionError("interior slice below speed floor")
        stacked = np.concatenate([end_lo, x_arr, end_hi])
        return _stacked_energy_and_gradient(cfg, grid, stacked, dt)

    energy, grad = eval_at(x)
    trace = [energy]
    # Limited-memory quasi-Newton direction (two-loop recursion) seeded
    # with the frozen-coefficient inverse Hessian, plus a monotone Armijo
    # backtracking line search.  Curvature pairs are only stored when
    # dx.dg > 0, so the direction stays a descent direction.
    precondition = _spectral_preconditioner(cfg, grid, c0, c1, path.T, dt)
    memory = []
    gamma = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        sup = float(np.max(np.abs(grad)))
        if sup <= opts.grad_tol:
            converged = True
            iterations -= 1
            break
        qv = grad.copy()
        alphas = []
        for dx, dg, rho in reversed(memory):
            a = rho * float(np.sum(dx * qv))
            alphas.append(a)
            qv -= a * dg
        qv = gamma * precondition(qv)
        for (dx, dg, rho), a in zip(memory, reversed(alphas)):
            qv += (a - rho * float(np.sum(dg * qv))) * dx
        direction = -qv
        slope = float(np.sum(grad * direction))
        if slope >= 0:
            direction = -grad
            slope = -float(np.sum(grad * grad))
        t = 1.0
        accepted = False
        for _ in range(60):
            x_try = x + t * direction
            try:
                energy_try, grad_try = eval_at(x_try)
            except ImmersionError:
                t *= opts.backtrack_factor
                continue
            if energy_try <= energy + opts.armijo * t * slope:
                accepted = True
                break
            t *= opts.backtrack_factor
        if not accepted:
            break
        dx = x_try - x
        dg = grad_try - grad
        curv = float(np.sum(dx * dg))
        if curv > 1e-10 * float(np.linalg.norm(dx) * np.linalg.norm(dg)):
            memory.append((dx, dg, 1.0 / curv))
            if len(memory) > 10:
                memory.pop(0)
            gamma = curv / float(np.sum(dg * precondition(dg)))
        x, grad = x_try, grad_try
        energy = energy_try
        trace.append(energy)
    else:
        iterations = opts.max_iters
    sup = float(np.max(np.abs(grad)))
    converged = converged or sup <= opts.grad_tol
    current_path = _rebuild(grid, endpoints, x)
    return GeodesicResult(
        path=current_path,
        energy=energy,
        length=path_length(cfg, current_path),
        iterations=iterations,
        converged=converged,
        gradient_norm_final=sup,
        energy_trace=trace,
    )


def geodesic_distance(
    cfg: MetricConfig,
    c0: DiscreteCurve,
    c1: DiscreteCurve,
    opts: SolverOptions | None = None,
) -> float:
    return geodesic_bvp(cfg, c0, c1, opts).length


def lipschitz_probe_log_speed(cfg: MetricConfig, pairs, T: int = 16) -> list:
    """Ratios ||log|c1'| - log|c0'|||_inf / path-length for nearby pairs.

    No pass/fail: the Lipschitz constant depends on the metric ball.
    Identical pairs (zero distance) are excluded.
    """
    ratios = []
    for c0, c1 in pairs:
        if np.array_equal(c0.samples, c1.samples):
            continue
        dist = path_length(cfg, linear_path(c0, c1, T))
        if dist == 0.0:
            continue
        gap = float(np.max(np.abs(np.log(c1.arc_speed) - np.log(c0.arc_speed))))
        ratios.append(gap / dist)
    return ratios


def path_to_dict(path: CurvePath) -> dict:
    from .curves import curve_to_dict

    return {
        "T": path.T,
        "grid": {"N": path.grid.n_points, "scheme_order": path.grid.scheme_order},
        "slices": [curve_to_dict(c) for c in path.slices],
    }


def path_from_dict(data: dict) -> CurvePath:
    grid = Grid(int(data["grid"]["N"]), int(data["grid"].get("scheme_order", 4)))
    slices = tuple(
        DiscreteCurve(grid, np.asarray(entry["samples"], dtype=float))
        for entry in data["slices"]
    )
    return CurvePath(grid, slices)
