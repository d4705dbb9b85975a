"""Discrete calculus for closed curves on a uniform periodic grid.

Curves are sampled at theta_j = 2*pi*j/N.  Differentiation uses periodic
central finite differences (order 2 or 4), integration the periodic
trapezoid rule with uniform weights 2*pi/N.  Arc-length quantities are
built from the pointwise speed |c'|.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ContractError, ImmersionError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sampling of the circle with N points."""

    n_points: int
    scheme_order: int = 4

    def __post_init__(self):
        if self.n_points < 16 or self.n_points % 2 != 0:
            raise ContractError(f"grid needs N >= 16 and even, got N={self.n_points}")
        if self.scheme_order not in (2, 4):
            raise ContractError(f"scheme_order must be 2 or 4, got {self.scheme_order}")

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_points) / self.n_points

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_points

    @property
    def weight(self) -> float:
        """Quadrature weight of the periodic trapezoid rule."""
        return TWO_PI / self.n_points


def derivative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Periodic central finite-difference d/dtheta of a sampled field.

    `values` has shape (N,) or (N, d).  Exact on constants; accuracy is
    grid.scheme_order on smooth periodic data.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.n_points:
        raise ContractError(
            f"field has {values.shape[0]} samples, grid has {grid.n_points}"
        )
    h = grid.spacing
    if grid.scheme_order == 2:
        return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2.0 * h)
    # Grouped as differences so constants cancel exactly.
    return (
        8.0 * (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0))
        - (np.roll(values, -2, axis=0) - np.roll(values, 2, axis=0))
    ) / (12.0 * h)


def _pointwise_norm(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return np.abs(values)
    return np.sqrt(np.sum(values * values, axis=1))


@dataclass(frozen=True)
class DiscreteCurve:
    """Samples of a closed immersed curve plus cached speed |c'|."""

    grid: Grid
    samples: np.ndarray
    arc_speed: np.ndarray = field(init=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] < 2:
            raise ContractError("samples must be an (N, d) array with d >= 2")
        if samples.shape[0] != self.grid.n_points:
            raise ContractError(
                f"curve has {samples.shape[0]} samples, grid has {self.grid.n_points}"
            )
        object.__setattr__(self, "samples", samples)
        speed = _pointwise_norm(derivative(samples, self.grid))
        if np.max(speed) == 0.0 or np.min(speed) < 1e-12 * np.max(speed):
            raise ImmersionError(
                f"not an immersion at resolution N={self.grid.n_points}"
            )
        object.__setattr__(self, "arc_speed", speed)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class TangentField:
    """A vector field along a curve, sampled on the same grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ContractError("tangent field values must be an (N, d) array")
        if values.shape[0] != self.grid.n_points:
            raise ContractError(
                f"field has {values.shape[0]} samples, grid has {self.grid.n_points}"
            )
        object.__setattr__(self, "values", values)


class NormKind(Enum):
    L2_DTHETA = "L2_dtheta"
    L2_DS = "L2_ds"
    HN_DTHETA = "Hn_dtheta"
    HN_DS = "Hn_ds"


def _require_same_grid(c: DiscreteCurve, h: TangentField):
    if c.grid != h.grid:
        raise ContractError("curve and tangent field live on different grids")


def arc_speed(c: DiscreteCurve) -> np.ndarray:
    """Pointwise |c'(theta_j)|, cached on the curve."""
    return c.arc_speed


def arc_derivative(c: DiscreteCurve, h: TangentField, k: int) -> TangentField:
    """k-fold arc-length derivative ((1/|c'|) d/dtheta)^k of h along c."""
    if k < 0:
        raise ContractError(f"derivative order must be >= 0, got {k}")
    _require_same_grid(c, h)
    values = h.values
    inv_speed = 1.0 / c.arc_speed
    for _ in range(k):
        values = derivative(values, c.grid) * inv_speed[:, None]
    return TangentField(c.grid, values)


def integrate_ds(c: DiscreteCurve, f: np.ndarray) -> float:
    """Arc-length integral of a scalar field: sum f |c'| * (2*pi/N)."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != c.grid.n_points:
        raise ContractError("integrand length does not match grid")
    return c.grid.weight * float(np.dot(f, c.arc_speed))


def curve_length(c: DiscreteCurve) -> float:
    return c.grid.weight * float(np.sum(c.arc_speed))


def norm(c: DiscreteCurve, h: TangentField, kind: NormKind, n: int = 1) -> float:
    """Sobolev/L2 norm of h over c.

    Hn kinds combine the field with its n-th plain or arc-length
    derivative; n >= 1 is required there and ignored for L2 kinds.
    """
    _require_same_grid(c, h)
    w = c.grid.weight
    sq = np.sum(h.values * h.values, axis=1)
    if kind is NormKind.L2_DTHETA:
        return float(np.sqrt(w * np.sum(sq)))
    if kind is NormKind.L2_DS:
        return float(np.sqrt(w * np.dot(sq, c.arc_speed)))
    if n < 1:
        raise ContractError(f"Sobolev order must be >= 1, got {n}")
    if kind is NormKind.HN_DTHETA:
        dn = h.values
        for _ in range(n):
            dn = derivative(dn, c.grid)
        dn_sq = np.sum(dn * dn, axis=1)
        return float(np.sqrt(w * np.sum(sq + dn_sq)))
    dn_sq = np.sum(arc_derivative(c, h, n).values ** 2, axis=1)
    return float(np.sqrt(w * np.dot(sq + dn_sq, c.arc_speed)))


def scalar_l2_dtheta(grid: Grid, u: np.ndarray) -> float:
    """L2(dtheta) norm of a scalar field."""
    u = np.asarray(u, dtype=float)
    return float(np.sqrt(grid.weight * np.sum(u * u)))


def scalar_l2_ds(c: DiscreteCurve, u: np.ndarray) -> float:
    """L2(ds) norm of a scalar field."""
    u = np.asarray(u, dtype=float)
    return float(np.sqrt(c.grid.weight * np.dot(u * u, c.arc_speed)))


def make_circle(r: float, center, grid: Grid, dim: int = 2) -> DiscreteCurve:
    """Circle of radius r in the first two coordinates, zeros beyond."""
    if r <= 0:
        raise ContractError(f"radius must be positive, got {r}")
    if dim < 2:
        raise ContractError("ambient dimension must be >= 2")
    theta = grid.theta
    samples = np.zeros((grid.n_points, dim))
    samples[:, 0] = r * np.cos(theta)
    samples[:, 1] = r * np.sin(theta)
    center = np.asarray(center, dtype=float)
    return DiscreteCurve(grid, samples + center)


def make_bumpy_circle(
    r: float,
    eps: float,
    lam: int,
    grid: Grid,
    *,
    allow_flat: bool = False,
) -> DiscreteCurve:
    """Circle of radius r with 2*lam bumps: r(1 + eps*sin(lam*theta)) * n(theta).

    Requires 0 < eps < 1/3 and N >= 32*lam so the highest mode is
    resolved.  allow_flat=True admits eps = 0 (test oracle only).
    """
    if r <= 0:
        raise ContractError(f"radius must be positive, got {r}")
    if not isinstance(lam, (int, np.integer)) or lam < 1:
        raise ContractError(f"bump frequency must be a positive integer, got {lam}")
    if not (0.0 < eps < 1.0 / 3.0):
        if not (allow_flat and eps == 0.0):
            raise ContractError(f"eps must lie in (0, 1/3), got {eps}")
    if grid.n_points < 32 * lam:
        raise ContractError(
            f"N={grid.n_points} too small for lambda={lam}; need N >= {32 * lam}"
        )
    theta = grid.theta
    radial = r * (1.0 + eps * np.sin(lam * theta))
    samples = np.stack([radial * np.cos(theta), radial * np.sin(theta)], axis=1)
    return DiscreteCurve(grid, samples)


def reparametrize(c: DiscreteCurve, phi: np.ndarray) -> DiscreteCurve:
    """Resample c at new parameter values phi (strictly increasing mod 2*pi).

    Uses periodic cubic spline interpolation; the geometric image is
    preserved up to O(N^-4).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (c.grid.n_points,):
        raise ContractError("phi must have one value per grid point")
    incr = np.diff(phi)
    wrap = phi[0] + TWO_PI - phi[-1]
    if np.any(incr <= 0) or wrap <= 0:
        raise ContractError("phi must be strictly increasing modulo 2*pi")
    theta_ext = np.append(c.grid.theta, TWO_PI)
    samples_ext = np.vstack([c.samples, c.samples[:1]])
    spline = CubicSpline(theta_ext, samples_ext, bc_type="periodic")
    return DiscreteCurve(c.grid, spline(np.mod(phi, TWO_PI)))


def curve_to_dict(c: DiscreteCurve) -> dict:
    return {
        "N": c.grid.n_points,
        "d": c.dim,
        "samples": c.samples.tolist(),
    }


def curve_from_dict(data: dict, scheme_order: int = 4) -> DiscreteCurve:
    try:
        samples = np.asarray(data["samples"], dtype=float)
        n, d = int(data["N"]), int(data["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed curve file: {exc}") from exc
    if samples.shape != (n, d):
        raise ContractError("curve file: samples shape disagrees with N, d")
    return DiscreteCurve(Grid(n, scheme_order), samples)


def load_curve(path, scheme_order: int = 4) -> DiscreteCurve:
    """Load a curve from JSON ({"N", "d", "samples"}) or CSV (theta,x,y[,z...])."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[0].strip().lower() != "theta":
                raise ContractError("curve CSV must start with header theta,x,y[,...]")
            rows = [[float(v) for v in row[1:]] for row in reader if row]
        samples = np.asarray(rows, dtype=float)
        return DiscreteCurve(Grid(samples.shape[0], scheme_order), samples)
    with open(path) as fh:
        return curve_from_dict(json.load(fh), scheme_order)


def save_curve(c: DiscreteCurve, path):
    with open(path, "w") as fh:
        json.dump(curve_to_dict(c), fh)
        fh.write("\n")
