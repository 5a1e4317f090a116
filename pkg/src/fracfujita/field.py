"""Periodic grids on [-L, L]^N, spectral heat multiplier, ball integrals and
initial data (including the singular datum ``mu_eps``)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "BallQuery",
    "Field",
    "FieldError",
    "GridSpec",
    "ball_integral",
    "gaussian_bump",
    "heat_multiply",
    "mass",
    "mu_eps",
    "mu_eps_ball_exact",
    "scale",
    "sphere_measure",
]


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``n`` points per axis on ``[-L, L)^dim``.

    Node ``j`` sits at ``-L + j h`` with ``h = 2L/n`` and is the centre of a
    cell of width ``h``; the origin is node ``n/2``.
    """

    dim: int
    half_width: float = 8.0
    n: int = 256

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise FieldError(f"dim must be 1 or 2, got {self.dim}")
        if not self.half_width > 0:
            raise FieldError("half_width must be positive")
        if self.n < 16 or self.n & (self.n - 1):
            raise FieldError(f"n must be a power of two >= 16, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords()))

    @cached_property
    def freq_sq(self) -> np.ndarray:
        """``|xi|^2`` on the rfft layout, ``xi = pi j / L``."""
        full = np.fft.fftfreq(self.n, d=1.0 / self.n) * (math.pi / self.half_width)
        half = np.fft.rfftfreq(self.n, d=1.0 / self.n) * (math.pi / self.half_width)
        if self.dim == 1:
            out = half**2
        else:
            out = full[:, None] ** 2 + half[None, :] ** 2
        out.setflags(write=False)
        return out

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(values.reshape(self.shape))

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(coeffs, s=self.shape, axes=tuple(range(self.dim)))


@dataclass(frozen=True, eq=False)
class Field:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise FieldError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def check_nonnegative(self) -> None:
        tol = 1e-12 * max(1.0, self.sup)
        if self.values.min() < -tol:
            raise FieldError(f"field has negative values (min {self.values.min():.3e})")


def mass(u: Field) -> float:
    return float(np.sum(u.values) * u.grid.cell_volume)


def scale(u: Field, c: float) -> Field:
    return Field(u.grid, c * u.values)


def heat_multiply(u: Field, t: float) -> Field:
    """Classical heat semigroup ``e^{t Delta} u``; Fourier modes scaled by ``exp(-t |xi|^2)``."""
    if not t >= 0:
        raise FieldError(f"t must be >= 0, got {t}")
    if t == 0:
        return u
    g = u.grid
    return Field(g, g.inverse(g.forward(u.values) * np.exp(-t * g.freq_sq)))


@dataclass(frozen=True)
class BallQuery:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise FieldError("ball radius must be positive")

    def check_inside(self, grid: GridSpec) -> None:
        if len(self.center) != grid.dim:
            raise FieldError("ball centre has the wrong dimension")
        L = grid.half_width
        if any(abs(c) + self.radius > L for c in self.center):
            raise FieldError(f"ball {self} exceeds the domain [-{L}, {L}]^{grid.dim}")


def ball_integral(u: Field, q: BallQuery) -> float:
    """Midpoint sum over the cells whose centres lie in the closed ball."""
    g = u.grid
    q.check_inside(g)
    d2 = sum((c - z) ** 2 for c, z in zip(g.coords(), q.center))
    inside = d2 <= q.radius**2 * (1.0 + 1e-14)
    return float(np.sum(u.values[inside]) * g.cell_volume)


def gaussian_bump(grid: GridSpec, mass: float, width: float, center=None) -> Field:
    """Gaussian ``exp(-|x - c|^2 / (2 width^2))`` normalized to the given discrete mass."""
    if not mass > 0:
        raise FieldError("mass must be positive")
    if not width >= 4 * grid.h:
        raise FieldError(f"width {width} is not resolved (need >= 4 cells = {4 * grid.h})")
    c = np.zeros(grid.dim) if center is None else np.atleast_1d(center)
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords(), c))
    v = np.exp(-r2 / (2.0 * width**2))
    v *= mass / (np.sum(v) * grid.cell_volume)
    return Field(grid, v)


# {{{ mu_eps


_CUTOFF = math.exp(-1.0)


def sphere_measure(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 for dim 1, 2 pi for dim 2)."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def _check_eps(dim: int, eps: float) -> None:
    if not 0 < eps < dim / 2:
        raise FieldError(f"eps must lie in (0, {dim / 2}), got {eps}")


def _radial_primitive(r, dim: int, eps: float):
    """``int_0^r s^(dim-1) mu(s) ds = (-log r)^(eps - dim/2) / (dim/2 - eps)`` for r <= 1/e."""
    r = np.minimum(np.asarray(r, dtype=float), _CUTOFF)
    with np.errstate(divide="ignore"):
        out = (-np.log(r)) ** (eps - dim / 2) / (dim / 2 - eps)
    return np.where(r > 0, out, 0.0)


def _mu_pointwise(r: np.ndarray, dim: int, eps: float) -> np.ndarray:
    out = np.zeros_like(r)
    m = (r > 0) & (r < _CUTOFF)
    rm = r[m]
    out[m] = rm ** (-dim) * (-np.log(rm)) ** (-dim / 2 - 1 + eps)
    return out


def mu_eps(grid: GridSpec, eps: float) -> Field:
    """Cell averages of ``|x|^-N (-log|x|)^(-N/2-1+eps)`` on ``B(1/e)``.

    1D cells use the exact radial primitive. In 2D the origin cell is done
    exactly in the radial variable with Gauss-Legendre in the angle, and all
    other cells by a 5x5 tensor Gauss rule.
    """
    dim = grid.dim
    _check_eps(dim, eps)
    if grid.half_width <= _CUTOFF:
        raise FieldError("half_width must exceed 1/e")
    h = grid.h
    if h / 2 * math.sqrt(dim) >= _CUTOFF:
        raise FieldError("grid too coarse for mu_eps")

    if dim == 1:
        x = grid.axis
        a, b = x - h / 2, x + h / 2
        pa, pb = _radial_primitive(np.abs(a), 1, eps), _radial_primitive(np.abs(b), 1, eps)
        # cells on one side of the origin: |F(|b|) - F(|a|)|; origin cell: F(|a|) + F(|b|)
        straddle = (a < 0) & (b > 0)
        vals = np.where(straddle, pa + pb, np.abs(pb - pa)) / h
        return Field(grid, vals)

    xg, wg = np.polynomial.legendre.leggauss(5)
    X, Y = grid.coords()
    acc = np.zeros_like(X)
    for xi, wi in zip(xg, wg):
        for yj, wj in zip(xg, wg):
            r = np.hypot(X + 0.5 * h * xi, Y + 0.5 * h * yj)
            acc += 0.25 * wi * wj * _mu_pointwise(r, 2, eps)
    o = grid.n // 2
    # origin cell: 8 symmetric triangles, radial part exact
    ph, pw = np.polynomial.legendre.leggauss(40)
    phi = (ph + 1.0) * math.pi / 8
    r_out = (h / 2) / np.cos(phi)
    tri = np.sum(pw * _radial_primitive(r_out, 2, eps)) * math.pi / 8
    acc[o, o] = 8.0 * tri / h**2
    return Field(grid, acc)


def mu_eps_ball_exact(dim: int, eps: float, rho: float) -> float:
    """``int_{B(rho)} mu_eps = sigma_{N-1} (log(1/rho))^(eps - N/2) / (N/2 - eps)``."""
    _check_eps(dim, eps)
    if not 0 < rho < _CUTOFF:
        raise FieldError(f"rho must lie in (0, 1/e), got {rho}")
    return sphere_measure(dim) * math.log(1.0 / rho) ** (eps - dim / 2) / (dim / 2 - eps)


# }}}
