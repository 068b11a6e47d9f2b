"""Uniform Cartesian grid on a square inside the unit disk, with
second-order finite-difference calculus and fast Poisson solvers.

Index convention: a field ``f[i, j]`` samples ``f(x1_i, x2_j)``, so axis
0 runs along x1 and axis 1 along x2.  Vector fields carry a leading
length-2 axis, ``G[0] = x1-component``.  Extra trailing axes (ambient
components, blade coefficients) ride along untouched.

Derivatives are centered in the interior and one-sided second order on
the edge rings; ``laplace`` is the composition ``div(grad(f))`` so that
``div o grad = laplace`` holds exactly at the stencil level.  The
Dirichlet Poisson solver uses the classical 5-point operator,
diagonalized by a type-I discrete sine transform; Neumann problems use
ghost-point elimination diagonalized by a type-I cosine transform, with
mean-zero normalization and the compatibility defect reported.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

__all__ = [
    "Grid",
    "SolverError",
    "d1",
    "d2",
    "grad",
    "grad_perp",
    "div",
    "curl",
    "laplace",
    "dz",
    "dzstar",
    "integrate",
    "l2norm",
    "poisson_dirichlet",
    "poisson_neumann",
    "grad_potential",
    "curl_potential",
    "hodge_decompose",
    "PotentialResult",
    "HodgeParts",
    "write_field",
    "read_field",
    "write_field_csv",
]


class SolverError(RuntimeError):
    """Elliptic solve failed to meet its residual contract."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Grid:
    """Square [-s, s]^2 inside the unit disk, n nodes per side.

    n must be odd (so the origin is a node); sizes below 33 are accepted
    for unit tests but production identity checks assume n >= 33.
    """

    s: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.s <= 1.0 / np.sqrt(2.0) + 1e-12:
            raise ValueError(f"half-width s={self.s} must lie in (0, 1/sqrt(2)]")
        if self.n < 5 or self.n % 2 == 0:
            raise ValueError(f"points per side n={self.n} must be odd and >= 5")

    @property
    def h(self) -> float:
        return 2.0 * self.s / (self.n - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.s, self.s, self.n)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X1, X2) with indexing matching the field layout."""
        x = self.axis()
        return np.meshgrid(x, x, indexing="ij")

    def interior_margin(self) -> int:
        """Default cell offset of the identity-check window (>= 2)."""
        return max(2, int(round(0.04 * (self.n - 1))))

    def interior(self, margin: int | None = None) -> tuple[slice, slice]:
        m = self.interior_margin() if margin is None else margin
        return (slice(m, self.n - m), slice(m, self.n - m))


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def d1(grid: Grid, f: np.ndarray) -> np.ndarray:
    """d/dx1, centered interior, one-sided second order on the edges."""
    h = grid.h
    out = np.empty_like(np.asarray(f), dtype=np.result_type(f, float))
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def d2(grid: Grid, f: np.ndarray) -> np.ndarray:
    """d/dx2, centered interior, one-sided second order on the edges."""
    h = grid.h
    out = np.empty_like(np.asarray(f), dtype=np.result_type(f, float))
    out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * h)
    out[:, 0] = (-3.0 * f[:, 0] + 4.0 * f[:, 1] - f[:, 2]) / (2.0 * h)
    out[:, -1] = (3.0 * f[:, -1] - 4.0 * f[:, -2] + f[:, -3]) / (2.0 * h)
    return out


def grad(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Gradient (d1 f, d2 f), stacked on a new leading axis."""
    return np.stack([d1(grid, f), d2(grid, f)])


def grad_perp(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Rotated gradient (-d2 f, d1 f)."""
    return np.stack([-d2(grid, f), d1(grid, f)])


def div(grid: Grid, G: np.ndarray) -> np.ndarray:
    """Divergence d1 G[0] + d2 G[1] of a vector field."""
    return d1(grid, G[0]) + d2(grid, G[1])


def curl(grid: Grid, G: np.ndarray) -> np.ndarray:
    """Scalar curl d1 G[1] - d2 G[0]."""
    return d1(grid, G[1]) - d2(grid, G[0])


def laplace(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Laplacian as the exact composition div(grad(f))."""
    return div(grid, grad(grid, f))


def dz(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Wirtinger derivative (d1 - i d2)/2."""
    return 0.5 * (d1(grid, f) - 1j * d2(grid, f))


def dzstar(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Conjugate Wirtinger derivative (d1 + i d2)/2."""
    return 0.5 * (d1(grid, f) + 1j * d2(grid, f))


def integrate(grid: Grid, f: np.ndarray) -> float | np.ndarray:
    """Trapezoidal quadrature of f over the grid square."""
    w = np.ones(grid.n)
    w[0] = w[-1] = 0.5
    W = np.outer(w, w) * grid.h**2
    return np.tensordot(W, f, axes=([0, 1], [0, 1]))


def l2norm(grid: Grid, f: np.ndarray, region: tuple[slice, slice] | None = None) -> float:
    """Discrete L2 norm sqrt(h^2 * sum |f|^2), optionally on a window.

    Trailing axes (components) are folded into the norm.
    """
    v = f if region is None else f[region]
    return float(np.sqrt(grid.h**2 * np.sum(np.abs(v) ** 2)))


# ---------------------------------------------------------------------------
# Poisson solvers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _dirichlet_eigs(n: int, h: float) -> np.ndarray:
    k = np.arange(1, n - 1)
    lam = (2.0 * np.cos(np.pi * k / (n - 1)) - 2.0) / h**2
    return lam[:, None] + lam[None, :]


def _five_point_residual(grid: Grid, u: np.ndarray, rhs: np.ndarray) -> float:
    h = grid.h
    lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / h**2
    num = np.max(np.abs(lap - rhs[1:-1, 1:-1]))
    den = max(np.max(np.abs(rhs)), np.max(np.abs(u)) / h**2, 1e-30)
    return float(num / den)


def poisson_dirichlet(grid: Grid, rhs: np.ndarray, bc: np.ndarray | float = 0.0) -> np.ndarray:
    """Solve the 5-point Laplace(u) = rhs with u = bc on the boundary.

    Direct DST-I solve; the relative interior residual is checked
    against 1e-10 and a SolverError raised if violated.
    """
    n, h = grid.n, grid.h
    rhs = np.asarray(rhs)
    u = np.zeros((n, n), dtype=np.result_type(rhs, float))
    if np.ndim(bc) == 0:
        u += bc
    else:
        u[0], u[-1], u[:, 0], u[:, -1] = bc[0], bc[-1], bc[:, 0], bc[:, -1]
    f = rhs[1:-1, 1:-1].astype(u.dtype, copy=True)
    f[0] -= u[0, 1:-1] / h**2
    f[-1] -= u[-1, 1:-1] / h**2
    f[:, 0] -= u[1:-1, 0] / h**2
    f[:, -1] -= u[1:-1, -1] / h**2
    if np.iscomplexobj(f):
        fhat = sfft.dstn(f.real, type=1) + 1j * sfft.dstn(f.imag, type=1)
    else:
        fhat = sfft.dstn(f, type=1)
    uhat = fhat / _dirichlet_eigs(n, h)
    if np.iscomplexobj(uhat):
        u_int = sfft.idstn(uhat.real, type=1) + 1j * sfft.idstn(uhat.imag, type=1)
    else:
        u_int = sfft.idstn(uhat, type=1)
    u[1:-1, 1:-1] = u_int
    res = _five_point_residual(grid, u, rhs)
    if res > 1e-10:
        raise SolverError("Dirichlet Poisson solve failed", res)
    return u


@lru_cache(maxsize=8)
def _neumann_eigs(n: int, h: float) -> np.ndarray:
    k = np.arange(n)
    lam = (2.0 * np.cos(np.pi * k / (n - 1)) - 2.0) / h**2
    lam2 = lam[:, None] + lam[None, :]
    lam2[0, 0] = 1.0  # zero mode handled separately
    return lam2


def _dct_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def _neumann_solve_real(grid: Grid, b: np.ndarray) -> tuple[np.ndarray, float]:
    n = grid.n
    c = (n - 1.0) / (2.0 * _dct_weights(n))  # <w_k, v_k> per mode
    bhat = sfft.dctn(b, type=1)
    beta = bhat / (4.0 * np.outer(c, c))
    compat = float(beta[0, 0])
    gamma = beta / _neumann_eigs(n, grid.h)
    gamma[0, 0] = 0.0
    eps = _dct_weights(n)
    y = gamma / (4.0 * np.outer(eps, eps))
    u = sfft.dctn(y, type=1)
    return u, compat


def poisson_neumann(
    grid: Grid,
    rhs: np.ndarray,
    flux_w: np.ndarray | float = 0.0,
    flux_e: np.ndarray | float = 0.0,
    flux_s: np.ndarray | float = 0.0,
    flux_n: np.ndarray | float = 0.0,
) -> tuple[np.ndarray, float]:
    """Solve Laplace(u) = rhs with outward normal derivative data.

    flux_w/e are d_nu u along the x1 = -s / +s edges (length-n arrays or
    scalars), flux_s/n along x2 = -s / +s.  Ghost-point elimination makes
    the discrete operator DCT-I diagonal.  Returns (u, compat_defect):
    the solution is normalized to zero trapezoid-weighted mean and the
    incompatible constant part of the data is projected out and reported.
    """
    h = grid.h
    b = np.array(rhs, dtype=np.result_type(rhs, float))
    b[0, :] -= 2.0 * np.asarray(flux_w) / h
    b[-1, :] -= 2.0 * np.asarray(flux_e) / h
    b[:, 0] -= 2.0 * np.asarray(flux_s) / h
    b[:, -1] -= 2.0 * np.asarray(flux_n) / h
    if np.iscomplexobj(b):
        ur, cr = _neumann_solve_real(grid, b.real)
        ui, ci = _neumann_solve_real(grid, b.imag)
        return ur + 1j * ui, float(np.hypot(cr, ci))
    u, compat = _neumann_solve_real(grid, b)
    return u, abs(compat)


@dataclass(frozen=True)
class PotentialResult:
    """Potential recovered from a target gradient-type field."""

    u: np.ndarray
    defect: float            # || reconstructed gradient - target ||_L2
    compat_defect: float     # incompatible constant part of the Neumann data
    warning: bool            # compatibility defect above tolerance


def _potential(grid: Grid, rhs, fw, fe, fs, fn, target, reconstruct, tol: float) -> PotentialResult:
    u, compat = poisson_neumann(grid, rhs, fw, fe, fs, fn)
    defect = l2norm(grid, reconstruct(u) - target)
    scale = max(l2norm(grid, target), 1e-30)
    return PotentialResult(u, defect, compat, bool(compat > tol * scale))


def grad_potential(grid: Grid, G: np.ndarray, tol: float = 1e-6) -> PotentialResult:
    """Best-gradient potential: u with grad(u) ~ G.

    Solves Laplace(u) = div G with d_nu u = G . nu, mean zero.  The
    defect ||grad u - G||_L2 measures how far G is from an exact
    gradient.
    """
    res = _potential(
        grid,
        div(grid, G),
        -G[0][0, :], G[0][-1, :], -G[1][:, 0], G[1][:, -1],
        G,
        lambda u: grad(grid, u),
        tol,
    )
    return res


def curl_potential(grid: Grid, G: np.ndarray, tol: float = 1e-6) -> PotentialResult:
    """Rotated-gradient potential: u with grad_perp(u) ~ G.

    Solves Laplace(u) = curl G with d_nu u = G . tau (tau the positively
    oriented boundary tangent), mean zero.  For div-free G on the square
    this recovers the stream-type potential of the flux-free lemma; the
    defect ||grad_perp u - G||_L2 is reported, never enforced.
    """
    res = _potential(
        grid,
        curl(grid, G),
        -G[1][0, :], G[1][-1, :], G[0][:, 0], -G[0][:, -1],
        G,
        lambda u: grad_perp(grid, u),
        tol,
    )
    return res


@dataclass(frozen=True)
class HodgeParts:
    """g = grad(alpha) + grad_perp(beta) + harmonic, exact by construction."""

    alpha: np.ndarray
    beta: np.ndarray
    harmonic: np.ndarray


def hodge_decompose(grid: Grid, g: np.ndarray) -> HodgeParts:
    """Hodge-type splitting of a vector field on the square.

    alpha and beta solve Laplace = div g / curl g with zero Dirichlet
    data; the remainder h := g - grad(alpha) - grad_perp(beta) has
    O(h^2)-small divergence and curl in the interior.
    """
    alpha = poisson_dirichlet(grid, div(grid, g))
    beta = poisson_dirichlet(grid, curl(grid, g))
    harmonic = g - grad(grid, alpha) - grad_perp(grid, beta)
    return HodgeParts(alpha, beta, harmonic)


# ---------------------------------------------------------------------------
# Field import/export
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<qdq")  # n, s, value arity


def _flatten_values(data: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(data):
        data = np.ascontiguousarray(data).view(np.float64).reshape(data.shape + (2,))
    flat = np.asarray(data, dtype=np.float64)
    return flat.reshape(flat.shape[0], flat.shape[1], -1)


def write_field(path, grid: Grid, data: np.ndarray) -> None:
    """Write a field as little-endian binary: header (n, s, arity) + row-major doubles."""
    values = _flatten_values(data)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(grid.n, grid.s, values.shape[-1]))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_field(path) -> tuple[Grid, np.ndarray]:
    """Read a binary field; returns (grid, values) with values (n, n, arity)."""
    with open(path, "rb") as fh:
        n, s, arity = _HEADER.unpack(fh.read(_HEADER.size))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    values = raw.reshape(n, n, arity).astype(np.float64)
    return Grid(s, n), values


def write_field_csv(path, grid: Grid, data: np.ndarray) -> None:
    """Write a field as CSV rows x1, x2, v0, v1, ... for inspection."""
    values = _flatten_values(data)
    X1, X2 = grid.nodes()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x1", "x2"] + [f"v{k}" for k in range(values.shape[-1])])
        for i in range(grid.n):
            for j in range(grid.n):
                writer.writerow(
                    [f"{X1[i, j]:.17g}", f"{X2[i, j]:.17g}"]
                    + [f"{v:.17g}" for v in values[i, j]]
                )
