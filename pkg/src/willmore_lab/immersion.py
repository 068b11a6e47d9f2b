"""Analytic catalog of conformal immersion patches and their
first/second-order geometry.

Every catalog surface ships analytic jets (position plus first and
second derivatives at the nodes); finite-difference jets exist as a
fallback for perturbed or file-loaded patches and are tested against
the analytic ones.  All derived quantities follow the conformal-frame
conventions:

    e^lambda = |d1 Phi|,   e_i = e^-lambda d_i Phi,
    h^a_ij   = e^-2lambda  n_a . d_ij Phi,
    H        = 1/2 sum_a (h^a_11 + h^a_22) n_a,
    H0       = 1/2 sum_a (h^a_11 - h^a_22 + 2 i h^a_12) n_a,
    K        = -e^-2lambda Laplace(lambda)   (and via the Gauss equation).

The normal frame is deterministic: constant ambient seed vectors are
Gram-Schmidt-projected when they stay uniformly transverse, and the
final normal is the Hodge dual of the wedge of everything accepted so
far, which makes the full frame {e1, e2, n_1, ..., n_{m-2}} positively
oriented by construction (so star(n ^ e1) = e2 holds on the nose).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import diskgrid as dg
from . import multivec as mv
from .diskgrid import Grid

__all__ = [
    "DegenerateImmersionError",
    "FrameError",
    "ImmersionPatch",
    "GeometryBundle",
    "Jet",
    "make_surface",
    "surface_from_spec",
    "load_surface_spec",
    "perturb_normal",
    "conformal_factor",
    "frames",
    "second_fundamental",
    "make_bundle",
    "willmore_energy",
    "export_bundle",
    "CATALOG",
    "WILLMORE_SURFACES",
]


class DegenerateImmersionError(RuntimeError):
    """The sampled immersion degenerates (|dPhi| ~ 0) somewhere."""


class FrameError(RuntimeError):
    """No admissible seed vector spans the normal bundle over the patch."""


@dataclass(frozen=True)
class Jet:
    """Position and derivatives of Phi at the grid nodes, shape (n, n, m)."""

    phi: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d11: np.ndarray
    d12: np.ndarray
    d22: np.ndarray


JetFn = Callable[[np.ndarray, np.ndarray], Jet]


@dataclass(frozen=True)
class ImmersionPatch:
    """Sampled conformal immersion of the grid square into R^m."""

    grid: Grid
    m: int
    phi: np.ndarray
    jets: JetFn | None = None
    label: str = "surface"
    params: dict = field(default_factory=dict)

    def jet(self) -> Jet:
        """Analytic jet when available, second-order FD jet otherwise."""
        if self.jets is not None:
            return self.jets(*self.grid.nodes())
        return fd_jet(self.grid, self.phi)

    def with_phi(self, phi: np.ndarray, label: str | None = None) -> "ImmersionPatch":
        """Same patch with replaced samples; analytic jets are dropped."""
        return replace(self, phi=phi, jets=None, label=label or self.label)


def _fd_d11(grid: Grid, f: np.ndarray) -> np.ndarray:
    h2 = grid.h**2
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h2
    return out


def fd_jet(grid: Grid, phi: np.ndarray) -> Jet:
    """Finite-difference jet: centered interior, one-sided edges."""
    d1p = dg.d1(grid, phi)
    d2p = dg.d2(grid, phi)
    return Jet(
        phi=phi,
        d1=d1p,
        d2=d2p,
        d11=_fd_d11(grid, phi),
        d12=dg.d2(grid, d1p),
        d22=np.swapaxes(_fd_d11(grid, np.swapaxes(phi, 0, 1)), 0, 1),
    )


def _pad(m: int, *arrays: np.ndarray) -> list[np.ndarray]:
    """Zero-pad trailing ambient components from 3 to m."""
    out = []
    for a in arrays:
        if m == a.shape[-1]:
            out.append(a)
        else:
            padded = np.zeros(a.shape[:-1] + (m,))
            padded[..., : a.shape[-1]] = a
            out.append(padded)
    return out


def _jet3(m, phi, d1, d2, d11, d12, d22) -> Jet:
    return Jet(*_pad(m, phi, d1, d2, d11, d12, d22))


# ---------------------------------------------------------------------------
# Catalog surfaces
# ---------------------------------------------------------------------------

def _plane_jets(m: int) -> JetFn:
    def jets(X1, X2):
        shp = X1.shape + (3,)
        phi = np.zeros(shp)
        phi[..., 0], phi[..., 1] = X1, X2
        d1 = np.zeros(shp)
        d1[..., 0] = 1.0
        d2 = np.zeros(shp)
        d2[..., 1] = 1.0
        z = np.zeros(shp)
        return _jet3(m, phi, d1, d2, z, z.copy(), z.copy())

    return jets


def _sphere_jets(m: int, rho: float) -> JetFn:
    # inverse stereographic projection, e^lambda = 2 rho / (1 + |x|^2)
    def jets(X1, X2):
        u = 1.0 + X1**2 + X2**2
        shp = X1.shape + (3,)
        phi = np.empty(shp)
        phi[..., 0] = 2.0 * rho * X1 / u
        phi[..., 1] = 2.0 * rho * X2 / u
        phi[..., 2] = rho * (1.0 - 2.0 / u)
        d1 = np.empty(shp)
        d1[..., 0] = 2.0 * rho * (u - 2.0 * X1**2) / u**2
        d1[..., 1] = -4.0 * rho * X1 * X2 / u**2
        d1[..., 2] = 4.0 * rho * X1 / u**2
        d2 = np.empty(shp)
        d2[..., 0] = -4.0 * rho * X1 * X2 / u**2
        d2[..., 1] = 2.0 * rho * (u - 2.0 * X2**2) / u**2
        d2[..., 2] = 4.0 * rho * X2 / u**2
        d11 = np.empty(shp)
        d11[..., 0] = 2.0 * rho * (8.0 * X1**3 - 6.0 * X1 * u) / u**3
        d11[..., 1] = -4.0 * rho * X2 * (u - 4.0 * X1**2) / u**3
        d11[..., 2] = 4.0 * rho * (u - 4.0 * X1**2) / u**3
        d22 = np.empty(shp)
        d22[..., 0] = -4.0 * rho * X1 * (u - 4.0 * X2**2) / u**3
        d22[..., 1] = 2.0 * rho * (8.0 * X2**3 - 6.0 * X2 * u) / u**3
        d22[..., 2] = 4.0 * rho * (u - 4.0 * X2**2) / u**3
        d12 = np.empty(shp)
        d12[..., 0] = 4.0 * rho * X2 * (4.0 * X1**2 - u) / u**3
        d12[..., 1] = 4.0 * rho * X1 * (4.0 * X2**2 - u) / u**3
        d12[..., 2] = -16.0 * rho * X1 * X2 / u**3
        return _jet3(m, phi, d1, d2, d11, d12, d22)

    return jets


def _cylinder_jets(m: int, rho: float) -> JetFn:
    def jets(X1, X2):
        t = X1 / rho
        c, s = np.cos(t), np.sin(t)
        shp = X1.shape + (3,)
        phi = np.empty(shp)
        phi[..., 0], phi[..., 1], phi[..., 2] = rho * c, rho * s, X2
        d1 = np.zeros(shp)
        d1[..., 0], d1[..., 1] = -s, c
        d2 = np.zeros(shp)
        d2[..., 2] = 1.0
        d11 = np.zeros(shp)
        d11[..., 0], d11[..., 1] = -c / rho, -s / rho
        z = np.zeros(shp)
        return _jet3(m, phi, d1, d2, d11, z, z.copy())

    return jets


def _catenoid_jets(m: int) -> JetFn:
    def jets(X1, X2):
        c1, s1 = np.cos(X1), np.sin(X1)
        ch, sh = np.cosh(X2), np.sinh(X2)
        shp = X1.shape + (3,)
        phi = np.empty(shp)
        phi[..., 0], phi[..., 1], phi[..., 2] = ch * c1, ch * s1, X2
        d1 = np.zeros(shp)
        d1[..., 0], d1[..., 1] = -ch * s1, ch * c1
        d2 = np.zeros(shp)
        d2[..., 0], d2[..., 1], d2[..., 2] = sh * c1, sh * s1, 1.0
        d11 = np.zeros(shp)
        d11[..., 0], d11[..., 1] = -ch * c1, -ch * s1
        d12 = np.zeros(shp)
        d12[..., 0], d12[..., 1] = -sh * s1, sh * c1
        d22 = np.zeros(shp)
        d22[..., 0], d22[..., 1] = ch * c1, ch * s1
        return _jet3(m, phi, d1, d2, d11, d12, d22)

    return jets


def _enneper_jets(m: int) -> JetFn:
    # Phi = (u - u^3/3 + u v^2, -(v - v^3/3 + v u^2), u^2 - v^2), e^lambda = 1 + u^2 + v^2
    def jets(U, V):
        shp = U.shape + (3,)
        phi = np.empty(shp)
        phi[..., 0] = U - U**3 / 3.0 + U * V**2
        phi[..., 1] = -(V - V**3 / 3.0 + V * U**2)
        phi[..., 2] = U**2 - V**2
        d1 = np.empty(shp)
        d1[..., 0] = 1.0 - U**2 + V**2
        d1[..., 1] = -2.0 * U * V
        d1[..., 2] = 2.0 * U
        d2 = np.empty(shp)
        d2[..., 0] = 2.0 * U * V
        d2[..., 1] = -(1.0 - V**2 + U**2)
        d2[..., 2] = -2.0 * V
        d11 = np.empty(shp)
        d11[..., 0] = -2.0 * U
        d11[..., 1] = -2.0 * V
        d11[..., 2] = 2.0
        d12 = np.empty(shp)
        d12[..., 0] = 2.0 * V
        d12[..., 1] = -2.0 * U
        d12[..., 2] = 0.0
        d22 = np.empty(shp)
        d22[..., 0] = 2.0 * U
        d22[..., 1] = 2.0 * V
        d22[..., 2] = -2.0
        return _jet3(m, phi, d1, d2, d11, d12, d22)

    return jets


_SQRT2 = np.sqrt(2.0)


def _clifford_jets(m: int) -> JetFn:
    # Torus of revolution with radii (sqrt 2, 1); the profile coordinate is
    # reparametrized by arc length of the conformal structure,
    # v(t) = 2 atan((sqrt 2 + 1) tan(t/2)), which integrates dv/dt = sqrt 2 + cos v
    # in closed form.  e^lambda = sqrt 2 + cos v.
    def jets(X1, X2):
        v = 2.0 * np.arctan((_SQRT2 + 1.0) * np.tan(X2 / 2.0))
        cv, sv = np.cos(v), np.sin(v)
        vp = _SQRT2 + cv           # dv/dt
        vpp = -sv * vp             # d2v/dt2
        c1, s1 = np.cos(X1), np.sin(X1)
        r = _SQRT2 + cv
        shp = X1.shape + (3,)
        phi = np.empty(shp)
        phi[..., 0], phi[..., 1], phi[..., 2] = r * c1, r * s1, sv
        d1 = np.zeros(shp)
        d1[..., 0], d1[..., 1] = -r * s1, r * c1
        d2 = np.empty(shp)
        d2[..., 0] = -sv * vp * c1
        d2[..., 1] = -sv * vp * s1
        d2[..., 2] = cv * vp
        d11 = np.zeros(shp)
        d11[..., 0], d11[..., 1] = -r * c1, -r * s1
        d12 = np.zeros(shp)
        d12[..., 0], d12[..., 1] = sv * vp * s1, -sv * vp * c1
        d22 = np.empty(shp)
        d22[..., 0] = -(cv * vp**2 + sv * vpp) * c1
        d22[..., 1] = -(cv * vp**2 + sv * vpp) * s1
        d22[..., 2] = cv * vpp - sv * vp**2
        return _jet3(m, phi, d1, d2, d11, d12, d22)

    return jets


def _graph_jets(m: int, seed: int, amplitude: float, s: float) -> JetFn:
    """Plane plus seeded smooth Gaussian bumps in each normal coordinate."""
    rng = np.random.default_rng(seed)
    n_normal = m - 2
    bumps = []  # per normal coordinate: list of (c, p1, p2, w)
    for _ in range(n_normal):
        k = rng.integers(2, 4)
        bumps.append(
            [
                (
                    float(rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])),
                    float(rng.uniform(-0.5 * s, 0.5 * s)),
                    float(rng.uniform(-0.5 * s, 0.5 * s)),
                    float(rng.uniform(s / 3.0, s / 2.0)),
                )
                for _ in range(k)
            ]
        )

    def jets(X1, X2):
        shp = X1.shape + (m,)
        phi = np.zeros(shp)
        phi[..., 0], phi[..., 1] = X1, X2
        d1 = np.zeros(shp)
        d1[..., 0] = 1.0
        d2 = np.zeros(shp)
        d2[..., 1] = 1.0
        d11 = np.zeros(shp)
        d12 = np.zeros(shp)
        d22 = np.zeros(shp)
        for k, blist in enumerate(bumps):
            comp = 2 + k
            for c, p1, p2, w in blist:
                u1, u2 = (X1 - p1) / w, (X2 - p2) / w
                g = amplitude * c * np.exp(-(u1**2) - u2**2)
                phi[..., comp] += g
                d1[..., comp] += -2.0 * u1 / w * g
                d2[..., comp] += -2.0 * u2 / w * g
                d11[..., comp] += (4.0 * u1**2 - 2.0) / w**2 * g
                d22[..., comp] += (4.0 * u2**2 - 2.0) / w**2 * g
                d12[..., comp] += 4.0 * u1 * u2 / w**2 * g
        return Jet(phi, d1, d2, d11, d12, d22)

    return jets


def _positive(params: dict, *names: str) -> None:
    for name in names:
        if params.get(name, 1.0) <= 0.0:
            raise ValueError(f"parameter {name} must be positive")


def make_surface(kind: str, grid: Grid, m: int = 3, **params) -> ImmersionPatch:
    """Construct a catalog surface patch on the given grid.

    Kinds: plane, sphere(rho), cylinder(rho), catenoid, enneper,
    clifford_torus_patch, graph_perturbation(seed, amplitude).
    """
    if m < 3 or m > mv.MAX_DIM:
        raise ValueError(f"ambient dimension m={m} outside 3..{mv.MAX_DIM}")
    kind = kind.replace("-", "_")
    if kind not in CATALOG:
        raise ValueError(f"unknown surface {kind!r}; have {sorted(CATALOG)}")
    _positive(params, *(k for k in params if k in ("rho", "amplitude")))
    builder = CATALOG[kind]
    jets = builder(grid=grid, m=m, **params)
    X1, X2 = grid.nodes()
    jet0 = jets(X1, X2)
    if not np.all(np.isfinite(jet0.phi)):
        raise ValueError(f"surface {kind} is not finite on this grid")
    label = kind if not params else kind + "(" + ",".join(f"{k}={v}" for k, v in sorted(params.items())) + ")"
    return ImmersionPatch(grid=grid, m=m, phi=jet0.phi, jets=jets, label=label, params=dict(params, m=m))


CATALOG: dict[str, Callable[..., JetFn]] = {
    "plane": lambda grid, m: _plane_jets(m),
    "sphere": lambda grid, m, rho=1.0: _sphere_jets(m, rho),
    "cylinder": lambda grid, m, rho=1.0: _cylinder_jets(m, rho),
    "catenoid": lambda grid, m: _catenoid_jets(m),
    "enneper": lambda grid, m: _enneper_jets(m),
    "clifford_torus_patch": lambda grid, m: _clifford_jets(m),
    "graph_perturbation": lambda grid, m, seed=0, amplitude=0.05: _graph_jets(m, seed, amplitude, grid.s),
}

#: catalog surfaces that are Willmore (divergence-form residual -> 0)
WILLMORE_SURFACES = frozenset({"plane", "sphere", "catenoid", "enneper", "clifford_torus_patch"})


def surface_from_spec(spec: dict) -> ImmersionPatch:
    """Build a patch from {type, params, m, grid: {s, n}}."""
    grid = Grid(float(spec["grid"]["s"]), int(spec["grid"]["n"]))
    return make_surface(spec["type"], grid, m=int(spec.get("m", 3)), **spec.get("params", {}))


def load_surface_spec(path) -> ImmersionPatch:
    with open(path) as fh:
        return surface_from_spec(json.load(fh))


def perturb_normal(patch: ImmersionPatch, seed: int = 0, amplitude: float = 0.05) -> ImmersionPatch:
    """Add a seeded smooth normal bump, windowed to vanish at the boundary.

    The result has no analytic jets; geometry falls back to FD.  Used to
    produce off-critical starting points for the descent flow.
    """
    bundle = frames(patch)
    grid = patch.grid
    X1, X2 = grid.nodes()
    window = np.cos(np.pi * X1 / (2 * grid.s)) ** 2 * np.cos(np.pi * X2 / (2 * grid.s)) ** 2
    rng = np.random.default_rng(seed)
    g = np.zeros_like(X1)
    for _ in range(3):
        p1, p2 = rng.uniform(-0.4 * grid.s, 0.4 * grid.s, size=2)
        w = rng.uniform(grid.s / 3.0, grid.s / 2.0)
        c = rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
        g += c * np.exp(-((X1 - p1) ** 2 + (X2 - p2) ** 2) / w**2)
    bump = amplitude * window * g
    phi = patch.phi + bump[..., None] * bundle.normal_frame[0]
    return patch.with_phi(phi, label=f"perturbed-{patch.label}(seed={seed},amp={amplitude})")


# ---------------------------------------------------------------------------
# Geometry bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometryBundle:
    """Derived conformal-frame geometry of an immersion patch.

    normal_frame has shape (m-2, n, n, m); h has shape (n, n, m-2, 2, 2);
    gauss holds blade coefficients of n = n_1 ^ ... ^ n_{m-2}.
    t1/t2 are the exactly orthonormalized tangents used for projections
    (they agree with e1/e2 up to the conformality defect).
    """

    patch: ImmersionPatch
    jet: Jet
    lam: np.ndarray
    elam: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    ez: np.ndarray
    ezstar: np.ndarray
    normal_frame: np.ndarray
    gauss: np.ndarray
    conformal_defect: float
    h: np.ndarray | None = None
    H: np.ndarray | None = None
    H0: np.ndarray | None = None
    K_lambda: np.ndarray | None = None
    K_gauss: np.ndarray | None = None
    area_density: np.ndarray | None = None

    @property
    def grid(self) -> Grid:
        return self.patch.grid

    @property
    def m(self) -> int:
        return self.patch.m

    def project_tangent(self, X: np.ndarray) -> np.ndarray:
        """Tangential part of an ambient (possibly complex) vector field."""
        out = np.zeros_like(X)
        for t in (self.t1, self.t2):
            out = out + np.sum(X * t, axis=-1)[..., None] * t
        return out

    def project_normal(self, X: np.ndarray) -> np.ndarray:
        """pi_n(X): removal of the tangential components."""
        return X - self.project_tangent(X)

    def project_normal_frame(self, X: np.ndarray) -> np.ndarray:
        """pi_n(X) via expansion over the normal frame (cross-check route)."""
        out = np.zeros_like(X)
        for a in range(self.m - 2):
            na = self.normal_frame[a]
            out = out + np.sum(X * na, axis=-1)[..., None] * na
        return out


def conformal_factor(patch: ImmersionPatch) -> tuple[np.ndarray, float]:
    """Conformal factor lambda = log |d1 Phi| and the conformality defect.

    The defect is the interior max of ||d1|-|d2||/e^lambda and
    |d1 . d2|/e^2lambda; degenerate nodes raise.
    """
    jet = patch.jet()
    n1 = np.linalg.norm(jet.d1, axis=-1)
    n2 = np.linalg.norm(jet.d2, axis=-1)
    if np.min(n1) < 1e-12 or np.min(n2) < 1e-12:
        i, j = np.unravel_index(int(np.argmin(n1 + n2)), n1.shape)
        raise DegenerateImmersionError(f"immersion degenerates near node ({i}, {j})")
    win = patch.grid.interior()
    cross = np.abs(np.sum(jet.d1 * jet.d2, axis=-1))
    defect = float(max(np.max(np.abs(n1 - n2)[win] / n1[win]), np.max(cross[win] / n1[win] ** 2)))
    return np.log(n1), defect


def _orthonormal_tangents(jet: Jet) -> tuple[np.ndarray, np.ndarray]:
    t1 = jet.d1 / np.linalg.norm(jet.d1, axis=-1, keepdims=True)
    t2 = jet.d2 - np.sum(jet.d2 * t1, axis=-1, keepdims=True) * t1
    t2 = t2 / np.linalg.norm(t2, axis=-1, keepdims=True)
    return t1, t2


_SEED_ACCEPT = 0.35


def frames(patch: ImmersionPatch) -> GeometryBundle:
    """First-order geometry: conformal frame, normal frame, Gauss map."""
    jet = patch.jet()
    m = patch.m
    lam, defect = conformal_factor(patch)
    elam = np.exp(lam)
    e1 = jet.d1 / elam[..., None]
    e2 = jet.d2 / elam[..., None]
    t1, t2 = _orthonormal_tangents(jet)

    accepted: list[np.ndarray] = []
    for comp in range(2, m):
        if len(accepted) == m - 3:
            break
        seed = np.zeros(patch.phi.shape)
        seed[..., comp] = 1.0
        r = seed - np.sum(seed * t1, axis=-1, keepdims=True) * t1
        r -= np.sum(r * t2, axis=-1, keepdims=True) * t2
        for na in accepted:
            r -= np.sum(r * na, axis=-1, keepdims=True) * na
        norms = np.linalg.norm(r, axis=-1)
        if np.min(norms) < _SEED_ACCEPT:
            continue
        accepted.append(r / norms[..., None])
    if len(accepted) != m - 3:
        raise FrameError(
            f"only {len(accepted)} of {m - 3} seeded normals stay transverse on {patch.label}"
        )

    # last normal is the Hodge dual of everything so far; this fixes the
    # orientation so that star(n ^ e1) = e2 without any sign fix-up
    w = mv.field_wedge(m, mv.vector_field_to_mv(t1), mv.vector_field_to_mv(t2))
    for na in accepted:
        w = mv.field_wedge(m, w, mv.vector_field_to_mv(na))
    n_last = mv.mv_field_vector_part(mv.field_hodge(m, w))
    n_last = n_last / np.linalg.norm(n_last, axis=-1, keepdims=True)

    normal_frame = np.stack(accepted + [n_last])
    gauss = mv.vector_field_to_mv(normal_frame[0])
    for a in range(1, m - 2):
        gauss = mv.field_wedge(m, gauss, mv.vector_field_to_mv(normal_frame[a]))

    return GeometryBundle(
        patch=patch,
        jet=jet,
        lam=lam,
        elam=elam,
        e1=e1,
        e2=e2,
        t1=t1,
        t2=t2,
        ez=0.5 * (e1 - 1j * e2),
        ezstar=0.5 * (e1 + 1j * e2),
        normal_frame=normal_frame,
        gauss=gauss,
        conformal_defect=defect,
    )


def second_fundamental(patch: ImmersionPatch, bundle: GeometryBundle | None = None) -> GeometryBundle:
    """Complete the bundle with h, H, H0 and both curvature routes."""
    if bundle is None:
        bundle = frames(patch)
    jet = bundle.jet
    m = patch.m
    e2lam = bundle.elam**2
    second = ((jet.d11, jet.d12), (jet.d12, jet.d22))
    h = np.empty(patch.phi.shape[:-1] + (m - 2, 2, 2))
    for a in range(m - 2):
        na = bundle.normal_frame[a]
        for i in range(2):
            for j in range(2):
                h[..., a, i, j] = np.sum(na * second[i][j], axis=-1) / e2lam
    Hcoef = 0.5 * (h[..., 0, 0] + h[..., 1, 1])
    H0coef = 0.5 * (h[..., 0, 0] - h[..., 1, 1] + 2j * h[..., 0, 1])
    H = np.einsum("...a,a...k->...k", Hcoef, bundle.normal_frame)
    H0 = np.einsum("...a,a...k->...k", H0coef, bundle.normal_frame.astype(complex))
    K_lambda = -dg.laplace(patch.grid, bundle.lam) / e2lam
    normB2 = np.sum(h**2, axis=(-1, -2, -3))
    normH2 = np.sum(np.abs(H) ** 2, axis=-1)
    K_gauss = 2.0 * normH2 - 0.5 * normB2
    return replace(
        bundle,
        h=h,
        H=H,
        H0=H0,
        K_lambda=K_lambda,
        K_gauss=K_gauss,
        area_density=e2lam,
    )


def make_bundle(patch: ImmersionPatch) -> GeometryBundle:
    """Full geometry bundle in one step."""
    return second_fundamental(patch)


def willmore_energy(bundle: GeometryBundle) -> float:
    """Trapezoidal quadrature of |H|^2 e^{2 lambda} over the grid square."""
    density = np.sum(np.abs(bundle.H) ** 2, axis=-1) * bundle.area_density
    return float(dg.integrate(bundle.grid, density))


def export_bundle(bundle: GeometryBundle, directory) -> dict[str, str]:
    """Write the bundle's primary fields in the binary field format.

    Returns {field name: path}.  Complex fields store interleaved
    real/imaginary slots; curvature.bin packs (K_lambda, K_gauss).
    """
    from pathlib import Path

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    grid = bundle.grid
    fields = {
        "phi": bundle.patch.phi,
        "lambda": bundle.lam,
        "mean_curvature": bundle.H,
        "weingarten": bundle.H0,
        "curvature": np.stack([bundle.K_lambda, bundle.K_gauss], axis=-1),
        "gauss_map": bundle.gauss,
    }
    paths = {}
    for name, data in fields.items():
        path = out / f"{name}.bin"
        dg.write_field(path, grid, data)
        paths[name] = str(path)
    return paths
