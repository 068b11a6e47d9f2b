"""Divergence-form Willmore operator and its conservation identities.

The central object is the ambient-vector-valued field

    Q := grad H - 3 pi_n(grad H) + star(grad_perp n ^ H),

whose divergence vanishes exactly at Willmore immersions.  Numerically
validated facts wired into this module (each is also a test):

* div Q = -2 e^{2 lambda} (Lap_perp H + A~(H) - 2 |H|^2 H), so the
  Euler-Lagrange-normalized residual -(1/2) e^{-2 lambda} div Q equals
  the classical Willmore operator; on the unit cylinder its normal
  component is 1/(4 rho^3).
* grad Phi . Q = 0 and grad Phi ^ Q = -2 grad Phi ^ grad H pointwise,
  for every conformal immersion (tangency identities).
* (1/2)(Q_2 + i Q_1) = -2 i e^lambda (H0* . H) e_{z*} - 2 i pi_n(dz H),
  the closed complex form of the potential derivative (used by the
  conformal-Willmore extraction).
* With S, R built from grad S = grad Phi . L and
  grad R = grad Phi ^ L + 2 grad_perp Phi ^ H, the system

      Lap S = (grad star n) . grad_perp R
      Lap R = (-1)^m star(grad n . grad_perp R) - (grad star n) grad_perp S

  holds (the ambient-dimension reading of the exponent), and so does

      Lap Phi = 1/2 (grad R . grad_perp Phi - grad S grad_perp Phi),

  where . is the first-order contraction of multivec.bullet.

Potentials are fixed mean-zero; every off-shell input degrades to a
reported defect rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diskgrid as dg
from . import multivec as mv
from .immersion import GeometryBundle

__all__ = [
    "surface_scale",
    "assemble_Q",
    "willmore_residual",
    "tangency_identities",
    "recover_L",
    "assemble_L0",
    "dz_L0_closed_form",
    "build_S_R",
    "sr_system_residual",
    "phi_identity_residual",
    "LRecovery",
    "L0Data",
    "SRData",
]


def surface_scale(bundle: GeometryBundle) -> float:
    """Normalization constant for residuals: sup e^{2 lambda}(1 + |H|^2 + |B|^2)."""
    win = bundle.grid.interior()
    normB2 = np.sum(bundle.h**2, axis=(-1, -2, -3))
    normH2 = np.sum(np.abs(bundle.H) ** 2, axis=-1)
    return float(max(1.0, np.max((bundle.area_density * (1.0 + normH2 + normB2))[win])))


def _sup(field: np.ndarray, win) -> float:
    v = field[win]
    if v.ndim > 2:
        v = np.linalg.norm(np.abs(v), axis=-1)
    return float(np.max(np.abs(v)))


def assemble_Q(bundle: GeometryBundle) -> np.ndarray:
    """Q = grad H - 3 pi_n(grad H) + star(grad_perp n ^ H), shape (2, n, n, m)."""
    grid, m = bundle.grid, bundle.m
    gradH = dg.grad(grid, bundle.H)
    tang = gradH - 3.0 * np.stack([bundle.project_normal(gradH[0]), bundle.project_normal(gradH[1])])
    gpn = dg.grad_perp(grid, bundle.gauss)
    Hmv = mv.vector_field_to_mv(bundle.H)
    star = np.stack(
        [mv.mv_field_vector_part(mv.field_hodge(m, mv.field_wedge(m, gpn[j], Hmv))) for j in range(2)]
    )
    return tang + star


def willmore_residual(
    bundle: GeometryBundle,
    Q: np.ndarray | None = None,
    normalization: str = "euler_lagrange",
) -> np.ndarray:
    """Residual of the divergence-form Willmore equation, shape (n, n, m).

    ``normalization="euler_lagrange"`` (default) returns
    -(1/2) e^{-2 lambda} div Q, the classical Willmore operator
    Lap_perp H + A~(H) - 2 |H|^2 H; ``"divergence"`` returns raw div Q.
    Both vanish at O(h^2) exactly on Willmore patches.
    """
    if Q is None:
        Q = assemble_Q(bundle)
    divQ = dg.div(bundle.grid, Q)
    if normalization == "divergence":
        return divQ
    if normalization == "euler_lagrange":
        return -0.5 * divQ / bundle.area_density[..., None]
    raise ValueError(f"unknown normalization {normalization!r}")


def tangency_identities(bundle: GeometryBundle, Q: np.ndarray | None = None) -> tuple[float, float]:
    """Pointwise tangency identities of Q, as normalized interior sup-residuals.

    resid_dot  : grad Phi . Q = 0
    resid_wedge: grad Phi ^ Q + 2 grad Phi ^ grad H = 0
    Both hold on every conformal patch, Willmore or not.
    """
    if Q is None:
        Q = assemble_Q(bundle)
    grid, m = bundle.grid, bundle.m
    jet = bundle.jet
    win = grid.interior()
    scale = surface_scale(bundle)
    dot = np.sum(jet.d1 * Q[0] + jet.d2 * Q[1], axis=-1)
    gradH = dg.grad(grid, bundle.H)
    wedge = sum(
        mv.field_wedge(m, mv.vector_field_to_mv(dphi), mv.vector_field_to_mv(Qj + 2.0 * gHj))
        for dphi, Qj, gHj in ((jet.d1, Q[0], gradH[0]), (jet.d2, Q[1], gradH[1]))
    )
    return _sup(dot, win) / scale, _sup(wedge, win) / scale


@dataclass(frozen=True)
class LRecovery:
    """Potential L with grad_perp L ~ Q, recovered componentwise."""

    L: np.ndarray
    defect: float          # || grad_perp L - Q ||_L2 / surface scale
    defect_abs: float
    compat_defect: float


def recover_L(bundle: GeometryBundle, Q: np.ndarray | None = None) -> LRecovery:
    """Recover L from grad_perp L = Q via componentwise curl potentials.

    Exact (to O(h^2)) precisely when div Q ~ 0, i.e. on Willmore patches;
    otherwise the defect stays bounded away from zero and is reported.
    L is normalized mean-zero per component.
    """
    if Q is None:
        Q = assemble_Q(bundle)
    grid = bundle.grid
    L = np.empty_like(Q[0])
    defect2 = 0.0
    compat = 0.0
    for k in range(Q.shape[-1]):
        res = dg.curl_potential(grid, Q[:, :, :, k])
        L[..., k] = res.u
        defect2 += res.defect**2
        compat = max(compat, res.compat_defect)
    return LRecovery(L, np.sqrt(defect2) / surface_scale(bundle), np.sqrt(defect2), compat)


@dataclass(frozen=True)
class L0Data:
    """The defining combination grad_perp L0 (== Q) against its closed form."""

    gradperp_L0: np.ndarray    # (2, n, n, m); the Q-combination itself
    dz_closed: np.ndarray      # -2i e^lam (H0*.H) e_{z*} - 2i pi_n(dz H)
    consistency: float         # normalized interior sup of the mismatch
    L0: np.ndarray             # curl potential of the combination
    L0_defect: float


def dz_L0_closed_form(bundle: GeometryBundle) -> np.ndarray:
    """Closed complex form of dz L0: -2i e^lam (H0* . H) e_{z*} - 2i pi_n(dz H)."""
    grid = bundle.grid
    dzH = dg.dz(grid, bundle.H)
    H0cH = np.sum(np.conj(bundle.H0) * bundle.H, axis=-1)
    return -2j * (bundle.elam * H0cH)[..., None] * bundle.ezstar - 2j * bundle.project_normal(dzH)


def assemble_L0(bundle: GeometryBundle, Q: np.ndarray | None = None) -> L0Data:
    """Assemble grad_perp L0 both ways and report their mutual residual.

    The defining combination is Q itself written as a rotated gradient,
    whose dz-transcription is (1/2)(Q_2 + i Q_1); the closed form comes
    from the complex frame identities.  L0 is recovered by curl
    potential (it coincides with recover_L on the same Q).
    """
    if Q is None:
        Q = assemble_Q(bundle)
    win = bundle.grid.interior()
    W = 0.5 * (Q[1] + 1j * Q[0])
    Z0 = dz_L0_closed_form(bundle)
    consistency = _sup(np.abs(W - Z0), win) / surface_scale(bundle)
    rec = recover_L(bundle, Q)
    return L0Data(Q, Z0, consistency, rec.L, rec.defect)


@dataclass(frozen=True)
class SRData:
    """Scalar potential S and 2-vector potential R with their defects."""

    S: np.ndarray              # (n, n)
    R: np.ndarray              # blade coefficients (n, n, 2**m), grade 2
    S_defect: float            # || grad S - grad Phi . L ||_L2 / scale
    R_defect: float
    S_defect_abs: float
    R_defect_abs: float


def build_S_R(bundle: GeometryBundle, L: np.ndarray) -> SRData:
    """Integrate grad S := grad Phi . L, grad R := grad Phi ^ L + 2 grad_perp Phi ^ H.

    Both potentials are mean-zero Neumann integrations; the defects
    measure the curl-freeness of the targets, which the conservation
    system guarantees only when L actually solves it.
    """
    grid, m = bundle.grid, bundle.m
    jet = bundle.jet
    TS = np.stack([np.sum(jet.d1 * L, axis=-1), np.sum(jet.d2 * L, axis=-1)])
    resS = dg.grad_potential(grid, TS)
    Lmv = mv.vector_field_to_mv(L)
    Hmv = mv.vector_field_to_mv(bundle.H)
    gperp_phi = (-jet.d2, jet.d1)
    TR = np.stack(
        [
            mv.field_wedge(m, mv.vector_field_to_mv(dphi), Lmv)
            + 2.0 * mv.field_wedge(m, mv.vector_field_to_mv(gp), Hmv)
            for dphi, gp in ((jet.d1, gperp_phi[0]), (jet.d2, gperp_phi[1]))
        ]
    )
    R = np.zeros_like(TR[0])
    rdef2 = 0.0
    for mask in mv.grade_masks(m, 2):
        res = dg.grad_potential(grid, TR[:, :, :, mask])
        R[..., mask] = res.u
        rdef2 += res.defect**2
    scale = surface_scale(bundle)
    return SRData(resS.u, R, resS.defect / scale, np.sqrt(rdef2) / scale, resS.defect, np.sqrt(rdef2))


def sr_system_residual(
    bundle: GeometryBundle, S: np.ndarray, R: np.ndarray, sign_exponent: str = "ambient"
) -> tuple[float, float]:
    """Normalized interior sup-residuals of the S/R elliptic system.

    ``sign_exponent="ambient"`` uses (-1)^m in front of the contraction
    term (the reading validated for m = 3, 4, 5); "flipped" computes the
    opposite sign, kept as a diagnostic control.
    """
    grid, m = bundle.grid, bundle.m
    win = grid.interior()
    scale = surface_scale(bundle)
    starn = mv.field_hodge(m, bundle.gauss)
    gstarn = dg.grad(grid, starn)
    ggauss = dg.grad(grid, bundle.gauss)
    gperpR = dg.grad_perp(grid, R)
    gperpS = dg.grad_perp(grid, S)
    res_S = dg.laplace(grid, S) - sum(mv.field_inner(m, gstarn[j], gperpR[j]) for j in range(2))
    contraction = sum(mv.field_bullet(m, ggauss[j], gperpR[j]) for j in range(2))
    sign = (-1.0) ** m if sign_exponent == "ambient" else -((-1.0) ** m)
    rhs_R = sign * mv.field_hodge(m, contraction) - sum(
        gstarn[j] * gperpS[j][..., None] for j in range(2)
    )
    res_R = dg.laplace(grid, R) - rhs_R
    return _sup(res_S, win) / scale, _sup(res_R, win) / scale


def phi_identity_residual(bundle: GeometryBundle, S: np.ndarray, R: np.ndarray) -> float:
    """Residual of Lap Phi = 1/2 (grad R . grad_perp Phi - grad S grad_perp Phi).

    The contraction is multivec.bullet; the identity holds whenever
    (S, R) come from a potential L solving the conservation system.
    Returns the normalized interior sup-norm.
    """
    grid, m = bundle.grid, bundle.m
    jet = bundle.jet
    win = grid.interior()
    gperp_phi = (-jet.d2, jet.d1)
    gR = dg.grad(grid, R)
    gS = dg.grad(grid, S)
    contraction = sum(
        mv.mv_field_vector_part(mv.field_bullet(m, gR[j], mv.vector_field_to_mv(gperp_phi[j])))
        for j in range(2)
    )
    sterm = sum(gS[j][..., None] * gperp_phi[j] for j in range(2))
    resid = dg.laplace(grid, jet.phi) - 0.5 * (contraction - sterm)
    return _sup(resid, win) / surface_scale(bundle)
