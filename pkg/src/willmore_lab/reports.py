"""Residual reports with a stable key contract, per-surface expectations,
and refinement-ratio tables.

Report keys (values are dimensionless; identity residuals are interior
sup-norms divided by the surface scale sup e^{2 lambda}(1+|H|^2+|B|^2),
except divQ_inf which is the absolute interior sup of the
Euler-Lagrange-normalized Willmore residual so that catalog magnitudes
like 1/(4 rho^3) on the cylinder are read off directly):

    dot_identity, wedge_identity  tangency identities of Q
    divQ_inf                      Willmore residual sup (EL normalization)
    L_defect                      ||grad_perp L - Q||_L2 / scale
    S_defect, R_defect            potential integration defects / scale
    srS_resid, srR_resid          S/R elliptic system residuals
    phi_identity                  Lap Phi reconstruction residual
    L0_consistency                closed dz-form vs Q-combination
    cwbis_resid                   Lap(L - L0) = 2 i H0 f closure (interior L2)
    a4_resid, a5_resid            complex frame derivative identities
    codazzi_resid                 Codazzi-Mainardi residual
    f_inf                         sup |f| of the extracted coordinate
    f_holo_defect                 relative L2 of dz* f
    cw_resid_f, cw_resid_zero     conformal Willmore residual with f / with 0

Informational keys (never thresholded): f_inf, cw_resid_zero,
gradn_energy, conformal_defect, willmore_energy.  Expected-nonzero keys
per catalog surface are declared in SURFACE_INFO so that verification
semantics stay data driven.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import confwillmore as cwmod
from . import conservation as cons
from .immersion import GeometryBundle, ImmersionPatch, make_bundle, willmore_energy

__all__ = [
    "REPORT_KEYS",
    "INFORMATIONAL_KEYS",
    "SURFACE_INFO",
    "DEFAULT_THRESHOLDS",
    "SurfaceInfo",
    "residual_report",
    "check_report",
    "refinement_ratios",
    "FLOOR",
]

REPORT_KEYS = (
    "dot_identity",
    "wedge_identity",
    "divQ_inf",
    "L_defect",
    "S_defect",
    "R_defect",
    "srS_resid",
    "srR_resid",
    "phi_identity",
    "L0_consistency",
    "cwbis_resid",
    "a4_resid",
    "a5_resid",
    "codazzi_resid",
    "f_inf",
    "f_holo_defect",
    "cw_resid_f",
    "cw_resid_zero",
)

INFORMATIONAL_KEYS = frozenset(
    {"f_inf", "cw_resid_zero", "gradn_energy", "conformal_defect", "willmore_energy"}
)

DEFAULT_THRESHOLDS: dict[str, float] = {
    "dot_identity": 1e-3,
    "wedge_identity": 1e-3,
    "divQ_inf": 1e-3,
    "L_defect": 1e-2,
    "S_defect": 1e-2,
    "R_defect": 1e-2,
    "srS_resid": 1e-2,
    "srR_resid": 1e-2,
    "phi_identity": 1e-3,
    "L0_consistency": 1e-3,
    "cwbis_resid": 1e-2,
    "a4_resid": 1e-3,
    "a5_resid": 1e-3,
    "codazzi_resid": 1e-3,
    "f_holo_defect": 1e-2,
    "cw_resid_f": 1e-3,
}


@dataclass(frozen=True)
class SurfaceInfo:
    """Verification metadata for a catalog surface."""

    willmore: bool
    exempt: frozenset[str] = field(default_factory=frozenset)
    # expected constant value of the extracted quadratic differential, as a
    # function of the surface parameters (None: f is expected to vanish)
    expected_f: object = None


SURFACE_INFO: dict[str, SurfaceInfo] = {
    "plane": SurfaceInfo(willmore=True),
    "sphere": SurfaceInfo(willmore=True),
    "catenoid": SurfaceInfo(willmore=True),
    "enneper": SurfaceInfo(willmore=True),
    "clifford_torus_patch": SurfaceInfo(willmore=True, exempt=frozenset({"f_holo_defect"})),
    "cylinder": SurfaceInfo(
        willmore=False,
        exempt=frozenset({"divQ_inf", "L_defect"}),
        expected_f=lambda params: 0.5 / params.get("rho", 1.0) ** 2,
    ),
    # negative-control surface: only approximately conformal, so every
    # identity has a conformality-defect floor and nothing is thresholded
    "graph_perturbation": SurfaceInfo(willmore=False, exempt=frozenset(REPORT_KEYS)),
}

#: sentinel for refinement ratios of exactly-zero keys
FLOOR = "floor"


def _interior_sup(bundle: GeometryBundle, field_values: np.ndarray) -> float:
    win = bundle.grid.interior()
    v = np.abs(field_values[win])
    if v.ndim > 2:
        v = np.linalg.norm(v, axis=-1)
    return float(np.max(v))


def residual_report(source: ImmersionPatch | GeometryBundle) -> dict[str, float]:
    """Run the full conservation / conformal-Willmore residual suite."""
    bundle = source if isinstance(source, GeometryBundle) else make_bundle(source)
    scale = cons.surface_scale(bundle)
    Q = cons.assemble_Q(bundle)

    report: dict[str, float] = {}
    dot, wedge = cons.tangency_identities(bundle, Q)
    report["dot_identity"] = dot
    report["wedge_identity"] = wedge
    report["divQ_inf"] = _interior_sup(bundle, cons.willmore_residual(bundle, Q))

    recovery = cons.recover_L(bundle, Q)
    report["L_defect"] = recovery.defect
    report["L0_consistency"] = cons.assemble_L0(bundle, Q).consistency

    cdata = cwmod.extract_A_f(bundle)
    report["f_inf"] = _interior_sup(bundle, cdata.f)
    report["f_holo_defect"] = cdata.holomorphy_defect
    report["cw_resid_f"] = _interior_sup(bundle, cwmod.conformal_willmore_residual(bundle, cdata.f)) / scale
    report["cw_resid_zero"] = _interior_sup(bundle, cwmod.conformal_willmore_residual(bundle, 0.0)) / scale
    report["cwbis_resid"] = cwmod.eq13_residual(bundle, cdata.f, cdata.L, Q)

    sr = cons.build_S_R(bundle, cdata.L)
    report["S_defect"] = sr.S_defect
    report["R_defect"] = sr.R_defect
    srS, srR = cons.sr_system_residual(bundle, sr.S, sr.R)
    report["srS_resid"] = srS
    report["srR_resid"] = srR
    report["phi_identity"] = cons.phi_identity_residual(bundle, sr.S, sr.R)

    a4, a5 = cwmod.frame_derivative_residuals(bundle)
    report["a4_resid"] = a4
    report["a5_resid"] = a5
    report["codazzi_resid"] = cwmod.codazzi_residual(bundle)

    report["gradn_energy"] = cwmod.gauss_map_energy(bundle)
    report["conformal_defect"] = bundle.conformal_defect
    report["willmore_energy"] = willmore_energy(bundle)
    return report


def check_report(
    report: dict[str, float],
    kind: str,
    thresholds: dict[str, float] | None = None,
) -> dict[str, tuple[float, float]]:
    """Threshold check honoring catalog exemptions.

    Returns {key: (value, threshold)} for every violated key; empty
    means pass.  Unknown surfaces are treated as fully thresholded.
    """
    thresholds = dict(DEFAULT_THRESHOLDS if thresholds is None else thresholds)
    info = SURFACE_INFO.get(kind, SurfaceInfo(willmore=False))
    failures: dict[str, tuple[float, float]] = {}
    for key, bound in thresholds.items():
        if key in INFORMATIONAL_KEYS or key in info.exempt or key not in report:
            continue
        if not np.isfinite(report[key]) or report[key] > bound:
            failures[key] = (report[key], bound)
    return failures


def refinement_ratios(
    reports: list[dict[str, float]], floor: float = 1e-12
) -> list[dict[str, object]]:
    """Richardson ratios between consecutive grid reports.

    Exactly-zero keys (both values below the floor) yield the FLOOR
    sentinel instead of a meaningless quotient.
    """
    out: list[dict[str, object]] = []
    for coarse, fine in zip(reports, reports[1:]):
        row: dict[str, object] = {}
        for key in REPORT_KEYS:
            if key not in coarse or key in INFORMATIONAL_KEYS:
                continue
            a, b = coarse[key], fine[key]
            if max(abs(a), abs(b)) < floor:
                row[key] = FLOOR
            elif abs(b) < 1e-300:
                row[key] = np.inf
            else:
                row[key] = a / b
        out.append(row)
    return out
