"""The (kappa, mu)'-nullity condition and the classification invariant.

    R_{XY} xi = kappa (eta(Y) X - eta(X) Y) + mu (eta(Y) h'X - eta(X) h'Y)

Throughout, ``mu = -2 alpha^2`` is the value forced when ``h' != 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acm_structure import CHECK_FACTOR, AcmStructure, h_prime_spectrum
from .canonical_connection import canonical_curvature_direct, check_nabla_T_and_R
from .reports import CheckReport, ResidualTracker
from .tensor_core import (
    DEFAULT_TOLERANCES,
    STEP_NESTED,
    Tolerances,
    require_margin,
    sectional_curvature_value,
    to_frame,
)

KMU_THRESHOLD_ANALYTIC = 1e-5
KMU_THRESHOLD_NUMERIC = 1e-3
H_ZERO = 1e-6
SPECTRUM_MATCH = 1e-6


class DegenerateFit(ValueError):
    """``h'`` vanishes, so ``mu`` is not determined by the curvature."""


class NotKmuSpace(ValueError):
    pass


class KappaOutOfRange(ValueError):
    pass


class PreconditionFailed(ValueError):
    pass


@dataclass
class NullityFit:
    kappa: float
    mu: float | None
    residual: float
    is_kmu: bool
    threshold: float
    h_vanishes: bool = False

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "mu": self.mu,
            "residual": self.residual,
            "is_kmu": self.is_kmu,
            "threshold": self.threshold,
            "h_vanishes": self.h_vanishes,
        }


def kmu_threshold(S: AcmStructure) -> float:
    return KMU_THRESHOLD_ANALYTIC if S.analytic else KMU_THRESHOLD_NUMERIC


def _frame_data(S: AcmStructure, x):
    """``R(e_a, e_b) xi`` and ``h'`` in the orthonormal frame (``e_0 = xi``)."""
    E = S.frame(x)
    Rf = to_frame(S.riemann(x), E, "uddd")
    R_xi = Rf[:, 0, :, :]  # R_xi[l, a, b] = (R(e_a, e_b) xi)^l
    H = to_frame(S.h_prime(x), E, "ud") if S.alpha != 0 else np.zeros((S.dim, S.dim))
    return R_xi, H


def _fit(S: AcmStructure, samples, with_mu: bool, strict: bool) -> NullityFit:
    # In the frame, R(xi, e_b) xi = -kappa e_b - mu h'e_b for b >= 1, while
    # D-pairs (e_a, e_b) must give zero. The pairs (e_b, xi) repeat the first
    # family up to sign and add nothing to the fit.
    rows, targets, d_pairs, h_max = [], [], [], 0.0
    eye = None
    for p in samples:
        require_margin(p, 4.0, STEP_NESTED)
        R_xi, H = _frame_data(S, p.coords)
        eye = np.eye(S.dim)
        h_max = max(h_max, float(np.max(np.abs(H))))
        for b in range(1, S.dim):
            rows.append(np.column_stack([-eye[:, b], -H[:, b]]))
            targets.append(R_xi[:, 0, b])
        d_pairs.append(R_xi[:, 1:, 1:])
    M = np.concatenate(rows)
    y = np.concatenate(targets)
    h_vanishes = h_max < H_ZERO
    if not with_mu or h_vanishes:
        if with_mu and strict:
            raise DegenerateFit("h' vanishes: mu is undefined, fit kappa alone")
        coef, *_ = np.linalg.lstsq(M[:, :1], y, rcond=None)
        kappa, mu = float(coef[0]), None
        defect = M[:, :1] @ coef - y
    else:
        coef, *_ = np.linalg.lstsq(M, y, rcond=None)
        kappa, mu = float(coef[0]), float(coef[1])
        defect = M @ coef - y
    residual = max(float(np.max(np.abs(defect))), max(float(np.max(np.abs(d))) for d in d_pairs))
    thr = kmu_threshold(S)
    return NullityFit(kappa, mu, residual, residual < thr, thr, h_vanishes)


def fit_kmu(S: AcmStructure, samples, strict: bool = False) -> NullityFit:
    """Least-squares ``(kappa, mu)`` over frame pairs at every sample.

    When ``h'`` vanishes only ``kappa`` is fitted and ``mu`` is ``None``;
    with ``strict=True`` that case raises :class:`DegenerateFit` instead.
    """
    return _fit(S, samples, with_mu=True, strict=strict)


def fit_kappa_nullity(S: AcmStructure, samples) -> NullityFit:
    """Fit of ``R_{XY} xi = kappa (eta(Y) X - eta(X) Y)`` alone, as used for
    almost cosymplectic structures."""
    return _fit(S, samples, with_mu=False, strict=False)


@dataclass
class ClassInvariant:
    I: float
    dim: int
    spectrum: list
    lam: float
    consistency: float = 0.0

    def to_dict(self) -> dict:
        return {
            "I": self.I,
            "dim": self.dim,
            "spectrum": list(self.spectrum),
            "lambda": self.lam,
            "consistency": self.consistency,
        }


def lambda_from_kappa(kappa: float, alpha: float) -> float:
    """``sqrt(-1 - kappa / alpha^2)``, the positive eigenvalue of ``h'``."""
    if alpha == 0:
        raise KappaOutOfRange("alpha must be nonzero")
    v = -1.0 - kappa / alpha**2
    if v < -1e-12:
        raise KappaOutOfRange(f"kappa={kappa!r} exceeds -alpha^2={-alpha**2!r}")
    return math.sqrt(max(v, 0.0))


def invariant(S: AcmStructure, samples=None, fit: NullityFit | None = None) -> ClassInvariant:
    """``I = kappa / alpha^2`` of a (kappa, mu)' space with ``h' != 0``."""
    if samples is None:
        samples = S.chart.sample()
    fit = fit or fit_kmu(S, samples)
    if not fit.is_kmu or fit.h_vanishes or fit.mu is None:
        raise NotKmuSpace(
            f"not a (kappa, mu)' space with h' != 0 (residual {fit.residual:.3e})"
        )
    spectrum = sorted(float(v) for v in h_prime_spectrum(S, samples[0].coords))
    lam = max(spectrum)
    I_value = fit.kappa / S.alpha**2
    return ClassInvariant(I_value, S.dim, spectrum, lam, abs(I_value - (-1.0 - lam**2)))


def _curvature_formula(S: AcmStructure, kappa: float, x) -> np.ndarray:
    """Full curvature of a (kappa, -2 alpha^2)' space; the last term is taken
    antisymmetric in ``X, Y`` as a curvature tensor must be."""
    a2 = S.alpha**2
    g, xi, eta = S.g(x), S.xi(x), S.eta(x)
    H = S.h_prime(x)
    eye = np.eye(S.dim)
    B, C = eye + H, eye - H
    gB, gC = g @ B, g @ C  # gB[k, j] = g(B d_j, d_k)

    def wedge_xi(M):
        # M(Y, Z) eta(X) xi - M(X, Z) eta(Y) xi
        return np.einsum("kj,i,l->lkij", M, eta, xi) - np.einsum("ki,j,l->lkij", M, eta, xi)

    def eta_z(M):
        # eta(Z) (eta(Y) M X - eta(X) M Y)
        return np.einsum("k,j,li->lkij", eta, eta, M) - np.einsum("k,i,lj->lkij", eta, eta, M)

    out = kappa * (eta_z(eye) + wedge_xi(g))
    out += a2 * (wedge_xi(gC) + eta_z(C))
    out -= a2 * (np.einsum("kj,li->lkij", gB, B) - np.einsum("ki,lj->lkij", gB, B))
    return out


def _eigen_frame(S: AcmStructure, x):
    """Orthonormal frame vectors (coordinate components) diagonalizing ``h'``
    on ``D``, with eigenvalues ascending."""
    E = S.frame(x)
    H = to_frame(S.h_prime(x), E, "ud")[1:, 1:]
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    return w, E[:, 1:] @ V


def leaf_curvatures(S: AcmStructure, x) -> dict:
    """Sectional curvatures of planes in the eigendistributions of ``h'``."""
    riem, g, xi = S.riemann(x), S.g(x), S.xi(x)
    w, vecs = _eigen_frame(S, x)
    lo, hi = vecs[:, 0], vecs[:, -1]
    out = {
        "lambda": float(w[-1]),
        "K_xi_lambda": sectional_curvature_value(riem, g, xi, hi),
        "K_xi_minus_lambda": sectional_curvature_value(riem, g, xi, lo),
    }
    n = S.dim // 2
    if n >= 2:
        out["K_lambda_plane"] = sectional_curvature_value(riem, g, vecs[:, -1], vecs[:, -2])
        out["K_minus_lambda_plane"] = sectional_curvature_value(riem, g, vecs[:, 0], vecs[:, 1])
    return out


def verify_kmu_curvature_formula(
    S: AcmStructure, samples, tol: Tolerances = DEFAULT_TOLERANCES, fit: NullityFit | None = None
) -> CheckReport:
    """Compare ``riemann()`` with the closed-form curvature of a (kappa, mu)'
    space, check ``R~ = 0`` and the sectional curvatures of the leaves."""
    fit = fit or fit_kmu(S, samples)
    report = CheckReport("kmu_curvature")
    thr = CHECK_FACTOR * S.curv_tol(tol)
    report.add("kmu_fit", fit.residual, fit.threshold)
    if fit.h_vanishes or fit.mu is None:
        report.data["applicable"] = False
        report.add("h_prime_nonzero", math.inf, thr, note="h' vanishes")
        return report
    report.data["applicable"] = True
    a2 = S.alpha**2
    kappa = fit.kappa
    track = ResidualTracker()
    leaves = None
    for p in samples:
        require_margin(p, 4.0, STEP_NESTED)
        x = p.coords
        E = S.frame(x)
        diff = S.riemann(x) - _curvature_formula(S, kappa, x)
        track.update("formula", to_frame(diff, E, "uddd"))
        track.update("R_tilde", to_frame(canonical_curvature_direct(S, x), E, "uddd"))
        lc = leaf_curvatures(S, x)
        lam = lc["lambda"]
        track.update("K_xi_lambda", lc["K_xi_lambda"] - (kappa - 2 * a2 * lam))
        track.update("K_xi_minus_lambda", lc["K_xi_minus_lambda"] - (kappa + 2 * a2 * lam))
        if "K_lambda_plane" in lc:
            track.update("K_lambda_plane", lc["K_lambda_plane"] + a2 * (1 + lam) ** 2)
            track.update("K_minus_lambda_plane", lc["K_minus_lambda_plane"] + a2 * (1 - lam) ** 2)
        leaves = lc if leaves is None else leaves
    report.add("curvature_formula", track["formula"], thr)
    report.add("R_tilde_vanishes", track["R_tilde"], thr)
    report.add("K_xi_lambda", track["K_xi_lambda"], thr)
    report.add("K_xi_minus_lambda", track["K_xi_minus_lambda"], thr)
    if "K_lambda_plane" in track.values:
        report.add("K_lambda_plane", track["K_lambda_plane"], thr)
        report.add("K_minus_lambda_plane", track["K_minus_lambda_plane"], thr)
    report.data.update({"kappa": kappa, "mu": fit.mu, "leaf_curvatures": leaves})
    return report


# ---------------------------------------------------------------------------
# Classification up to D-homothetic deformation
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    reason: str
    beta: float | None = None
    spectra: tuple = ()
    invariants: tuple | None = None
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.equivalent:
            return "equivalent up to D-homothetic deformation"
        return "not equivalent"

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "verdict": self.verdict,
            "reason": self.reason,
            "beta": self.beta,
            "spectra": [list(s) for s in self.spectra],
            "invariants": list(self.invariants) if self.invariants is not None else None,
        }


def _spectrum(S: AcmStructure, samples) -> list:
    return sorted(float(v) for v in h_prime_spectrum(S, samples[0].coords))


def classify_pair(
    S1: AcmStructure,
    S2: AcmStructure,
    samples1=None,
    samples2=None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> EquivalenceVerdict:
    """Local equivalence up to D-homothetic deformation of two structures
    whose canonical connections have parallel torsion and vanishing curvature.

    The witness deformation constant is ``beta = alpha_1 / alpha_2``.
    """
    samples1 = samples1 if samples1 is not None else S1.chart.sample()
    samples2 = samples2 if samples2 is not None else S2.chart.sample()
    for label, S, smp in (("first", S1, samples1), ("second", S2, samples2)):
        rep = check_nabla_T_and_R(S, smp, tol)
        gates = ("canonical_connection_exists", "nabla_tilde_T", "R_tilde")
        failed = [g for g in gates if g in {c.name for c in rep.checks} and not rep[g].passed]
        if failed or not rep.data.get("applicable", False):
            raise PreconditionFailed(f"{label} structure fails {failed or ['parallelism']}")

    sp1, sp2 = _spectrum(S1, samples1), _spectrum(S2, samples2)
    details = {}
    invariants = None
    f1, f2 = fit_kmu(S1, samples1), fit_kmu(S2, samples2)
    if f1.is_kmu and f2.is_kmu and not (f1.h_vanishes or f2.h_vanishes):
        invariants = (f1.kappa / S1.alpha**2, f2.kappa / S2.alpha**2)
        details["invariants_equal"] = abs(invariants[0] - invariants[1]) < 1e-6 * max(
            1.0, abs(invariants[0])
        )

    beta = S1.alpha / S2.alpha
    if S1.dim != S2.dim:
        return EquivalenceVerdict(
            False, f"dimensions differ ({S1.dim} vs {S2.dim})", None, (sp1, sp2), invariants, details
        )
    gap = float(np.max(np.abs(np.subtract(sp1, sp2))))
    details["spectrum_gap"] = gap
    if gap >= SPECTRUM_MATCH:
        return EquivalenceVerdict(
            False, f"h' spectra differ (max gap {gap:.3e})", None, (sp1, sp2), invariants, details
        )
    return EquivalenceVerdict(
        True,
        f"equal dimension and h' spectra; deform the first with beta={beta:g}",
        beta,
        (sp1, sp2),
        invariants,
        details,
    )
