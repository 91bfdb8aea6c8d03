"""D-homothetic deformations and the D-conformal change to almost cosymplectic.

A deformation with constant ``beta > 0`` sends ``(phi, xi, eta, g)`` to

    (phi, xi / beta, beta eta, beta g + beta (beta - 1) eta (x) eta)

which is almost ``alpha / beta``-Kenmotsu. The deformed fields are built with
the field algebra of :mod:`tensor_core`, so analytic partials carry over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acm_structure import CHECK_FACTOR, AcmStructure, nabla_h_prime
from .reports import CheckReport, ResidualTracker
from .tensor_core import (
    DEFAULT_TOLERANCES,
    STEP_NESTED,
    Tolerances,
    TensorField,
    linear_combination,
    nabla,
    product,
    require_margin,
    to_frame,
)


class InvalidBeta(ValueError):
    pass


class NotKmuModel(ValueError):
    """The structure lacks the global ``t`` coordinate or is not a (k, mu)' model."""


@dataclass(frozen=True)
class DeformationParams:
    beta: float

    def __post_init__(self):
        _check_beta(self.beta)


def _check_beta(beta) -> float:
    try:
        b = float(beta)
    except (TypeError, ValueError) as exc:
        raise InvalidBeta(f"beta must be a real number, got {beta!r}") from exc
    if not np.isfinite(b) or b <= 0:
        raise InvalidBeta(f"beta must be a positive real, got {beta!r}")
    return b


def _beta_of(d) -> float:
    return d.beta if isinstance(d, DeformationParams) else _check_beta(d)


def deform(S: AcmStructure, d) -> AcmStructure:
    """Apply the D-homothetic deformation with constant ``d`` (a
    :class:`DeformationParams` or a positive number)."""
    beta = _beta_of(d)
    eta_eta = product("i,j->ij", S.eta, S.eta, name="eta(x)eta")
    g_bar = linear_combination([(beta, S.g), (beta * (beta - 1.0), eta_eta)], name="g")
    time = linear_combination([(beta, S.time)], name="t") if S.time is not None else None
    return AcmStructure(
        chart=S.chart,
        phi=S.phi,
        xi=linear_combination([(1.0 / beta, S.xi)], name="xi"),
        eta=linear_combination([(beta, S.eta)], name="eta"),
        g=g_bar,
        alpha=S.alpha / beta,
        name=f"{S.name} deformed(beta={beta:g})",
        notes=S.notes + (f"D-homothetic deformation with beta={beta!r}",),
        model=None,
        time=time,
    )


def transform_kmu(kappa: float, mu: float, beta: float) -> tuple:
    """``(kappa / beta^2, mu / beta^2)``."""
    b = _check_beta(beta)
    return kappa / b**2, mu / b**2


# ---------------------------------------------------------------------------
# Transformation laws
# ---------------------------------------------------------------------------


def lc_relation_residuals(S: AcmStructure, Sb: AcmStructure, beta: float, x) -> dict:
    a = S.alpha
    c = a * (beta - 1.0) / beta
    g, xi, eta = S.g(x), S.xi(x), S.eta(x)
    H = S.h_prime(x)
    B = np.eye(S.dim) + H
    gB = g @ B  # gB[j, i] = g(B d_i, d_j)
    G, Gb = S.gamma(x), Sb.gamma(x)
    E = S.frame(x)

    predicted = c * np.einsum("ji,k->kij", gB - np.outer(eta, eta), xi)
    conn = Gb - G - predicted

    phi, dphi = S.phi(x), S.phi.d(x)
    d_phi = nabla(phi, dphi, Gb, "ud") - nabla(phi, dphi, G, "ud")
    d_phi -= c * np.einsum("mb,a->mab", B.T @ g @ phi, xi)

    dH = S.h_prime.d(x)
    d_h = nabla(H, dH, Gb, "ud") - nabla(H, dH, G, "ud")
    d_h -= c * np.einsum("mb,a->mab", B.T @ g @ H, xi)

    h_bar = Sb.h_prime(x) - H
    return {
        "connection": to_frame(conn, E, "udd"),
        "nabla_phi": to_frame(d_phi, E, "dud"),
        "nabla_h": to_frame(d_h, E, "dud"),
        "h_invariance": to_frame(h_bar, E, "ud"),
    }


def verify_lc_relation(
    S: AcmStructure, beta, samples, tol: Tolerances = DEFAULT_TOLERANCES
) -> CheckReport:
    """Levi-Civita connections of ``g`` and the deformed metric, and the
    induced laws for ``nabla phi`` and ``nabla h'``."""
    beta = _beta_of(beta)
    Sb = deform(S, beta)
    track = ResidualTracker()
    for p in samples:
        require_margin(p, 2.0)
        for k, v in lc_relation_residuals(S, Sb, beta, p.coords).items():
            track.update(k, v)
    thr = CHECK_FACTOR * S.curv_tol(tol)
    report = CheckReport("lc_relation", data={"beta": beta})
    report.add("connection_difference", track["connection"], thr)
    report.add("nabla_phi_law", track["nabla_phi"], thr)
    report.add("nabla_h_law", track["nabla_h"], thr)
    report.add("h_prime_invariance", track["h_invariance"], thr)
    return report


def curvature_relation_predicted(S: AcmStructure, beta: float, x) -> np.ndarray:
    """The difference ``R_bar - R`` predicted from ``h'`` and ``nabla h'``."""
    a = S.alpha
    c = a * (beta - 1.0) / beta
    g, xi, eta = S.g(x), S.xi(x), S.eta(x)
    B = np.eye(S.dim) + S.h_prime(x)
    Q = g @ B - np.outer(eta, eta)  # Q[k, j] = g(B d_j, d_k) - eta_j eta_k
    Dh = nabla_h_prime(S, x)
    A = np.einsum("iaj->aij", Dh) - np.einsum("jai->aij", Dh)
    out = c * np.einsum("ka,aij,l->lkij", g, A, xi)
    out += c * a * (np.einsum("kj,li->lkij", Q, B) - np.einsum("ki,lj->lkij", Q, B))
    return out


def verify_curvature_relation(
    S: AcmStructure, beta, samples, tol: Tolerances = DEFAULT_TOLERANCES
) -> CheckReport:
    beta = _beta_of(beta)
    Sb = deform(S, beta)
    track = ResidualTracker()
    for p in samples:
        require_margin(p, 4.0, STEP_NESTED)
        x = p.coords
        E = S.frame(x)
        diff = Sb.riemann(x) - S.riemann(x)
        track.update(
            "curvature", to_frame(diff - curvature_relation_predicted(S, beta, x), E, "uddd")
        )
        track.update("R_xi", to_frame(np.einsum("lkij,k->lij", diff, S.xi(x)), E, "udd"))
    thr = CHECK_FACTOR * S.curv_tol(tol)
    report = CheckReport("curvature_relation", data={"beta": beta})
    report.add("curvature_difference", track["curvature"], thr)
    report.add("R_XY_xi_invariance", track["R_xi"], thr)
    return report


# ---------------------------------------------------------------------------
# D-conformal change
# ---------------------------------------------------------------------------


def _exp_field(s: TensorField, rate: float, name: str = "") -> TensorField:
    """``exp(rate * s)`` for a scalar field ``s``."""

    def fn(x):
        return np.exp(rate * s(x))

    def grad(x):
        return rate * fn(x) * s.d(x)

    def hess(x):
        ds = s.d(x)
        return fn(x) * (rate**2 * np.outer(ds, ds) + rate * s.dd(x))

    analytic = s.has_analytic_grad
    return TensorField(fn, grad if analytic else None, hess if analytic else None, name=name)


def d_conformal_change(S: AcmStructure) -> AcmStructure:
    """``g' = exp(-2 a t) g + (1 - exp(-2 a t)) eta (x) eta`` on a (k, mu)'
    model with its global coordinate ``t`` (``eta = dt``).

    The result is almost cosymplectic and is returned with ``alpha = 0``.
    """
    if S.time is None:
        raise NotKmuModel(f"{S.name or 'structure'} has no global t coordinate")
    if S.model is not None and not getattr(S.model, "is_kmu", False):
        raise NotKmuModel(f"{S.name} is not a (kappa, mu)' model")
    x0 = S.chart.origin().coords
    if np.max(np.abs(S.time.d(x0) - S.eta(x0))) > 1e-9:
        raise NotKmuModel("eta is not the differential of the t coordinate")
    e = _exp_field(S.time, -2.0 * S.alpha, name="exp(-2 a t)")
    eta_eta = product("i,j->ij", S.eta, S.eta)
    g_prime = linear_combination(
        [
            (1.0, product(",ij->ij", e, S.g)),
            (1.0, eta_eta),
            (-1.0, product(",ij->ij", e, eta_eta)),
        ],
        name="g_prime",
    )
    return AcmStructure(
        chart=S.chart,
        phi=S.phi,
        xi=S.xi,
        eta=S.eta,
        g=g_prime,
        alpha=0.0,
        name=f"{S.name} D-conformal",
        notes=S.notes + (f"D-conformal change with alpha={S.alpha!r}",),
        model=None,
        time=S.time,
    )
