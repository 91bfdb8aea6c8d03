"""Almost contact metric structures and the almost alpha-Kenmotsu identities.

An :class:`AcmStructure` bundles the component fields ``(phi, xi, eta, g)``
with the constant ``alpha``. Derived fields (Levi-Civita coefficients,
curvature, ``h'``, the fundamental form, the canonical connection) are built
lazily with analytic partials whenever the components provide them.

All residuals are measured in a ``g``-orthonormal frame with ``xi`` first,
so that the numbers are comparable across points where coordinate
components grow exponentially.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .reports import CheckReport, ResidualTracker
from .tensor_core import (
    DEFAULT_TOLERANCES,
    ChartPoint,
    ChartSpec,
    TensorField,
    Tolerances,
    constant_field,
    curvature_field,
    christoffel_field,
    exterior_derivative_field,
    exterior_derivative_value,
    lie_derivative_endo_field,
    linear_combination,
    max_abs,
    nabla,
    orthonormal_frame,
    product,
    require_margin,
    sectional_curvature_value,
    to_frame,
    transpose,
    wedge_1_2,
)

EIGEN_GAP = 1e-6
CHECK_FACTOR = 100.0


class StructureError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class AcmStructure:
    chart: ChartSpec
    phi: TensorField
    xi: TensorField
    eta: TensorField
    g: TensorField
    alpha: float
    name: str = ""
    notes: tuple = ()
    # catalog metadata: model parameters and the function t with eta = dt
    model: object = None
    time: TensorField | None = None

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def analytic(self) -> bool:
        return all(f.has_analytic_grad for f in (self.phi, self.xi, self.eta, self.g))

    def curv_tol(self, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        return tol.curv if self.analytic else tol.curv_numeric

    def frame(self, x) -> np.ndarray:
        return orthonormal_frame(self.g(x), first=self.xi(x))

    @cached_property
    def identity(self) -> TensorField:
        return constant_field(np.eye(self.dim), self.dim, name="identity")

    @cached_property
    def gamma(self) -> TensorField:
        return christoffel_field(self.g)

    @cached_property
    def riemann(self) -> TensorField:
        return curvature_field(self.gamma, name="riemann")

    @cached_property
    def fundamental_form(self) -> TensorField:
        """``Phi_{ij} = g(d_i, phi d_j)``."""
        return product("im,mj->ij", self.g, self.phi, name="Phi")

    @cached_property
    def lie_xi_phi(self) -> TensorField:
        return lie_derivative_endo_field(self.xi, self.phi)

    @cached_property
    def h_prime(self) -> TensorField:
        if self.alpha == 0:
            raise StructureError("h' is undefined for alpha = 0")
        composed = product("ik,kj->ij", self.lie_xi_phi, self.phi)
        return linear_combination([(0.5 / self.alpha, composed)], name="h_prime")

    @cached_property
    def one_plus_h(self) -> TensorField:
        return linear_combination([(1.0, self.identity), (1.0, self.h_prime)], name="I+h'")

    @cached_property
    def canonical_gamma(self) -> TensorField:
        """``Gamma~ = Gamma + alpha g(X+h'X, Y) xi - alpha eta(Y) (X+h'X)``."""
        B = self.one_plus_h
        gB = product("jl,li->ji", self.g, B)
        up = product("ji,k->kij", gB, self.xi)
        down = product("j,ki->kij", self.eta, B)
        a = self.alpha
        return linear_combination(
            [(1.0, self.gamma), (a, up), (-a, down)], name="canonical_gamma"
        )

    @cached_property
    def torsion(self) -> TensorField:
        """``T~(X, Y) = (nabla~_X Y - nabla~_Y X - [X, Y]) / 2``."""
        G = self.canonical_gamma
        return linear_combination(
            [(0.5, G), (-0.5, transpose(G, (0, 2, 1)))], name="torsion"
        )

    @cached_property
    def canonical_riemann(self) -> TensorField:
        return curvature_field(self.canonical_gamma, name="canonical_riemann")

    def with_alpha_sign_normalized(self) -> "AcmStructure":
        """Replace an alpha < 0 structure by ``(phi, -xi, -eta, g)`` with ``-alpha``."""
        if self.alpha >= 0:
            return self
        flip = lambda f: linear_combination([(-1.0, f)])
        time = flip(self.time) if self.time is not None else None
        return AcmStructure(
            chart=self.chart,
            phi=self.phi,
            xi=flip(self.xi),
            eta=flip(self.eta),
            g=self.g,
            alpha=-self.alpha,
            name=self.name,
            notes=self.notes
            + (
                f"alpha={self.alpha!r} < 0 normalized to (phi, -xi, -eta, g) "
                f"with alpha={-self.alpha!r}",
            ),
            model=self.model,
            time=time,
        )


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------


def axiom_residuals(S: AcmStructure, x) -> dict:
    phi, xi, eta, g = S.phi(x), S.xi(x), S.eta(x), S.g(x)
    E = S.frame(x)
    eye = np.eye(S.dim)
    return {
        "phi_squared": to_frame(phi @ phi + eye - np.outer(xi, eta), E, "ud"),
        "eta_xi": eta @ xi - 1.0,
        "phi_xi": to_frame(phi @ xi, E, "u"),
        "eta_phi": to_frame(eta @ phi, E, "d"),
        "compatibility": to_frame(phi.T @ g @ phi - g + np.outer(eta, eta), E, "dd"),
        "metric_symmetry": to_frame(g - g.T, E, "dd"),
    }


def validate(S: AcmStructure, samples, tol: Tolerances = DEFAULT_TOLERANCES) -> CheckReport:
    """Axiom residuals over ``samples``; never raises on failing axioms."""
    track = ResidualTracker()
    min_eig = np.inf
    for p in samples:
        x = p.coords
        gx = S.g(x)
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(0.5 * (gx + gx.T)))))
        try:
            res = axiom_residuals(S, x)
        except Exception:
            res = {k: np.inf for k in AXIOMS}
        for k, v in res.items():
            track.update(k, v)
    report = CheckReport("validate", data={"samples": len(samples), "min_metric_eigenvalue": min_eig})
    for name in AXIOMS:
        report.add(name, track[name], tol.struct)
    report.add("metric_positive", 0.0 if min_eig > 0 else np.inf, 1.0)
    if S.notes:
        report.data["notes"] = list(S.notes)
    return report


AXIOMS = ("phi_squared", "eta_xi", "phi_xi", "eta_phi", "compatibility", "metric_symmetry")


def fundamental_form(S: AcmStructure, p: ChartPoint) -> np.ndarray:
    return S.fundamental_form(p.coords)


# ---------------------------------------------------------------------------
# Almost alpha-Kenmotsu condition
# ---------------------------------------------------------------------------


def check_alpha_kenmotsu(
    S: AcmStructure, samples, tol: Tolerances = DEFAULT_TOLERANCES
) -> CheckReport:
    """Residuals of ``d eta = 0`` and ``d Phi = 2 alpha eta ^ Phi`` plus a
    least-squares estimate of alpha from the second identity."""
    track = ResidualTracker()
    num = den = 0.0
    Phi = S.fundamental_form
    for p in samples:
        require_margin(p, 2.0)
        x = p.coords
        E = S.frame(x)
        d_eta = to_frame(exterior_derivative_value(S.eta(x), S.eta.d(x)), E, "dd")
        d_phi = to_frame(exterior_derivative_value(Phi(x), Phi.d(x)), E, "ddd")
        w = to_frame(2.0 * wedge_1_2(S.eta(x), Phi(x)), E, "ddd")
        num += float(np.sum(d_phi * w))
        den += float(np.sum(w * w))
        track.update("d_eta", d_eta)
        track.update("d_Phi", d_phi - S.alpha * w)
        track.update("d_Phi_raw", d_phi)
    alpha_fit = num / den if den > 0 else 0.0
    if abs(alpha_fit) < tol.deriv and track["d_Phi_raw"] < tol.deriv:
        kind = "almost cosymplectic"
    else:
        kind = "almost alpha-Kenmotsu"
    report = CheckReport(
        "alpha_kenmotsu",
        data={"alpha": S.alpha, "alpha_fit": alpha_fit, "kind": kind},
    )
    report.add("d_eta", track["d_eta"], tol.deriv)
    report.add("d_Phi_minus_2alpha_eta_wedge_Phi", track["d_Phi"], tol.deriv)
    report.data["d_Phi_max"] = track["d_Phi_raw"]
    return report


def closedness_residuals(S: AcmStructure, samples) -> dict:
    """``max |d(d eta)|`` and ``max |d(d Phi)|`` over the samples."""
    dd_eta = exterior_derivative_field(exterior_derivative_field(S.eta))
    d_phi = exterior_derivative_field(S.fundamental_form)
    track = ResidualTracker()
    for p in samples:
        require_margin(p, 4.0)
        x = p.coords
        E = S.frame(x)
        track.update("dd_eta", to_frame(dd_eta(x), E, "ddd"))
        ddphi = d_phi.d(x)
        # d of a 3-form: alternating sum over the four slots
        dd = (
            ddphi
            - np.transpose(ddphi, (1, 0, 2, 3))
            + np.transpose(ddphi, (1, 2, 0, 3))
            - np.transpose(ddphi, (1, 2, 3, 0))
        )
        track.update("dd_Phi", to_frame(dd, E, "dddd"))
    return dict(track.values)


# ---------------------------------------------------------------------------
# h'
# ---------------------------------------------------------------------------


@dataclass
class HPrimeReport:
    point: ChartPoint
    matrix: np.ndarray
    frame_matrix: np.ndarray
    eigenvalues: list
    multiplicities: list
    distinct: list
    spectrum_constant: bool
    spectrum_symmetric: bool
    residuals: dict = field(default_factory=dict)
    spectrum_spread: float = 0.0

    def to_dict(self) -> dict:
        return {
            "point": self.point.coords.tolist(),
            "eigenvalues": list(self.eigenvalues),
            "distinct": list(self.distinct),
            "multiplicities": list(self.multiplicities),
            "spectrum_constant": self.spectrum_constant,
            "spectrum_symmetric": self.spectrum_symmetric,
            "spectrum_spread": self.spectrum_spread,
            "residuals": dict(self.residuals),
        }


def group_eigenvalues(values, gap: float = EIGEN_GAP):
    """Group sorted eigenvalues separated by less than ``gap``."""
    values = sorted(float(v) for v in values)
    groups: list = []
    for v in values:
        if groups and v - groups[-1][-1] < gap:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [float(np.mean(g)) for g in groups], [len(g) for g in groups]


def h_prime_spectrum(S: AcmStructure, x) -> np.ndarray:
    E = S.frame(x)
    H = to_frame(S.h_prime(x), E, "ud")
    return np.linalg.eigvalsh(0.5 * (H + H.T))


def h_prime(S: AcmStructure, p: ChartPoint, samples=None) -> HPrimeReport:
    """``h' = (1/2 alpha) (L_xi phi) o phi`` at ``p`` with its spectrum.

    With ``samples``, ``spectrum_constant`` compares the sorted spectrum at
    every sample with the one at ``p``.
    """
    require_margin(p, 2.0)
    x = p.coords
    H = S.h_prime(x)
    E = S.frame(x)
    Hf = to_frame(H, E, "ud")
    eig = np.linalg.eigvalsh(0.5 * (Hf + Hf.T))
    distinct, mult = group_eigenvalues(eig)
    spread = 0.0
    for q in samples or ():
        spread = max(spread, max_abs(h_prime_spectrum(S, q.coords) - eig))
    symmetric = max_abs(np.sort(eig) + np.sort(eig)[::-1]) < 1e-8
    phi = to_frame(S.phi(x), E, "ud")
    residuals = {
        "h_xi": max_abs(Hf[:, 0]),
        "g_symmetry": max_abs(Hf - Hf.T),
        "phi_anticommute": max_abs(Hf @ phi + phi @ Hf),
    }
    return HPrimeReport(
        point=p,
        matrix=H,
        frame_matrix=Hf,
        eigenvalues=[float(v) for v in eig],
        multiplicities=mult,
        distinct=distinct,
        spectrum_constant=spread < 1e-7,
        spectrum_symmetric=bool(symmetric),
        residuals=residuals,
        spectrum_spread=spread,
    )


# ---------------------------------------------------------------------------
# Nijenhuis tensor and CR-integrability
# ---------------------------------------------------------------------------


@dataclass
class NijenhuisValue:
    full: np.ndarray  # N[k, i, j] = N(d_i, d_j)^k
    frame: np.ndarray  # orthonormal-frame components, index 0 = xi
    on_d: np.ndarray  # frame components restricted to D x D

    def __call__(self, X, Y) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.full, X, Y)


def nijenhuis_components(S: AcmStructure, x) -> np.ndarray:
    """``N = [phi, phi] + 2 d eta (x) xi`` in coordinates.

    ``d eta`` uses the normalization ``d eta(X, Y) = (X eta(Y) - Y eta(X) -
    eta([X, Y])) / 2`` so that ``2 d eta`` is the plain antisymmetrized
    derivative.
    """
    phi, dphi = S.phi(x), S.phi.d(x)
    N = (
        np.einsum("mi,mkj->kij", phi, dphi)
        - np.einsum("mj,mki->kij", phi, dphi)
        + np.einsum("km,jmi->kij", phi, dphi)
        - np.einsum("km,imj->kij", phi, dphi)
    )
    d_eta = exterior_derivative_value(S.eta(x), S.eta.d(x))
    return N + np.einsum("ij,k->kij", d_eta, S.xi(x))


def nijenhuis(S: AcmStructure, p: ChartPoint) -> NijenhuisValue:
    require_margin(p, 2.0)
    x = p.coords
    N = nijenhuis_components(S, x)
    Nf = to_frame(N, S.frame(x), "udd")
    return NijenhuisValue(full=N, frame=Nf, on_d=Nf[:, 1:, 1:])


def nabla_phi_predicted(S: AcmStructure, x) -> np.ndarray:
    """Right-hand side of the CR-integrability formula for ``(nabla_m phi)^a_b``."""
    C = S.phi(x) @ S.one_plus_h(x)
    gC = S.g(x) @ C  # gC[b, m] = g(d_b, C d_m)
    a = S.alpha
    return a * np.einsum("bm,a->mab", gC, S.xi(x)) - a * np.einsum("b,am->mab", S.eta(x), C)


def check_cr_integrable(
    S: AcmStructure, samples, tol: Tolerances = DEFAULT_TOLERANCES
) -> CheckReport:
    """Two independent CR-integrability residuals: ``N`` on ``D`` and the
    covariant-derivative characterization of ``nabla phi``."""
    track = ResidualTracker()
    for p in samples:
        require_margin(p, 2.0)
        x = p.coords
        E = S.frame(x)
        Nf = to_frame(nijenhuis_components(S, x), E, "udd")
        track.update("N_on_D", Nf[:, 1:, 1:])
        track.update("N_full", Nf)
        dphi = nabla(S.phi(x), S.phi.d(x), S.gamma(x), "ud")
        track.update("nabla_phi", to_frame(dphi - nabla_phi_predicted(S, x), E, "dud"))
    thr = CHECK_FACTOR * S.curv_tol(tol)
    report = CheckReport("cr_integrable")
    report.add("nijenhuis_on_D", track["N_on_D"], thr)
    report.add("nabla_phi_formula", track["nabla_phi"], thr)
    report.data["nijenhuis_max"] = track["N_full"]
    report.data["normal"] = bool(track["N_full"] < thr)
    return report


# ---------------------------------------------------------------------------
# eta-parallel h' and Levi-Civita identities
# ---------------------------------------------------------------------------


def nabla_h_prime(S: AcmStructure, x) -> np.ndarray:
    """``(nabla_m h')^a_b``."""
    return nabla(S.h_prime(x), S.h_prime.d(x), S.gamma(x), "ud")


def check_eta_parallel_h(
    S: AcmStructure, samples, tol: Tolerances = DEFAULT_TOLERANCES
) -> CheckReport:
    track = ResidualTracker()
    for p in samples:
        require_margin(p, 2.0)
        x = p.coords
        Dh = to_frame(nabla_h_prime(S, x), S.frame(x), "dud")
        track.update("eta_parallel", Dh[1:, 1:, 1:])
        track.update("nabla_xi_h", Dh[0])
    thr = CHECK_FACTOR * S.curv_tol(tol)
    report = CheckReport("eta_parallel_h")
    report.add("eta_parallel", track["eta_parallel"], thr)
    report.add("nabla_xi_h", track["nabla_xi_h"], thr)
    return report


def levi_civita_identity_residuals(S: AcmStructure, x) -> dict:
    """Pointwise residuals of the basic Levi-Civita identities, frame components."""
    E = S.frame(x)
    a = S.alpha
    g, xi, eta = S.g(x), S.xi(x), S.eta(x)
    H = S.h_prime(x)
    B = np.eye(S.dim) + H
    gamma = S.gamma(x)
    out = {}

    nabla_xi = nabla(xi, S.xi.d(x), gamma, "u")  # [m, a]
    pred = a * (B.T - np.outer(eta, xi))
    out["nabla_X_xi"] = to_frame(nabla_xi - pred, E, "du")

    nabla_eta = nabla(eta, S.eta.d(x), gamma, "d")  # [m, b]
    pred = a * (g @ B).T - a * np.outer(eta, eta)
    out["nabla_eta"] = to_frame(nabla_eta - pred, E, "dd")

    out["nabla_xi_xi"] = to_frame(xi @ nabla_xi, E, "u")

    R = S.riemann(x)
    Dh = nabla(H, S.h_prime.d(x), gamma, "ud")
    # R_{XY} xi = a^2 (eta(X)(Y+h'Y) - eta(Y)(X+h'X)) + a ((nabla_X h')Y - (nabla_Y h')X)
    Rxi = np.einsum("lkij,k->lij", R, xi)
    pred = a * a * (np.einsum("i,lj->lij", eta, B) - np.einsum("j,li->lij", eta, B))
    pred += a * (np.einsum("ilj->lij", Dh) - np.einsum("jli->lij", Dh))
    out["R_XY_xi"] = to_frame(Rxi - pred, E, "udd")

    # R_{xi X} xi = a^2 (-phi^2 X + 2 h'X + h'^2 X) + a (nabla_xi h') X
    phi = S.phi(x)
    M = np.einsum("lkij,k,i->lj", R, xi, xi)
    pred = a * a * (-phi @ phi + 2 * H + H @ H) + a * np.einsum("m,mlj->lj", xi, Dh)
    out["R_xiX_xi"] = to_frame(M - pred, E, "ud")
    return out


def xi_sectional_residual(S: AcmStructure, x) -> float:
    """``max |K(xi, X) + alpha^2 (1 + lam)^2|`` over unit eigenvectors of ``h'``."""
    E = S.frame(x)
    Hf = to_frame(S.h_prime(x), E, "ud")
    Hd = 0.5 * (Hf[1:, 1:] + Hf[1:, 1:].T)
    lam, vecs = np.linalg.eigh(Hd)
    R, gx = S.riemann(x), S.g(x)
    xi = S.xi(x)
    worst = 0.0
    for k in range(lam.size):
        v = E[:, 1:] @ vecs[:, k]
        K = sectional_curvature_value(R, gx, xi, v)
        worst = max(worst, abs(K + S.alpha**2 * (1 + lam[k]) ** 2))
    return worst


def check_levi_civita_identities(
    S: AcmStructure, samples, tol: Tolerances = DEFAULT_TOLERANCES
) -> CheckReport:
    track = ResidualTracker()
    for p in samples:
        require_margin(p, 4.0)
        for k, v in levi_civita_identity_residuals(S, p.coords).items():
            track.update(k, v)
        track.update("xi_sectional", xi_sectional_residual(S, p.coords))
    report = CheckReport("levi_civita_identities")
    thr = CHECK_FACTOR * S.curv_tol(tol)
    report.add("nabla_X_xi", track["nabla_X_xi"], tol.deriv)
    report.add("nabla_eta", track["nabla_eta"], tol.deriv)
    report.add("nabla_xi_xi", track["nabla_xi_xi"], S.curv_tol(tol))
    report.add("R_XY_xi", track["R_XY_xi"], thr)
    report.add("R_xiX_xi", track["R_xiX_xi"], thr)
    report.add("xi_sectional_curvature", track["xi_sectional"], thr)
    return report
