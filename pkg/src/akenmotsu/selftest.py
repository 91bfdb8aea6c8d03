"""The acceptance grid: every catalog model, checked against fixed thresholds.

Each criterion produces :class:`Row` records keyed by a short label naming
the identity it exercises. ``run_selftest`` evaluates all of them; the
acceptance test suite evaluates them one criterion at a time on a shared
:class:`Grid` so that per-model work is done once.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .acm_structure import (
    check_alpha_kenmotsu,
    h_prime,
    h_prime_spectrum,
    levi_civita_identity_residuals,
    validate,
    xi_sectional_residual,
)
from .canonical_connection import (
    canonical_curvature_direct,
    canonical_curvature_formula,
    parallelism_residuals,
    torsion_axiom_residuals,
)
from .deformation import (
    d_conformal_change,
    deform,
    lc_relation_residuals,
    curvature_relation_predicted,
    transform_kmu,
)
from .model_catalog import LieGroupModelParams, build_model
from .nullity_analysis import (
    classify_pair,
    fit_kappa_nullity,
    fit_kmu,
    invariant,
    leaf_curvatures,
    verify_kmu_curvature_formula,
)
from .reports import Check, ResidualTracker
from .tensor_core import max_abs, nabla, to_frame

ALPHAS = (0.5, 1.0, 2.0)
LAMBDA_LISTS = {
    1: ((0.0,), (1.0,), (2.0,)),
    2: ((2.0, 2.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)),
    3: ((2.0, 2.0, 2.0), (1.0, 2.0, 3.0)),
}
BETAS = (0.5, 2.0, 3.0)

CRITERIA = {
    1: "structure-axioms",
    2: "def_alpha",
    3: "hprime-spectrum",
    4: "nablaxi-nablaeta",
    5: "xi-sectional",
    6: "tildenabla",
    7: "LC-curv_def",
    8: "kmu",
    9: "theo_class",
    10: "cor_symm",
    11: "d-conformal",
    12: "alpha-sign",
}


def grid_params() -> list:
    return [
        LieGroupModelParams(n, a, lam)
        for n, lists in LAMBDA_LISTS.items()
        for lam in lists
        for a in ALPHAS
    ]


@dataclass
class Row:
    criterion: int
    label: str
    model: str
    check: Check

    @property
    def passed(self) -> bool:
        return self.check.passed

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "label": self.label, "model": self.model,
                **self.check.to_dict()}


def _uniform_lambda(params) -> float | None:
    lam = set(params.lambdas)
    return lam.pop() if len(lam) == 1 else None


class ModelCase:
    """One grid model with lazily computed shared quantities."""

    def __init__(self, params: LieGroupModelParams, samples: int, seed: int):
        self.params = params
        self.S = build_model(params)
        self.samples = self.S.chart.sample(samples, seed)
        self.key = f"n={params.n} a={params.alpha:g} l={list(params.lambdas)}"

    @cached_property
    def fit(self):
        return fit_kmu(self.S, self.samples)

    def deformed(self, beta: float):
        cache = self.__dict__.setdefault("_deformed", {})
        if beta not in cache:
            cache[beta] = deform(self.S, beta)
        return cache[beta]


@dataclass
class Grid:
    samples: int = 20
    seed: int = 42
    scale: float = 1.0
    params: list = field(default_factory=grid_params)

    @cached_property
    def cases(self) -> list:
        return [ModelCase(p, self.samples, self.seed) for p in self.params]

    def thr(self, value: float) -> float:
        return value * self.scale


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def _row(k, case_key, name, residual, threshold, above=False):
    return Row(k, CRITERIA[k], case_key, Check(name, float(residual), float(threshold), "", above))


def crit_axioms(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        rep = validate(c.S, c.samples)
        worst = max(ch.residual for ch in rep.checks if ch.name != "metric_positive")
        rows.append(_row(1, c.key, "axioms", worst, grid.thr(1e-12)))
        rows.append(_row(1, c.key, "metric_positive", rep.residual("metric_positive"), 1.0))
    return rows


def crit_def_alpha(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        rep = check_alpha_kenmotsu(c.S, c.samples)
        rows.append(_row(2, c.key, "d_eta", rep.residual("d_eta"), grid.thr(1e-6)))
        rows.append(_row(2, c.key, "d_Phi", rep.residual("d_Phi_minus_2alpha_eta_wedge_Phi"),
                         grid.thr(1e-6)))
        rows.append(_row(2, c.key, "alpha_fit", abs(rep.data["alpha_fit"] - c.params.alpha),
                         grid.thr(1e-6)))
    return rows


def crit_h_spectrum(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        predicted = np.array(c.params.predicted_spectrum)
        err = max(max_abs(np.sort(h_prime_spectrum(c.S, p.coords)) - predicted) for p in c.samples)
        rep = h_prime(c.S, c.samples[0], c.samples)
        rows.append(_row(3, c.key, "eigenvalues", err, grid.thr(1e-8)))
        rows.append(_row(3, c.key, "spectrum_constant", rep.spectrum_spread, grid.thr(1e-7)))
        track = ResidualTracker()
        for p in c.samples:
            for k, v in h_prime(c.S, p).residuals.items():
                track.update(k, v)
        for k in ("h_xi", "g_symmetry", "phi_anticommute"):
            rows.append(_row(3, c.key, k, track[k], grid.thr(1e-9)))
    return rows


def crit_connection(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        track = ResidualTracker()
        for p in c.samples:
            res = levi_civita_identity_residuals(c.S, p.coords)
            track.update("nabla_X_xi", res["nabla_X_xi"])
            track.update("nabla_eta", res["nabla_eta"])
        rows.append(_row(4, c.key, "nabla_X_xi", track["nabla_X_xi"], grid.thr(1e-6)))
        rows.append(_row(4, c.key, "nabla_eta", track["nabla_eta"], grid.thr(1e-6)))
    return rows


def crit_xi_sectional(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        S, a2 = c.S, c.params.alpha**2
        worst = max(xi_sectional_residual(S, p.coords) for p in c.samples)
        rows.append(_row(5, c.key, "K_xi_X", worst, grid.thr(1e-5)))
        lam = _uniform_lambda(c.params)
        if lam:
            kappa = c.params.predicted_kappa
            track = ResidualTracker()
            for p in c.samples:
                lc = leaf_curvatures(S, p.coords)
                track.update("plus", lc["K_xi_lambda"] - (kappa - 2 * a2 * lam))
                track.update("minus", lc["K_xi_minus_lambda"] - (kappa + 2 * a2 * lam))
            rows.append(_row(5, c.key, "K_leaf_xi_lambda", track["plus"], grid.thr(1e-5)))
            rows.append(_row(5, c.key, "K_leaf_xi_minus_lambda", track["minus"], grid.thr(1e-5)))
    return rows


def crit_canonical(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        S = c.S
        track = ResidualTracker()
        for p in c.samples:
            x = p.coords
            E = S.frame(x)
            for k, v in parallelism_residuals(S, x).items():
                track.update("nabla_tilde_" + k, v)
            for k, v in torsion_axiom_residuals(S, x).items():
                track.update("torsion_" + k, v)
            direct = canonical_curvature_direct(S, x)
            track.update("R_tilde", to_frame(direct, E, "uddd"))
            track.update("oracle", to_frame(direct - canonical_curvature_formula(S, x), E, "uddd"))
            T = S.torsion
            nT = nabla(T(x), T.d(x), S.canonical_gamma(x), "udd")
            track.update("nabla_tilde_T", to_frame(nT, E, "dudd"))
        for k in ("g", "phi", "eta"):
            rows.append(_row(6, c.key, "nabla_tilde_" + k, track["nabla_tilde_" + k], grid.thr(1e-5)))
        for k in ("a", "b", "c"):
            rows.append(_row(6, c.key, "torsion_axiom_" + k, track["torsion_" + k], grid.thr(1e-5)))
        rows.append(_row(6, c.key, "R_tilde", track["R_tilde"], grid.thr(1e-4)))
        rows.append(_row(6, c.key, "nabla_tilde_T", track["nabla_tilde_T"], grid.thr(1e-4)))
        rows.append(_row(6, c.key, "R_tilde_oracles", track["oracle"], grid.thr(1e-5)))
    return rows


def crit_deformation(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        S = c.S
        for beta in BETAS:
            Sb = c.deformed(beta)
            track = ResidualTracker()
            for p in c.samples:
                x = p.coords
                E = S.frame(x)
                track.update("LC", lc_relation_residuals(S, Sb, beta, x)["connection"])
                diff = Sb.riemann(x) - S.riemann(x)
                pred = curvature_relation_predicted(S, beta, x)
                track.update("curv_def", to_frame(diff - pred, E, "uddd"))
                track.update("R_xi", to_frame(np.einsum("lkij,k->lij", diff, S.xi(x)), E, "udd"))
                dG = Sb.canonical_gamma(x) - S.canonical_gamma(x)
                track.update("gamma_tilde", to_frame(dG, E, "udd"))
            tag = f"beta={beta:g}"
            rows.append(_row(7, c.key, f"LC {tag}", track["LC"], grid.thr(1e-5)))
            rows.append(_row(7, c.key, f"curv_def {tag}", track["curv_def"], grid.thr(1e-5)))
            rows.append(_row(7, c.key, f"R_XY_xi {tag}", track["R_xi"], grid.thr(1e-6)))
            rows.append(_row(7, c.key, f"gamma_tilde {tag}", track["gamma_tilde"], grid.thr(1e-6)))
            if _uniform_lambda(c.params):
                fb = fit_kmu(Sb, c.samples)
                kb, mb = transform_kmu(c.fit.kappa, c.fit.mu, beta)
                err = max(abs(fb.kappa - kb), abs(fb.mu - mb))
                rows.append(_row(7, c.key, f"kmu_bar {tag}", err, grid.thr(1e-4)))
    return rows


def crit_nullity(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        lam = _uniform_lambda(c.params)
        a2 = c.params.alpha**2
        f = c.fit
        if lam:
            rows.append(_row(8, c.key, "kappa", abs(f.kappa - c.params.predicted_kappa),
                             grid.thr(1e-4)))
            rows.append(_row(8, c.key, "mu", abs(f.mu + 2 * a2), grid.thr(1e-4)))
            rows.append(_row(8, c.key, "fit_residual", f.residual, grid.thr(1e-5)))
            rep = verify_kmu_curvature_formula(c.S, c.samples, fit=f)
            rows.append(_row(8, c.key, "Rkmu_alpha", rep.residual("curvature_formula"),
                             grid.thr(1e-4)))
        elif lam == 0.0:
            rows.append(_row(8, c.key, "kappa_h_zero", abs(f.kappa + a2), grid.thr(1e-4)))
        elif c.params.lambdas == (1.0, 2.0):
            rows.append(_row(8, c.key, "fit_residual_not_kmu", f.residual, 0.1, above=True))
    return rows


def crit_classification(grid: Grid) -> list:
    rows = []
    n_smp, seed = min(grid.samples, 8), grid.seed
    for lam in ((2.0,), (1.0,), (2.0, 2.0)):
        n = len(lam)
        S1 = build_model(LieGroupModelParams(n, 1.0, lam))
        S3 = deform(build_model(LieGroupModelParams(n, 3.0, lam)), 3.0)
        v = classify_pair(S1, S3, S1.chart.sample(n_smp, seed), S3.chart.sample(n_smp, seed))
        rows.append(_row(9, f"a=1 vs a=3 deformed l={list(lam)}", "equivalent",
                         0.0 if v.equivalent else 1.0, 0.5))
    pairs = (
        (LieGroupModelParams(2, 1.0, (1.0, 2.0)), LieGroupModelParams(2, 1.0, (2.0, 2.0))),
        (LieGroupModelParams(2, 1.0, (2.0, 2.0)), LieGroupModelParams(3, 1.0, (2.0, 2.0, 2.0))),
    )
    for p1, p2 in pairs:
        S1, S2 = build_model(p1), build_model(p2)
        v = classify_pair(S1, S2, S1.chart.sample(n_smp, seed), S2.chart.sample(n_smp, seed))
        rows.append(_row(9, f"{list(p1.lambdas)} vs {list(p2.lambdas)}", "distinguished",
                         1.0 if v.equivalent else 0.0, 0.5))
    for c in grid.cases:
        lam = _uniform_lambda(c.params)
        if not lam:
            continue
        inv = invariant(c.S, c.samples, c.fit)
        rows.append(_row(9, c.key, "I_formula", abs(inv.I - (-1.0 - lam**2)), grid.thr(1e-6)))
        worst = 0.0
        for beta in (0.5, 2.0, 5.0):
            Sb = c.deformed(beta)
            worst = max(worst, abs(invariant(Sb, c.samples).I - inv.I))
        rows.append(_row(9, c.key, "I_deform_invariance", worst, grid.thr(1e-8)))
    return rows


def crit_symmetry(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        lam = _uniform_lambda(c.params)
        if lam not in (0.0, 1.0, 2.0):
            continue
        S = c.S
        worst = 0.0
        for p in c.samples:
            x = p.coords
            nR = nabla(S.riemann(x), S.riemann.d(x), S.gamma(x), "uddd")
            worst = max(worst, max_abs(to_frame(nR, S.frame(x), "duddd")))
        if lam == 2.0:
            rows.append(_row(10, c.key, "nabla_R_nonzero", worst, 1e-3, above=True))
        else:
            rows.append(_row(10, c.key, "nabla_R", worst, grid.thr(1e-5)))
    return rows


def crit_d_conformal(grid: Grid) -> list:
    rows = []
    for c in grid.cases:
        if not _uniform_lambda(c.params):
            continue
        C = d_conformal_change(c.S)
        rep = check_alpha_kenmotsu(C, c.samples)
        rows.append(_row(11, c.key, "d_Phi_prime", rep.data["d_Phi_max"], grid.thr(1e-6)))
        f = fit_kappa_nullity(C, c.samples)
        kc = c.params.predicted_kappa + c.params.alpha**2
        rows.append(_row(11, c.key, "kappa_c", abs(f.kappa - kc), grid.thr(1e-4)))
        rows.append(_row(11, c.key, "kappa_c_fit_residual", f.residual, grid.thr(1e-5)))
    return rows


def crit_alpha_sign(grid: Grid) -> list:
    params = LieGroupModelParams(1, -1.0, (2.0,))
    S = build_model(params)
    samples = S.chart.sample(grid.samples, grid.seed)
    key = "n=1 a=-1 l=[2.0]"
    rep = validate(S, samples)
    ak = check_alpha_kenmotsu(S, samples)
    worst = max(ch.residual for ch in rep.checks if ch.name != "metric_positive")
    noted = any("normalized" in n for n in S.notes)
    return [
        _row(12, key, "axioms", worst, grid.thr(1e-12)),
        _row(12, key, "alpha_normalized", abs(S.alpha - 1.0), grid.thr(1e-12)),
        _row(12, key, "alpha_fit", abs(ak.data["alpha_fit"] - 1.0), grid.thr(1e-6)),
        _row(12, key, "d_Phi", ak.residual("d_Phi_minus_2alpha_eta_wedge_Phi"), grid.thr(1e-6)),
        _row(12, key, "sign_flip_noted", 0.0 if noted else 1.0, 0.5),
    ]


CRITERION_FUNCTIONS = {
    1: crit_axioms,
    2: crit_def_alpha,
    3: crit_h_spectrum,
    4: crit_connection,
    5: crit_xi_sectional,
    6: crit_canonical,
    7: crit_deformation,
    8: crit_nullity,
    9: crit_classification,
    10: crit_symmetry,
    11: crit_d_conformal,
    12: crit_alpha_sign,
}


@dataclass
class SelftestResult:
    rows: list
    seconds: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def matrix(self) -> dict:
        out = {}
        for k, label in CRITERIA.items():
            mine = [r for r in self.rows if r.criterion == k]
            out[k] = {
                "label": label,
                "rows": len(mine),
                "failed": sum(not r.passed for r in mine),
                "passed": all(r.passed for r in mine),
            }
        return out

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]


def run_criterion(k: int, grid: Grid) -> list:
    return CRITERION_FUNCTIONS[k](grid)


def run_selftest(samples: int = 20, seed: int = 42, scale: float = 1.0,
                 criteria=None) -> SelftestResult:
    grid = Grid(samples=samples, seed=seed, scale=scale)
    start = time.perf_counter()
    rows = []
    for k in criteria or CRITERIA:
        rows.extend(run_criterion(k, grid))
    return SelftestResult(rows, time.perf_counter() - start)
