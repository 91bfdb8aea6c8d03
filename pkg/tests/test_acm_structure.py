import numpy as np
import pytest

from akenmotsu.acm_structure import (
    AXIOMS,
    AcmStructure,
    check_alpha_kenmotsu,
    check_cr_integrable,
    check_eta_parallel_h,
    check_levi_civita_identities,
    closedness_residuals,
    fundamental_form,
    group_eigenvalues,
    h_prime,
    nijenhuis,
    validate,
)
from akenmotsu.deformation import d_conformal_change, deform
from akenmotsu.model_catalog import LieGroupModelParams, perturbed_model
from akenmotsu.tensor_core import constant_field, linear_combination, max_abs, product

from conftest import at_t, model


def _replace(S, **kw):
    fields = dict(
        chart=S.chart, phi=S.phi, xi=S.xi, eta=S.eta, g=S.g, alpha=S.alpha,
        name=S.name, notes=S.notes, model=S.model, time=S.time,
    )
    fields.update(kw)
    return AcmStructure(**fields)


def test_validate_catalog_models(lam2, mixed, samples):
    for S in (lam2, mixed):
        report = validate(S, samples(S))
        assert report.passed
        assert max(c.residual for c in report.checks) < 1e-12


def test_validate_flags_broken_phi_squared(lam2, samples):
    bad_phi = product("ij,jk->ik", lam2.phi, lam2.phi)
    bad = _replace(lam2, phi=linear_combination([(-1.0, bad_phi)]))
    report = validate(bad, samples(lam2))
    assert not report["phi_squared"].passed
    assert not report.passed


def test_validate_flags_incompatible_metric(lam2, samples):
    bad = _replace(lam2, g=constant_field(np.eye(3), 3))
    report = validate(bad, samples(lam2))
    assert not report["compatibility"].passed
    assert report["phi_xi"].passed


def test_validate_reports_every_axiom(lam0, samples):
    names = [c.name for c in validate(lam0, samples(lam0)).checks]
    assert set(AXIOMS) <= set(names)


def test_fundamental_form(lam1):
    p = at_t(lam1)
    Phi = fundamental_form(lam1, p)
    assert Phi[1, 2] == pytest.approx(-1.0)
    assert max_abs(Phi + Phi.T) == 0.0
    assert max_abs(Phi[0]) == 0.0


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_check_alpha_kenmotsu_fit(alpha, samples):
    S = model(1, alpha, [2.0])
    report = check_alpha_kenmotsu(S, samples(S))
    assert report.passed
    assert report.data["alpha_fit"] == pytest.approx(alpha, abs=1e-6)
    assert report.data["kind"] == "almost alpha-Kenmotsu"


def test_check_alpha_kenmotsu_deformed(samples):
    S = model(1, 2.0, [2.0])
    report = check_alpha_kenmotsu(deform(S, 2.0), samples(S))
    assert report.passed
    assert report.data["alpha_fit"] == pytest.approx(1.0, abs=1e-6)


def test_check_alpha_kenmotsu_cosymplectic(lam2, samples):
    report = check_alpha_kenmotsu(d_conformal_change(lam2), samples(lam2))
    assert report.data["d_Phi_max"] < 1e-6
    assert report.data["kind"] == "almost cosymplectic"


def test_closedness(mixed, samples):
    res = closedness_residuals(mixed, samples(mixed, 3))
    assert res["dd_eta"] < 1e-8 and res["dd_Phi"] < 1e-4


def test_h_prime_spectrum_mixed(mixed, samples):
    rep = h_prime(mixed, at_t(mixed, 0.3), samples(mixed))
    assert rep.eigenvalues == pytest.approx([-2, -1, 0, 1, 2], abs=1e-8)
    assert rep.multiplicities == [1] * 5
    assert rep.spectrum_constant and rep.spectrum_symmetric
    assert max(rep.residuals.values()) < 1e-9


def test_h_prime_kills_xi(lam2):
    p = at_t(lam2, -0.4)
    rep = h_prime(lam2, p)
    assert max_abs(rep.matrix @ lam2.xi(p.coords)) < 1e-12


def test_h_prime_zero_for_lambda_zero(lam0):
    assert max_abs(h_prime(lam0, at_t(lam0, 0.2)).matrix) < 1e-12


def test_h_prime_multiplicities(kmu22):
    rep = h_prime(kmu22, at_t(kmu22))
    assert rep.distinct == pytest.approx([-2, 0, 2])
    assert rep.multiplicities == [2, 1, 2]
    assert rep.to_dict()["multiplicities"] == [2, 1, 2]


def test_group_eigenvalues():
    distinct, mult = group_eigenvalues([1.0, 0.0, 1.0 + 1e-9, -1.0])
    assert distinct == pytest.approx([-1.0, 0.0, 1.0])
    assert mult == [1, 1, 2]


def test_nijenhuis_on_d_vanishes(lam2):
    N = nijenhuis(lam2, at_t(lam2, 0.1))
    assert max_abs(N.on_d) < 1e-6
    xi = lam2.xi(np.zeros(3))
    assert max_abs(N(xi, xi)) == 0.0


def test_nijenhuis_not_normal_when_h_nonzero(lam2):
    N = nijenhuis(lam2, at_t(lam2))
    assert max_abs(N(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))) > 0.1


def test_cr_integrable_catalog(mixed, samples):
    assert check_cr_integrable(mixed, samples(mixed)).passed


def test_cr_integrable_lambda_zero_is_normal(lam0, samples):
    report = check_cr_integrable(lam0, samples(lam0))
    assert report.passed and report.data["normal"]


def test_cr_integrable_fails_on_perturbed_model(samples):
    S = perturbed_model(LieGroupModelParams(2, 1.0, (1.0, 2.0)))
    assert not check_cr_integrable(S, samples(S, 4)).passed


@pytest.mark.parametrize("lambdas", [[0.0, 0.0], [2.0, 2.0], [1.0, 2.0]])
def test_eta_parallel_h(lambdas, samples):
    S = model(2, 1.0, lambdas)
    assert check_eta_parallel_h(S, samples(S)).passed


@pytest.mark.parametrize("alpha, lambdas", [(0.5, [3.0]), (1.0, [1.0, 2.0]), (2.0, [0.0])])
def test_levi_civita_identities(alpha, lambdas, samples):
    S = model(len(lambdas), alpha, lambdas)
    report = check_levi_civita_identities(S, samples(S, 4))
    assert report.passed, report


def test_alpha_sign_normalization():
    S = model(1, -1.0, [2.0])
    assert S.alpha == 1.0
    assert S.xi(np.zeros(3)) == pytest.approx([-1.0, 0, 0])
    assert any("normalized" in note for note in S.notes)
    assert S.with_alpha_sign_normalized() is S
