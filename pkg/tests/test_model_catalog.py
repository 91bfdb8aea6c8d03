import numpy as np
import pytest

from akenmotsu.acm_structure import h_prime, validate
from akenmotsu.model_catalog import (
    InvalidParams,
    LieGroupModelParams,
    build_lie_algebra,
    build_model,
    frame_fields,
    frame_matrix,
    perturbed_model,
)
from akenmotsu.tensor_core import lie_bracket, max_abs

from conftest import model


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=0, alpha=1.0, lambdas=()),
        dict(n=1, alpha=0.0, lambdas=(1.0,)),
        dict(n=1, alpha=1.0, lambdas=(1.0, 2.0)),
        dict(n=1, alpha=1.0, lambdas=(-1.0,)),
        dict(n=1, alpha=float("nan"), lambdas=(1.0,)),
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        LieGroupModelParams(**kwargs)


def test_params_round_trip():
    p = LieGroupModelParams(2, 1.5, (1, 2))
    assert LieGroupModelParams.from_dict(p.to_dict()) == p
    assert p.dim == 5
    assert not p.is_kmu
    assert LieGroupModelParams(2, 1.0, (2, 2)).is_kmu
    assert LieGroupModelParams(2, 1.0, (2, 2)).predicted_kappa == -5.0
    assert p.predicted_spectrum == [-2.0, -1.0, 0.0, 1.0, 2.0]


def test_metric_components():
    S = model(1, 1.0, [1.0])
    assert S.g(np.zeros(3)) == pytest.approx(np.eye(3))
    assert S.g(np.array([1.0, 0, 0])) == pytest.approx(np.diag([1.0, np.exp(4.0), 1.0]))


def test_warped_product_metric():
    S = model(1, 0.5, [0.0])
    x = np.array([0.6, 0.2, -0.1])
    assert S.g(x) == pytest.approx(np.diag([1.0, np.exp(0.6), np.exp(0.6)]))


def test_build_model_rejects_raw_dict():
    with pytest.raises(InvalidParams):
        build_model({"n": 1, "alpha": 1.0, "lambdas": [1.0]})


@pytest.mark.parametrize(
    "n, alpha, lambdas",
    [(1, 0.5, (0.0,)), (2, 2.0, (1.0, 2.0)), (3, 1.0, (1.0, 2.0, 3.0))],
)
def test_models_validate(n, alpha, lambdas):
    S = build_model(LieGroupModelParams(n, alpha, lambdas))
    report = validate(S, S.chart.sample(10, 0))
    assert report.passed
    assert max(c.residual for c in report.checks) < 1e-12


def test_frame_orthonormal():
    params = LieGroupModelParams(2, 1.0, (1.0, 2.0))
    S = build_model(params)
    for p in S.chart.sample(20, 9):
        F = frame_matrix(params, p.coords)
        assert max_abs(F.T @ S.g(p.coords) @ F - np.eye(5)) < 1e-14


def test_frame_is_h_prime_eigenbasis_and_phi_pairs():
    params = LieGroupModelParams(2, 1.0, (1.0, 2.0))
    S = build_model(params)
    for p in S.chart.sample(5, 2):
        x = p.coords
        F = frame_matrix(params, x)
        H, phi = S.h_prime(x), S.phi(x)
        for i, lam in enumerate(params.lambdas):
            X, Y = F[:, params.x_index(i)], F[:, params.y_index(i)]
            assert H @ X == pytest.approx(lam * X, abs=1e-12)
            assert H @ Y == pytest.approx(-lam * Y, abs=1e-12)
            assert phi @ X == pytest.approx(Y, abs=1e-12)
            assert phi @ Y == pytest.approx(-X, abs=1e-12)


def test_frame_brackets_match_algebra():
    params = LieGroupModelParams(2, 0.5, (1.0, 3.0))
    S = build_model(params)
    alg = build_lie_algebra(params)
    fields = frame_fields(params)
    p = S.chart.point([0.2, -0.3, 0.1, 0.4, 0.0])
    F = frame_matrix(params, p.coords)
    for a in range(5):
        for b in range(5):
            numeric = lie_bracket(fields[a], fields[b], p)
            expected = F @ alg.bracket(np.eye(5)[a], np.eye(5)[b])
            assert max_abs(numeric - expected) < 1e-6


def test_lie_algebra_properties():
    alg = build_lie_algebra(LieGroupModelParams(2, 1.0, (1.0, 2.0)))
    assert alg.jacobi_residual() == 0.0
    assert alg.solvable and not alg.nilpotent
    assert np.diag(alg.h_prime()) == pytest.approx([0, 1, 2, -1, -2])
    assert max(alg.torsion_axiom_residuals().values()) < 1e-14


def test_lie_algebra_negative_alpha():
    alg = build_lie_algebra(LieGroupModelParams(1, -2.0, (1.0,)))
    assert alg.alpha == 2.0
    assert alg.notes


def test_perturbed_model_needs_two_blocks():
    with pytest.raises(InvalidParams):
        perturbed_model(LieGroupModelParams(1, 1.0, (1.0,)))


def test_perturbed_model_stays_almost_contact_metric():
    S = perturbed_model(LieGroupModelParams(2, 1.0, (1.0, 2.0)))
    assert not S.analytic
    assert validate(S, S.chart.sample(6, 1)).passed


def test_kmu_model_spectrum():
    S = model(3, 2.0, [0.5, 0.5, 0.5])
    rep = h_prime(S, S.chart.origin())
    assert rep.distinct == pytest.approx([-0.5, 0.0, 0.5])
    assert rep.multiplicities == [3, 1, 3]
