"""Property-based checks with hypothesis over model parameters and points."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from akenmotsu.model_catalog import LieGroupModelParams, build_model
from akenmotsu.tensor_core import (
    first_bianchi_residual,
    function_field,
    max_abs,
    nabla,
    sectional_curvature_value,
    to_frame,
)

alphas = st.sampled_from([0.5, 1.0, 2.0])
lams = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)
coord = st.floats(min_value=-0.8, max_value=0.8, allow_nan=False)


def _model(alpha, lam1, lam2):
    return build_model(LieGroupModelParams(2, alpha, (lam1, lam2)))


@settings(max_examples=30, deadline=None)
@given(alphas, lams, lams, st.lists(coord, min_size=5, max_size=5))
def test_metric_compatibility(alpha, l1, l2, x):
    S = _model(alpha, l1, l2)
    x = np.array(x)
    res = nabla(S.g(x), S.g.d(x), S.gamma(x), "dd")
    assert max_abs(to_frame(res, S.frame(x), "ddd")) < 1e-10


@settings(max_examples=30, deadline=None)
@given(alphas, lams, lams, st.lists(coord, min_size=5, max_size=5))
def test_first_bianchi(alpha, l1, l2, x):
    S = _model(alpha, l1, l2)
    x = np.array(x)
    R = S.riemann(x)
    assert first_bianchi_residual(to_frame(R, S.frame(x), "uddd")) < 1e-9


@settings(max_examples=25, deadline=None)
@given(
    alphas,
    lams,
    st.lists(coord, min_size=3, max_size=3),
    st.floats(min_value=-2, max_value=2),
    st.floats(min_value=-2, max_value=2),
    st.floats(min_value=-2, max_value=2),
)
def test_sectional_curvature_basis_invariant(alpha, lam, x, a, b, c):
    S = build_model(LieGroupModelParams(1, alpha, (lam,)))
    x = np.array(x)
    R, g = S.riemann(x), S.g(x)
    u, v = np.array([1.0, 0.3, -0.2]), np.array([0.1, 1.0, 0.5])
    M = np.array([[1.0 + abs(a), b], [c, 1.0 + abs(b) + abs(c) + abs(a)]])
    if abs(np.linalg.det(M)) < 0.1:
        return
    u2, v2 = M[0, 0] * u + M[0, 1] * v, M[1, 0] * u + M[1, 1] * v
    K1 = sectional_curvature_value(R, g, u, v)
    K2 = sectional_curvature_value(R, g, u2, v2)
    assert abs(K1 - K2) < 1e-9 * max(1.0, abs(K1))


@settings(max_examples=20, deadline=None)
@given(alphas, lams, lams, st.lists(coord, min_size=5, max_size=5))
def test_analytic_partials_match_finite_differences(alpha, l1, l2, x):
    S = _model(alpha, l1, l2)
    x = np.array(x)
    numeric_g = function_field(lambda y: S.g(y))
    numeric_phi = function_field(lambda y: S.phi(y))
    scale = max(1.0, max_abs(S.g.d(x)))
    assert max_abs(numeric_g.d(x) - S.g.d(x)) < 1e-8 * scale
    assert max_abs(numeric_phi.d(x) - S.phi.d(x)) < 1e-8 * max(1.0, max_abs(S.phi.d(x)))


@settings(max_examples=20, deadline=None)
@given(alphas, lams, st.lists(coord, min_size=3, max_size=3))
def test_h_prime_spectrum_is_pm_lambda(alpha, lam, x):
    S = build_model(LieGroupModelParams(1, alpha, (lam,)))
    x = np.array(x)
    H = to_frame(S.h_prime(x), S.frame(x), "ud")
    assert np.sort(np.linalg.eigvals(H).real) == pytest.approx([-lam, 0.0, lam], abs=1e-8)
