import numpy as np
import pytest

from akenmotsu.tensor_core import (
    ChartSpec,
    ExponentialField,
    PointTooCloseToBoundary,
    SingularMetric,
    DegeneratePlane,
    Tolerances,
    TensorField,
    christoffel,
    constant_field,
    covariant_derivative,
    curvature_covariant_derivative,
    exterior_derivative,
    first_bianchi_residual,
    function_field,
    gradient_field,
    inverse_field,
    lie_bracket,
    lie_derivative_endo,
    linear_combination,
    max_abs,
    nabla,
    orthonormal_frame,
    partial,
    product,
    riemann,
    sectional_curvature,
    to_frame,
    transpose,
    wedge_1_2,
)

from conftest import at_t, model


CHART = ChartSpec.standard(1)


def test_chart_standard_names_and_box():
    c = ChartSpec.standard(2)
    assert c.coord_names == ("t", "x1", "x2", "y1", "y2")
    assert c.dim == 5 and c.n == 2
    assert np.all(c.lower == -1) and np.all(c.upper == 1)


@pytest.mark.parametrize(
    "names, box",
    [
        (("t", "x"), ((-1, 1), (-1, 1))),
        (("t", "x", "y"), ((-1, 1), (-1, 1))),
        (("t", "x", "y"), ((-1, 1), (1, 1), (-1, 1))),
    ],
)
def test_chart_rejects_bad_specs(names, box):
    with pytest.raises(ValueError):
        ChartSpec(names, box)


def test_chart_point_outside_box():
    with pytest.raises(ValueError):
        CHART.point([0.0, 2.0, 0.0])


def test_sample_is_seeded_and_shrunk():
    a = CHART.sample(10, seed=3)
    b = CHART.sample(10, seed=3)
    assert all(np.array_equal(p.coords, q.coords) for p, q in zip(a, b))
    coords = np.array([p.coords for p in a])
    assert coords.min() >= -0.9 and coords.max() <= 0.9


def test_tolerances_validation_and_scaling():
    with pytest.raises(ValueError):
        Tolerances(curv=0.0)
    t = Tolerances().scaled(0.01)
    assert t.curv == pytest.approx(1e-9)
    assert Tolerances().override(deriv=1e-3).deriv == 1e-3


# -- partial ---------------------------------------------------------------


def test_partial_at_extremum_is_zero():
    f = function_field(lambda x: x[0] ** 2)
    assert partial(f, CHART.origin(), 0) == pytest.approx(0.0, abs=1e-12)


def test_partial_of_metric_component():
    g_xx = function_field(lambda x: np.exp(2 * x[0]))
    assert partial(g_xx, CHART.origin(), 0) == pytest.approx(2.0, abs=1e-10)


def test_partial_of_constant():
    f = constant_field(np.eye(3), 3)
    assert max_abs(partial(f, CHART.point([0.3, -0.2, 0.5]), 2)) == 0.0


def test_partial_near_boundary_raises():
    f = function_field(lambda x: x[0])
    with pytest.raises(PointTooCloseToBoundary):
        partial(f, CHART.point([0.9999, 0.0, 0.0]), 0)


def test_analytic_and_numeric_partials_agree(lam2):
    x = np.array([0.3, -0.1, 0.4])
    numeric = function_field(lambda y: lam2.g(y))
    assert max_abs(numeric.d(x) - lam2.g.d(x)) < 1e-8
    assert max_abs(numeric.dd(x) - lam2.g.dd(x)) < 1e-6


# -- field algebra -----------------------------------------------------------


def test_product_leibniz_matches_finite_differences():
    a = ExponentialField(np.array([[1.0, 2.0], [0.0, 3.0]]), np.array([[1.0, -1.0], [0.0, 0.5]]), 3)
    b = ExponentialField(np.array([1.0, -1.0]), np.array([2.0, 0.3]), 3)
    f = product("ij,j->i", a, b)
    ref = function_field(lambda x: a(x) @ b(x))
    x = np.array([0.2, 0.1, -0.3])
    assert max_abs(f.d(x) - ref.d(x)) < 1e-9
    assert max_abs(f.dd(x) - ref.dd(x)) < 1e-6


def test_inverse_field_derivatives(lam2):
    inv = inverse_field(lam2.g)
    ref = function_field(lambda x: np.linalg.inv(lam2.g(x)))
    x = np.array([0.1, 0.0, 0.2])
    assert max_abs(inv.d(x) - ref.d(x)) < 1e-8
    assert max_abs(inv.dd(x) - ref.dd(x)) < 1e-5


def test_inverse_field_singular():
    with pytest.raises(SingularMetric):
        inverse_field(constant_field(np.zeros((3, 3)), 3))(np.zeros(3))


def test_transpose_and_linear_combination():
    a = ExponentialField(np.arange(9.0).reshape(3, 3), np.ones((3, 3)), 3)
    s = linear_combination([(0.5, a), (0.5, transpose(a, (1, 0)))])
    x = np.array([0.1, 0.2, 0.3])
    assert max_abs(s(x) - s(x).T) == 0.0
    assert max_abs(s.d(x) - np.swapaxes(s.d(x), 1, 2)) == 0.0


def test_gradient_field_second_partials():
    f = ExponentialField(np.array(1.0), np.array(3.0), 3)
    df = gradient_field(f)
    x = np.array([0.2, 0.0, 0.0])
    assert df.d(x)[0, 0] == pytest.approx(9 * np.exp(0.6))


def test_memo_returns_read_only_arrays():
    f = function_field(lambda x: np.array(x) * 2)
    v = f(np.zeros(3))
    with pytest.raises(ValueError):
        v[0] = 1.0


# -- christoffel ------------------------------------------------------------


def test_christoffel_euclidean():
    g = constant_field(np.eye(3), 3)
    assert max_abs(christoffel(g, CHART.point([0.2, 0.3, -0.1]))) == 0.0


def test_christoffel_warped_product(lam0):
    G = christoffel(lam0.g, at_t(lam0))
    assert G[0, 1, 1] == pytest.approx(-1.0, abs=1e-12)
    assert G[1, 0, 1] == pytest.approx(1.0, abs=1e-12)


def test_christoffel_lambda_one(lam1):
    G = christoffel(lam1.g, at_t(lam1))
    assert G[0, 1, 1] == pytest.approx(-2.0, abs=1e-12)
    assert G[2, 0, 2] == pytest.approx(0.0, abs=1e-12)


def test_christoffel_symmetric_and_metric_compatible(mixed):
    for p in mixed.chart.sample(5, 1):
        G = christoffel(mixed.g, p)
        assert max_abs(G - np.swapaxes(G, 1, 2)) < 1e-14
        x = p.coords
        assert max_abs(nabla(mixed.g(x), mixed.g.d(x), G, "dd")) < 1e-7


def test_christoffel_rejects_indefinite_metric():
    g = constant_field(np.diag([1.0, -1.0, 1.0]), 3)
    with pytest.raises(SingularMetric):
        christoffel(g, CHART.origin())


# -- covariant derivative --------------------------------------------------


def test_covariant_derivative_of_constant_scalar(lam2):
    f = constant_field(np.array(4.0), 3)
    v = covariant_derivative(lam2.gamma, f, at_t(lam2, 0.2), np.array([1.0, 2.0, 3.0]))
    assert v == 0.0


def test_nabla_xi_xi_vanishes(mixed):
    for p in mixed.chart.sample(5, 2):
        v = covariant_derivative(mixed.gamma, mixed.xi, p, mixed.xi(p.coords))
        assert max_abs(v) < 1e-7


def test_nabla_x_xi_on_lambda_two(lam2):
    v = covariant_derivative(lam2.gamma, lam2.xi, at_t(lam2), np.array([0.0, 1.0, 0.0]))
    assert v == pytest.approx([0.0, 3.0, 0.0], abs=1e-12)


def test_nabla_signature_errors():
    with pytest.raises(ValueError):
        nabla(np.zeros((3, 3)), np.zeros((3, 3, 3)), np.zeros((3, 3, 3)), "u")
    with pytest.raises(ValueError):
        nabla(np.zeros(3), np.zeros((3, 3)), np.zeros((3, 3, 3)), "x")


# -- curvature ---------------------------------------------------------------


def test_riemann_euclidean():
    g = constant_field(np.eye(3), 3)
    assert max_abs(riemann(g, CHART.origin())) == 0.0


def test_riemann_xi_plane_lambda_one(lam1):
    p = at_t(lam1)
    R = riemann(lam1.g, p)
    xi = lam1.xi(p.coords)
    X = np.array([0.0, 1.0, 0.0])  # unit at t = 0
    value = np.einsum("lkij,i,j,k,lm,m->", R, xi, X, X, lam1.g(p.coords), xi)
    assert value == pytest.approx(-4.0, abs=1e-10)


def test_riemann_xi_vanishes_on_d(lam2):
    p = at_t(lam2, 0.3)
    R = riemann(lam2.g, p)
    assert max_abs(np.einsum("lkij,k->lij", R, lam2.xi(p.coords))[:, 1:, 1:]) < 1e-12


def test_riemann_antisymmetry_and_bianchi(mixed):
    for p in mixed.chart.sample(4, 5):
        R = riemann(mixed.g, p)
        assert max_abs(R + np.swapaxes(R, 2, 3)) == 0.0
        assert first_bianchi_residual(R) < 1e-7


def test_riemann_margin():
    with pytest.raises(PointTooCloseToBoundary):
        riemann(constant_field(np.eye(3), 3), CHART.point([0.99, 0.0, 0.0]))


@pytest.mark.parametrize("lam, small", [(0.0, True), (1.0, True), (2.0, False)])
def test_curvature_covariant_derivative(lam, small):
    S = model(1, 1.0, [lam])
    p = at_t(S, 0.2)
    nR = curvature_covariant_derivative(S.g, p)
    nR_frame = to_frame(nR, S.frame(p.coords), "duddd")
    if small:
        assert max_abs(nR_frame) < 1e-5
    else:
        assert max_abs(nR_frame) > 1e-4


# -- Lie derivative, exterior derivative ----------------------------------


def test_lie_derivative_of_identity(lam2):
    I = constant_field(np.eye(3), 3)
    assert max_abs(lie_derivative_endo(lam2.xi, I, at_t(lam2))) == 0.0


def test_lie_derivative_phi_lambda_zero(lam0):
    assert max_abs(lie_derivative_endo(lam0.xi, lam0.phi, at_t(lam0, 0.4))) == 0.0


def test_lie_derivative_phi_lambda_one(lam1):
    L = lie_derivative_endo(lam1.xi, lam1.phi, at_t(lam1))
    # phi d_x = e^{2t} d_y, so (L_xi phi) d_x = 2 d_y at t = 0
    assert L[:, 1] == pytest.approx([0.0, 0.0, 2.0])
    h = 0.5 * L @ lam1.phi(np.zeros(3))
    assert h @ np.array([0.0, 1.0, 0.0]) == pytest.approx([0.0, 1.0, 0.0])


def test_lie_bracket_of_frame_fields():
    from akenmotsu.model_catalog import LieGroupModelParams, frame_fields

    params = LieGroupModelParams(1, 1.0, (2.0,))
    xi, X1, Y1 = frame_fields(params)
    p = CHART.point([0.3, 0.1, -0.2])
    assert lie_bracket(xi, X1, p) == pytest.approx(-3.0 * X1(p.coords), abs=1e-12)
    assert lie_bracket(xi, Y1, p) == pytest.approx(1.0 * Y1(p.coords), abs=1e-12)
    assert max_abs(lie_bracket(X1, Y1, p)) < 1e-12


def test_exterior_derivative_of_dt(lam2):
    assert max_abs(exterior_derivative(lam2.eta, at_t(lam2, 0.5))) == 0.0


def test_exterior_derivative_of_exact_form():
    f = function_field(lambda x: np.sin(x[0]) * x[1] + x[2] ** 3)
    df = function_field(lambda x: f.d(x))
    assert max_abs(exterior_derivative(df, CHART.point([0.2, 0.4, -0.3]))) < 1e-6


def test_d_phi_equals_two_alpha_eta_wedge_phi(lam1):
    p = at_t(lam1, 0.25)
    x = p.coords
    dPhi = exterior_derivative(lam1.fundamental_form, p)
    target = 2 * lam1.alpha * wedge_1_2(lam1.eta(x), lam1.fundamental_form(x))
    assert max_abs(dPhi - target) < 1e-6


# -- sectional curvature and frames -------------------------------------


def test_sectional_curvature_xi_x(lam2):
    K = sectional_curvature(lam2.g, at_t(lam2), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    assert K == pytest.approx(-9.0, abs=1e-10)


def test_sectional_curvature_xi_y_flat(lam1):
    K = sectional_curvature(lam1.g, at_t(lam1), np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    assert K == pytest.approx(0.0, abs=1e-10)


def test_sectional_curvature_plane_x_y(lam2):
    K = sectional_curvature(lam2.g, at_t(lam2), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
    assert K == pytest.approx(3.0, abs=1e-10)


def test_sectional_curvature_degenerate(lam2):
    u = np.array([0.0, 1.0, 0.0])
    with pytest.raises(DegeneratePlane):
        sectional_curvature(lam2.g, at_t(lam2), u, 2 * u)


def test_orthonormal_frame(lam2):
    x = np.array([0.4, 0.0, 0.0])
    E = orthonormal_frame(lam2.g(x), first=lam2.xi(x))
    assert E.T @ lam2.g(x) @ E == pytest.approx(np.eye(3), abs=1e-12)
    assert E[:, 0] == pytest.approx(lam2.xi(x))


def test_to_frame_round_trip(lam2):
    x = np.array([0.4, 0.1, 0.0])
    E = orthonormal_frame(lam2.g(x))
    assert to_frame(lam2.g(x), E, "dd") == pytest.approx(np.eye(3), abs=1e-12)
    v = np.array([1.0, 2.0, 3.0])
    assert E @ to_frame(v, E, "u") == pytest.approx(v)


def test_tensor_field_repr():
    assert "phi" in repr(TensorField(lambda x: x, name="phi"))
