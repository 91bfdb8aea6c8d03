"""Pointwise tensor calculus on a single coordinate chart.

Index conventions used throughout the package:

* vectors ``X[i]``, covectors ``w[i]``;
* (1,1)-tensors ``A[i, j] = A^i_j`` so that ``(A X)^i = A[i, j] X[j]``;
* connection coefficients ``gamma[k, i, j] = Gamma^k_{ij}`` with ``i`` the
  differentiation direction: ``nabla_{d_i} d_j = Gamma^k_{ij} d_k``;
* curvature ``riem[l, k, i, j] = R^l_{kij}`` with
  ``(R_{XY} Z)^l = R^l_{kij} X^i Y^j Z^k`` and
  ``R_{XY} = nabla_X nabla_Y - nabla_Y nabla_X - nabla_{[X, Y]}``;
* derivative arrays carry the derivative index first: ``d[m, ...]`` is
  ``d_m`` of the tensor, ``dd[m, n, ...]`` is ``d_m d_n``.

Fields are :class:`TensorField` objects evaluated on raw coordinate arrays.
Public operations take :class:`ChartPoint` values so the finite-difference
stencil can be checked against the chart's domain box.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

STEP_FIRST = 1e-3
STEP_NESTED = 3e-3

_MEMO_LIMIT = 512


class GeometryError(Exception):
    """Base class for errors raised by the geometry routines."""


class PointTooCloseToBoundary(GeometryError):
    pass


class SingularMetric(GeometryError):
    pass


class DegeneratePlane(GeometryError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds. ``curv`` applies to analytic partials,
    ``curv_numeric`` to finite-difference fields."""

    deriv: float = 1e-6
    curv: float = 1e-7
    curv_numeric: float = 1e-4
    nabla_r: float = 1e-5
    struct: float = 1e-9

    def __post_init__(self):
        for name in ("deriv", "curv", "curv_numeric", "nabla_r", "struct"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be positive")

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(**{k: v * factor for k, v in self.as_dict().items()})

    def override(self, **values) -> "Tolerances":
        return replace(self, **values)

    def as_dict(self) -> dict:
        return {
            "deriv": self.deriv,
            "curv": self.curv,
            "curv_numeric": self.curv_numeric,
            "nabla_r": self.nabla_r,
            "struct": self.struct,
        }


DEFAULT_TOLERANCES = Tolerances()


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChartSpec:
    coord_names: tuple
    domain_box: tuple

    def __post_init__(self):
        object.__setattr__(self, "coord_names", tuple(self.coord_names))
        object.__setattr__(
            self, "domain_box", tuple((float(a), float(b)) for a, b in self.domain_box)
        )
        dim = len(self.coord_names)
        if len(self.domain_box) != dim:
            raise ValueError("domain_box must have one interval per coordinate")
        if dim < 3 or dim % 2 == 0:
            raise ValueError(f"chart dimension must be odd and >= 3, got {dim}")
        for lo, hi in self.domain_box:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")

    @classmethod
    def standard(cls, n: int, half_width: float = 1.0) -> "ChartSpec":
        """Chart ``(t, x_1..x_n, y_1..y_n)`` on the box ``[-w, w]^(2n+1)``."""
        names = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)]
        return cls(tuple(names), tuple((-half_width, half_width) for _ in names))

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    @property
    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.domain_box])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b for _, b in self.domain_box])

    def index(self, name: str) -> int:
        return self.coord_names.index(name)

    def point(self, coords) -> "ChartPoint":
        return ChartPoint(self, np.asarray(coords, dtype=float))

    def origin(self) -> "ChartPoint":
        return self.point(0.5 * (self.lower + self.upper))

    def sample(self, count: int = 20, seed: int = 42, shrink: float = 0.1) -> list:
        """Seeded uniform sample of the box shrunk by ``shrink`` of its width."""
        rng = np.random.default_rng(seed)
        lo, hi = self.lower, self.upper
        pad = 0.5 * shrink * (hi - lo)
        pts = rng.uniform(lo + pad, hi - pad, size=(count, self.dim))
        return [self.point(x) for x in pts]


@dataclass(frozen=True, eq=False)
class ChartPoint:
    chart: ChartSpec
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.chart.dim,):
            raise ValueError(f"expected {self.chart.dim} coordinates, got shape {c.shape}")
        if np.any(c < self.chart.lower) or np.any(c > self.chart.upper):
            raise ValueError(f"point {c} outside the domain box")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __repr__(self):
        return f"ChartPoint({np.array2string(self.coords, precision=6)})"


def step_sizes(x: np.ndarray, base: float = STEP_FIRST) -> np.ndarray:
    return base * np.maximum(1.0, np.abs(x))


def require_margin(p: ChartPoint, reach: float = 2.0, base: float = STEP_FIRST) -> None:
    """Raise unless a stencil of ``reach`` steps around ``p`` fits in the box."""
    h = step_sizes(p.coords, base)
    lo, hi = p.chart.lower, p.chart.upper
    if np.any(p.coords - reach * h < lo) or np.any(p.coords + reach * h > hi):
        raise PointTooCloseToBoundary(
            f"{p!r} needs a margin of {reach} x step inside {p.chart.domain_box}"
        )


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


def central_difference(fn: Callable, x: np.ndarray, base: float = STEP_FIRST) -> np.ndarray:
    """Fourth-order central differences of ``fn`` in every coordinate."""
    x = np.asarray(x, dtype=float)
    h = step_sizes(x, base)
    out = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        f_p1, f_m1 = np.asarray(fn(x + e)), np.asarray(fn(x - e))
        f_p2, f_m2 = np.asarray(fn(x + 2 * e)), np.asarray(fn(x - 2 * e))
        out.append((8.0 * (f_p1 - f_m1) - (f_p2 - f_m2)) / (12.0 * h[i]))
    return np.stack(out)


class TensorField:
    """A tensor-valued function of the chart coordinates.

    ``grad`` and ``hess`` are optional analytic evaluators returning arrays of
    shape ``(dim, *shape)`` and ``(dim, dim, *shape)``. When missing, first
    partials are taken by central differences with step ``STEP_FIRST``.
    Second partials differentiate the analytic gradient if there is one,
    otherwise the finite-difference gradient with the wider ``STEP_NESTED``.
    """

    def __init__(self, fn, grad=None, hess=None, name: str = ""):
        self._fn = fn
        self._grad = grad
        self._hess = hess
        self.name = name
        self._memo = ({}, {}, {})

    def __repr__(self):
        return f"TensorField({self.name or self._fn!r})"

    @property
    def has_analytic_grad(self) -> bool:
        return self._grad is not None

    @property
    def has_analytic_hess(self) -> bool:
        return self._hess is not None

    def _cached(self, slot: int, x, compute):
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        memo = self._memo[slot]
        hit = memo.get(key)
        if hit is None:
            hit = np.asarray(compute(x), dtype=float)
            hit.setflags(write=False)
            if len(memo) >= _MEMO_LIMIT:
                memo.clear()
            memo[key] = hit
        return hit

    def __call__(self, x) -> np.ndarray:
        return self._cached(0, x, self._fn)

    def d(self, x) -> np.ndarray:
        if self._grad is not None:
            return self._cached(1, x, self._grad)
        return self._cached(1, x, lambda y: central_difference(self, y))

    def dd(self, x) -> np.ndarray:
        if self._hess is not None:
            return self._cached(2, x, self._hess)
        if self._grad is not None:
            return self._cached(2, x, lambda y: central_difference(self.d, y))
        return self._cached(2, x, lambda y: central_difference(self.d, y, STEP_NESTED))


def constant_field(value, dim: int, name: str = "") -> TensorField:
    value = np.asarray(value, dtype=float)
    zero1 = np.zeros((dim,) + value.shape)
    zero2 = np.zeros((dim, dim) + value.shape)
    return TensorField(lambda x: value, lambda x: zero1, lambda x: zero2, name=name)


class ExponentialField(TensorField):
    """Entries ``coef * exp(rate * x[axis])``; derivatives in closed form."""

    def __init__(self, coef, rate, dim: int, axis: int = 0, name: str = ""):
        self.coef = np.asarray(coef, dtype=float)
        self.rate = np.asarray(rate, dtype=float) * (self.coef != 0)
        self.axis = axis
        self.dim = dim
        super().__init__(self._value, self._gradient, self._hessian, name=name)

    def _value(self, x):
        return self.coef * np.exp(self.rate * x[self.axis])

    def _gradient(self, x):
        out = np.zeros((self.dim,) + self.coef.shape)
        out[self.axis] = self.rate * self._value(x)
        return out

    def _hessian(self, x):
        out = np.zeros((self.dim, self.dim) + self.coef.shape)
        out[self.axis, self.axis] = self.rate**2 * self._value(x)
        return out


def _both_analytic(*fields) -> bool:
    return all(f.has_analytic_grad for f in fields)


def linear_combination(terms: Sequence[tuple], name: str = "") -> TensorField:
    """Field ``sum(c * f)`` for ``(c, f)`` pairs with constant coefficients."""
    terms = [(float(c), f) for c, f in terms]

    def fn(x):
        return sum(c * f(x) for c, f in terms)

    def grad(x):
        return sum(c * f.d(x) for c, f in terms)

    def hess(x):
        return sum(c * f.dd(x) for c, f in terms)

    analytic = _both_analytic(*(f for _, f in terms))
    return TensorField(fn, grad if analytic else None, hess if analytic else None, name=name)


def _free_letters(subscripts: str, count: int) -> list:
    used = set(subscripts)
    return [c for c in string.ascii_letters if c not in used][:count]


def product(subscripts: str, a: TensorField, b: TensorField, name: str = "") -> TensorField:
    """Einsum product of two fields with derivatives by the Leibniz rule."""
    inputs, out = subscripts.split("->")
    sa, sb = inputs.split(",")
    m, n = _free_letters(subscripts, 2)
    g_a = f"{m}{sa},{sb}->{m}{out}"
    g_b = f"{sa},{m}{sb}->{m}{out}"
    h_aa = f"{m}{n}{sa},{sb}->{m}{n}{out}"
    h_ab = f"{m}{sa},{n}{sb}->{m}{n}{out}"
    h_ba = f"{n}{sa},{m}{sb}->{m}{n}{out}"
    h_bb = f"{sa},{m}{n}{sb}->{m}{n}{out}"

    def fn(x):
        return np.einsum(subscripts, a(x), b(x))

    def grad(x):
        return np.einsum(g_a, a.d(x), b(x)) + np.einsum(g_b, a(x), b.d(x))

    def hess(x):
        da, db = a.d(x), b.d(x)
        return (
            np.einsum(h_aa, a.dd(x), b(x))
            + np.einsum(h_ab, da, db)
            + np.einsum(h_ba, da, db)
            + np.einsum(h_bb, a(x), b.dd(x))
        )

    analytic = _both_analytic(a, b)
    return TensorField(fn, grad if analytic else None, hess if analytic else None, name=name)


def transpose(f: TensorField, axes: Sequence[int], name: str = "") -> TensorField:
    """Permute the tensor indices of ``f`` (derivative axes untouched)."""
    axes = tuple(axes)
    axes1 = (0,) + tuple(a + 1 for a in axes)
    axes2 = (0, 1) + tuple(a + 2 for a in axes)

    def fn(x):
        return np.transpose(f(x), axes)

    def grad(x):
        return np.transpose(f.d(x), axes1)

    def hess(x):
        return np.transpose(f.dd(x), axes2)

    return TensorField(
        fn,
        grad if f.has_analytic_grad else None,
        hess if f.has_analytic_grad else None,
        name=name,
    )


def gradient_field(f: TensorField, name: str = "") -> TensorField:
    """The field ``x -> d f(x)``; its gradient is ``f``'s second partials."""

    def grad(x):
        return f.dd(x)

    return TensorField(f.d, grad if f.has_analytic_grad else None, name=name)


def inverse_field(g: TensorField, name: str = "") -> TensorField:
    """Matrix inverse with ``d(g^-1) = -g^-1 (dg) g^-1``."""

    def fn(x):
        gx = np.asarray(g(x))
        try:
            inv = np.linalg.inv(gx)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric(str(exc)) from exc
        if not np.all(np.isfinite(inv)):
            raise SingularMetric("metric inverse is not finite")
        return inv

    inv_f = TensorField(fn, name=name)

    def grad(x):
        gi = inv_f(x)
        return -np.einsum("ab,mbc,cd->mad", gi, g.d(x), gi)

    def hess(x):
        gi = inv_f(x)
        dg = g.d(x)
        t = np.einsum("ab,mbc,cd,nde,ef->mnaf", gi, dg, gi, dg, gi)
        return t + np.swapaxes(t, 0, 1) - np.einsum("ab,mnbc,cd->mnad", gi, g.dd(x), gi)

    if g.has_analytic_grad:
        inv_f._grad = grad
        inv_f._hess = hess
    return inv_f


def function_field(fn: Callable, name: str = "") -> TensorField:
    """A field without analytic partials (finite-difference fallback)."""
    return TensorField(fn, name=name)


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------


def partial(f: TensorField, p: ChartPoint, direction: int) -> np.ndarray:
    """First partial of ``f`` along coordinate ``direction`` at ``p``."""
    require_margin(p, 2.0)
    return f.d(p.coords)[direction]


def christoffel_field(g: TensorField) -> TensorField:
    """Levi-Civita coefficients ``Gamma^k_{ij}`` as a field of ``g``."""
    ginv = inverse_field(g)
    dg = gradient_field(g)  # dg[i, j, l] = d_i g_{jl}
    koszul = linear_combination(
        [(1.0, dg), (1.0, transpose(dg, (1, 0, 2))), (-1.0, transpose(dg, (1, 2, 0)))]
    )  # S[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    return linear_combination([(0.5, product("kl,ijl->kij", ginv, koszul))], name="christoffel")


def christoffel(g: TensorField, p: ChartPoint) -> np.ndarray:
    """``Gamma[k, i, j]`` of the Levi-Civita connection of ``g`` at ``p``."""
    require_margin(p, 2.0)
    gx = g(p.coords)
    if np.min(np.linalg.eigvalsh(0.5 * (gx + gx.T))) <= 0:
        raise SingularMetric(f"metric not positive definite at {p!r}")
    return christoffel_field(g)(p.coords)


def nabla(T: np.ndarray, dT: np.ndarray, gamma: np.ndarray, signature: str) -> np.ndarray:
    """Covariant derivative components ``(nabla_m T)`` from ``T`` and ``d_m T``.

    ``signature`` has one character per index of ``T``: ``'u'`` for upper,
    ``'d'`` for lower. The result carries the derivative index first.
    """
    T = np.asarray(T, dtype=float)
    if len(signature) != T.ndim:
        raise ValueError(f"signature {signature!r} does not match rank {T.ndim}")
    out = np.array(dT, dtype=float)
    for pos, kind in enumerate(signature):
        moved = np.moveaxis(T, pos, 0)
        if kind == "u":
            term = np.moveaxis(np.tensordot(gamma, moved, axes=([2], [0])), 0, 1)
        elif kind == "d":
            term = -np.tensordot(gamma, moved, axes=([0], [0]))
        else:
            raise ValueError(f"bad signature character {kind!r}")
        out += np.moveaxis(term, 1, pos + 1)
    return out


def covariant_derivative(
    connection: TensorField,
    T: TensorField,
    p: ChartPoint,
    X,
    signature: str | None = None,
) -> np.ndarray:
    """``(nabla_X T)`` at ``p`` for a connection given as a coefficient field.

    Rank-1 fields default to vectors and rank-2 fields to (1,1)-tensors;
    pass ``signature`` (e.g. ``'d'`` or ``'dd'``) for other index types.
    """
    require_margin(p, 2.0)
    x = p.coords
    value = T(x)
    if signature is None:
        signature = {0: "", 1: "u", 2: "ud"}.get(value.ndim)
        if signature is None:
            raise ValueError("give a signature for tensors of rank > 2")
    full = nabla(value, T.d(x), connection(x), signature)
    return np.tensordot(np.asarray(X, dtype=float), full, axes=([0], [0]))


def curvature_from_connection(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """``R^l_{kij}`` of a (possibly non-symmetric) connection in a coordinate frame."""
    term_d = np.einsum("iljk->lkij", dgamma)
    term_g = np.einsum("lim,mjk->lkij", gamma, gamma)
    return term_d - np.swapaxes(term_d, 2, 3) + term_g - np.swapaxes(term_g, 2, 3)


def curvature_field(gamma: TensorField, name: str = "curvature") -> TensorField:
    """Curvature of the connection ``gamma`` as a field (derivatives by Leibniz)."""
    dgamma = gradient_field(gamma)
    first = transpose(dgamma, (1, 3, 0, 2))  # dgamma[i,l,j,k] -> [l,k,i,j]
    quad = product("lim,mjk->lkij", gamma, gamma)
    return linear_combination(
        [
            (1.0, first),
            (-1.0, transpose(first, (0, 1, 3, 2))),
            (1.0, quad),
            (-1.0, transpose(quad, (0, 1, 3, 2))),
        ],
        name=name,
    )


def riemann(g: TensorField, p: ChartPoint) -> np.ndarray:
    """Riemann tensor ``R^l_{kij}`` of ``g`` at ``p``."""
    require_margin(p, 4.0, STEP_NESTED)
    gamma = christoffel_field(g)
    return curvature_from_connection(gamma(p.coords), gamma.d(p.coords))


def curvature_covariant_derivative(g: TensorField, p: ChartPoint) -> np.ndarray:
    """``(nabla_m R)^l_{kij}`` as an array indexed ``[m, l, k, i, j]``."""
    require_margin(p, 6.0, STEP_NESTED)
    gamma = christoffel_field(g)
    R = curvature_field(gamma)
    x = p.coords
    return nabla(R(x), R.d(x), gamma(x), "uddd")


def lie_bracket(X: TensorField, Y: TensorField, p: ChartPoint) -> np.ndarray:
    require_margin(p, 2.0)
    x = p.coords
    return np.einsum("m,mi->i", X(x), Y.d(x)) - np.einsum("m,mi->i", Y(x), X.d(x))


def lie_derivative_endo_field(X: TensorField, A: TensorField) -> TensorField:
    """``L_X A`` with ``(L_X A)^i_j = X^m d_m A^i_j - A^m_j d_m X^i + A^i_m d_j X^m``."""
    dA = gradient_field(A)
    dX = gradient_field(X)
    return linear_combination(
        [
            (1.0, product("m,mij->ij", X, dA)),
            (-1.0, product("mj,mi->ij", A, dX)),
            (1.0, product("im,jm->ij", A, dX)),
        ],
        name="lie_derivative",
    )


def lie_derivative_endo(X: TensorField, A: TensorField, p: ChartPoint) -> np.ndarray:
    """``(L_X A)(Y) = [X, AY] - A[X, Y]`` as a matrix at ``p``."""
    require_margin(p, 2.0)
    return lie_derivative_endo_field(X, A)(p.coords)


def exterior_derivative_value(form: np.ndarray, dform: np.ndarray) -> np.ndarray:
    """``d`` of a 1- or 2-form from its components and first partials.

    Uses ``dw(X, Y) = X w(Y) - Y w(X) - w([X, Y])`` and its cyclic analogue
    for 2-forms, matching the wedge convention of :func:`wedge_1_2`.
    """
    form = np.asarray(form)
    if form.ndim == 1:
        return dform - dform.T
    if form.ndim == 2:
        return (
            dform
            + np.transpose(dform, (1, 2, 0))
            + np.transpose(dform, (2, 0, 1))
        )
    raise ValueError("only 1- and 2-forms are supported")


def exterior_derivative_field(form: TensorField) -> TensorField:
    d = gradient_field(form)

    def fn(x):
        return exterior_derivative_value(form(x), d(x))

    def grad(x):
        dd = d.d(x)
        if dd.ndim == 3:
            return dd - np.swapaxes(dd, 1, 2)
        return (
            dd
            + np.transpose(dd, (0, 2, 3, 1))
            + np.transpose(dd, (0, 3, 1, 2))
        )

    return TensorField(fn, grad if form.has_analytic_grad else None, name="exterior_derivative")


def exterior_derivative(form: TensorField, p: ChartPoint) -> np.ndarray:
    require_margin(p, 2.0)
    x = p.coords
    return exterior_derivative_value(form(x), form.d(x))


def wedge_1_2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a ^ b)_{ijk} = a_i b_jk + a_j b_ki + a_k b_ij``."""
    t = np.einsum("i,jk->ijk", a, b)
    return t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))


def sectional_curvature_value(riem: np.ndarray, gx: np.ndarray, u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    denom = (u @ gx @ u) * (v @ gx @ v) - (u @ gx @ v) ** 2
    if denom < 1e-12:
        raise DegeneratePlane("plane spanned by u, v is degenerate")
    Ruvv = np.einsum("lkij,k,i,j->l", riem, v, u, v)
    return float(u @ gx @ Ruvv / denom)


def sectional_curvature(g: TensorField, p: ChartPoint, u, v) -> float:
    """``K(u, v) = g(R_{uv} v, u) / (|u|^2 |v|^2 - g(u, v)^2)``."""
    return sectional_curvature_value(riemann(g, p), g(p.coords), u, v)


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


def orthonormal_frame(gx: np.ndarray, first=None, tol: float = 1e-10) -> np.ndarray:
    """Columns of a ``gx``-orthonormal frame from Gram-Schmidt on the coordinate
    vectors, seeded with ``first`` when given."""
    dim = gx.shape[0]
    candidates = [] if first is None else [np.asarray(first, dtype=float)]
    candidates += list(np.eye(dim))
    frame = []
    for v in candidates:
        w = v.copy()
        for _ in range(2):
            for e in frame:
                w = w - (e @ gx @ w) * e
        norm2 = w @ gx @ w
        if norm2 > tol * max(1.0, v @ gx @ v):
            frame.append(w / np.sqrt(norm2))
        if len(frame) == dim:
            break
    if len(frame) != dim:
        raise SingularMetric("could not build an orthonormal frame")
    return np.column_stack(frame)


def to_frame(T: np.ndarray, E: np.ndarray, signature: str) -> np.ndarray:
    """Components of ``T`` in the frame with columns ``E``."""
    Einv = np.linalg.inv(E)
    out = np.asarray(T, dtype=float)
    for pos, kind in enumerate(signature):
        M = Einv if kind == "u" else E.T
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [pos])), 0, pos)
    return out


def max_abs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def first_bianchi_residual(riem: np.ndarray) -> float:
    """``max |R^l_{kij} + R^l_{ijk} + R^l_{jki}|``."""
    cyc = riem + np.transpose(riem, (0, 2, 3, 1)) + np.transpose(riem, (0, 3, 1, 2))
    return max_abs(cyc)
