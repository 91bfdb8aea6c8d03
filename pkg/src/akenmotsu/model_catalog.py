"""Left-invariant almost alpha-Kenmotsu structures on solvable Lie groups.

For ``n`` and ``lambdas = (l_1..l_n)`` the group carries global coordinates
``(t, x_1..x_n, y_1..y_n)`` in which

    xi = d/dt,   eta = dt,
    phi(d/dx_i) =  exp(2 a l_i t) d/dy_i,
    phi(d/dy_i) = -exp(-2 a l_i t) d/dx_i,
    g = dt^2 + sum exp(2a(1+l_i)t) dx_i^2 + sum exp(2a(1-l_i)t) dy_i^2.

All components are exponentials of ``t``, so every partial is closed-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .acm_structure import AcmStructure
from .tensor_core import (
    ChartSpec,
    ExponentialField,
    TensorField,
    constant_field,
    function_field,
)


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class LieGroupModelParams:
    n: int
    alpha: float
    lambdas: tuple

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "alpha", float(self.alpha))
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParams(f"n must be a positive integer, got {self.n!r}")
        if len(self.lambdas) != self.n:
            raise InvalidParams(f"expected {self.n} lambdas, got {len(self.lambdas)}")
        if any(v < 0 or not np.isfinite(v) for v in self.lambdas):
            raise InvalidParams("lambdas must be finite and nonnegative")
        if self.alpha == 0 or not np.isfinite(self.alpha):
            raise InvalidParams("alpha must be a nonzero real")

    @classmethod
    def from_dict(cls, d: dict) -> "LieGroupModelParams":
        lambdas = d.get("lambdas", ())
        return cls(n=int(d.get("n", len(lambdas))), alpha=d["alpha"], lambdas=tuple(lambdas))

    def to_dict(self) -> dict:
        return {"n": self.n, "alpha": self.alpha, "lambdas": list(self.lambdas)}

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def x_index(self, i: int) -> int:
        return 1 + i

    def y_index(self, i: int) -> int:
        return 1 + self.n + i

    @property
    def is_kmu(self) -> bool:
        """All lambdas equal and positive."""
        return len(set(self.lambdas)) == 1 and self.lambdas[0] > 0

    @property
    def predicted_kappa(self) -> float:
        lam = max(self.lambdas)
        return -self.alpha**2 * (1 + lam**2)

    @property
    def predicted_spectrum(self) -> list:
        return sorted([0.0] + list(self.lambdas) + [-v for v in self.lambdas])


def _phi_arrays(params: LieGroupModelParams):
    dim, a = params.dim, params.alpha
    coef = np.zeros((dim, dim))
    rate = np.zeros((dim, dim))
    for i, lam in enumerate(params.lambdas):
        xi_, yi_ = params.x_index(i), params.y_index(i)
        coef[yi_, xi_], rate[yi_, xi_] = 1.0, 2 * a * lam
        coef[xi_, yi_], rate[xi_, yi_] = -1.0, -2 * a * lam
    return coef, rate


def _metric_arrays(params: LieGroupModelParams):
    dim, a = params.dim, params.alpha
    coef = np.eye(dim)
    rate = np.zeros((dim, dim))
    for i, lam in enumerate(params.lambdas):
        rate[params.x_index(i), params.x_index(i)] = 2 * a * (1 + lam)
        rate[params.y_index(i), params.y_index(i)] = 2 * a * (1 - lam)
    return coef, rate


def time_field(dim: int) -> TensorField:
    e0 = np.zeros(dim)
    e0[0] = 1.0
    zero2 = np.zeros((dim, dim))
    return TensorField(lambda x: x[0], lambda x: e0, lambda x: zero2, name="t")


def build_model(params: LieGroupModelParams, half_width: float = 1.0) -> AcmStructure:
    """The coordinate model of the Lie group with parameters ``params``.

    A negative alpha yields the structure ``(phi, -xi, -eta, g)`` with
    ``-alpha``, and the sign flip is recorded in ``notes``.
    """
    if not isinstance(params, LieGroupModelParams):
        raise InvalidParams("expected LieGroupModelParams")
    dim = params.dim
    chart = ChartSpec.standard(params.n, half_width)
    e0 = np.zeros(dim)
    e0[0] = 1.0
    S = AcmStructure(
        chart=chart,
        phi=ExponentialField(*_phi_arrays(params), dim=dim, name="phi"),
        xi=constant_field(e0, dim, name="xi"),
        eta=constant_field(e0, dim, name="eta"),
        g=ExponentialField(*_metric_arrays(params), dim=dim, name="g"),
        alpha=params.alpha,
        name=f"lie_group(n={params.n}, alpha={params.alpha:g}, lambdas={list(params.lambdas)})",
        model=params,
        time=time_field(dim),
    )
    return S.with_alpha_sign_normalized()


def frame_fields(params: LieGroupModelParams) -> list:
    """``[xi, X_1..X_n, Y_1..Y_n]`` with ``X_i = exp(-a(1+l_i)t) d/dx_i`` and
    ``Y_i = exp(-a(1-l_i)t) d/dy_i``; ``g``-orthonormal everywhere."""
    dim, a = params.dim, params.alpha
    e0 = np.zeros(dim)
    e0[0] = np.sign(a)
    out = [constant_field(e0, dim, name="xi")]
    for i, lam in enumerate(params.lambdas):
        c = np.zeros(dim)
        c[params.x_index(i)] = 1.0
        out.append(ExponentialField(c, np.full(dim, -a * (1 + lam)), dim=dim, name=f"X{i + 1}"))
    for i, lam in enumerate(params.lambdas):
        c = np.zeros(dim)
        c[params.y_index(i)] = 1.0
        out.append(ExponentialField(c, np.full(dim, -a * (1 - lam)), dim=dim, name=f"Y{i + 1}"))
    return out


def frame_matrix(params: LieGroupModelParams, x) -> np.ndarray:
    return np.column_stack([f(x) for f in frame_fields(params)])


# ---------------------------------------------------------------------------
# Lie algebra
# ---------------------------------------------------------------------------


def _span_rank(vectors, tol: float = 1e-10) -> int:
    if not len(vectors):
        return 0
    s = np.linalg.svd(np.array(vectors), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _span_basis(vectors, tol: float = 1e-10) -> np.ndarray:
    if not len(vectors):
        return np.zeros((0, 0))
    u, s, vt = np.linalg.svd(np.array(vectors))
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[:r]


@dataclass
class LieAlgebraModel:
    labels: list
    structure: np.ndarray  # structure[a, b] = [e_a, e_b] in basis components
    phi: np.ndarray
    eta: np.ndarray
    metric: np.ndarray
    alpha: float
    notes: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def bracket(self, u, v) -> np.ndarray:
        return np.einsum("abk,a,b->k", self.structure, u, v)

    def ad(self, u) -> np.ndarray:
        """Matrix of ``v -> [u, v]``."""
        return np.einsum("abk,a->kb", self.structure, u)

    def jacobi_residual(self) -> float:
        worst = 0.0
        E = np.eye(self.dim)
        for a in range(self.dim):
            for b in range(self.dim):
                for c in range(self.dim):
                    x, y, z = E[a], E[b], E[c]
                    s = (
                        self.bracket(x, self.bracket(y, z))
                        + self.bracket(y, self.bracket(z, x))
                        + self.bracket(z, self.bracket(x, y))
                    )
                    worst = max(worst, float(np.max(np.abs(s))))
        return worst

    def _brackets_of(self, A, B) -> list:
        return [self.bracket(u, v) for u in A for v in B]

    def derived_series(self) -> list:
        """Dimensions of ``g, [g, g], [[g, g], [g, g]], ...`` until stable."""
        basis = np.eye(self.dim)
        dims = [self.dim]
        while True:
            nxt = _span_basis(self._brackets_of(basis, basis))
            dims.append(len(nxt))
            if len(nxt) == 0 or len(nxt) == len(basis):
                return dims
            basis = nxt

    def lower_central_series(self) -> list:
        full = np.eye(self.dim)
        basis = full
        dims = [self.dim]
        while True:
            nxt = _span_basis(self._brackets_of(full, basis))
            dims.append(len(nxt))
            if len(nxt) == 0 or len(nxt) == len(basis):
                return dims
            basis = nxt

    @property
    def solvable(self) -> bool:
        return self.derived_series()[-1] == 0

    @property
    def nilpotent(self) -> bool:
        return self.lower_central_series()[-1] == 0

    @property
    def xi(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def h_prime(self) -> np.ndarray:
        """``(1/2a) (L_xi phi) o phi`` with ``(L_xi phi) Y = [xi, phi Y] - phi [xi, Y]``."""
        ad = self.ad(self.xi)
        lie = ad @ self.phi - self.phi @ ad
        return lie @ self.phi / (2 * self.alpha)

    def torsion(self, u, v) -> np.ndarray:
        """Torsion of the left-invariant connection: ``2 T'(X, Y) = -[X, Y]``."""
        return -0.5 * self.bracket(u, v)

    def torsion_axiom_residuals(self) -> dict:
        dim = self.dim
        E = np.eye(dim)
        H = self.h_prime()
        D = range(1, dim)
        a_res = max((np.max(np.abs(self.torsion(E[i], E[j]))) for i in D for j in D), default=0.0)
        b_res = max(
            np.max(np.abs(2 * self.torsion(self.xi, E[i]) - self.alpha * (E[i] + H @ E[i])))
            for i in D
        )
        T_xi = np.column_stack([self.torsion(self.xi, E[i]) for i in range(dim)])
        c_res = np.max(np.abs(self.metric @ T_xi - (self.metric @ T_xi).T))
        return {"a": float(a_res), "b": float(b_res), "c": float(c_res)}


def build_lie_algebra(params: LieGroupModelParams) -> LieAlgebraModel:
    """Basis ``(xi, X_1..X_n, Y_1..Y_n)`` with ``[xi, X_i] = -a(1+l_i) X_i`` and
    ``[xi, Y_i] = -a(1-l_i) Y_i``, all other brackets zero."""
    n, dim = params.n, params.dim
    a = abs(params.alpha)
    notes = []
    if params.alpha < 0:
        notes.append(f"alpha={params.alpha!r} normalized to {a!r} by (phi, -xi, -eta, g)")
    C = np.zeros((dim, dim, dim))
    for i, lam in enumerate(params.lambdas):
        xi_, yi_ = params.x_index(i), params.y_index(i)
        C[0, xi_, xi_] = -a * (1 + lam)
        C[xi_, 0, xi_] = a * (1 + lam)
        C[0, yi_, yi_] = -a * (1 - lam)
        C[yi_, 0, yi_] = a * (1 - lam)
    phi = np.zeros((dim, dim))
    for i in range(n):
        phi[params.y_index(i), params.x_index(i)] = 1.0
        phi[params.x_index(i), params.y_index(i)] = -1.0
    eta = np.zeros(dim)
    eta[0] = 1.0
    labels = ["xi"] + [f"X{i + 1}" for i in range(n)] + [f"Y{i + 1}" for i in range(n)]
    alg = LieAlgebraModel(labels, C, phi, eta, np.eye(dim), a, notes)
    if not alg.solvable or alg.nilpotent:
        raise InvalidParams("bracket table is not solvable and non-nilpotent")
    return alg


# ---------------------------------------------------------------------------
# Counterexamples
# ---------------------------------------------------------------------------


def perturbed_model(params: LieGroupModelParams, strength: float = 1.0) -> AcmStructure:
    """``phi`` conjugated by a frame rotation mixing ``X_1`` with ``X_2``.

    The rotation angle ``strength * (t + x_1)`` varies along the leaves of
    ``D``, so ``phi`` stays compatible with ``g`` but its restriction to ``D``
    is no longer integrable. The new ``phi`` has no analytic partials.
    """
    if params.n < 2:
        raise InvalidParams("the perturbation needs n >= 2")
    base = build_model(params)
    i1, i2 = params.x_index(0), params.x_index(1)

    def phi(x):
        F = frame_matrix(params, x)
        theta = strength * (x[0] + x[i1])
        R = np.eye(params.dim)
        R[i1, i1] = R[i2, i2] = np.cos(theta)
        R[i1, i2], R[i2, i1] = -np.sin(theta), np.sin(theta)
        Q = F @ R @ np.linalg.inv(F)
        return Q @ base.phi(x) @ np.linalg.inv(Q)

    return AcmStructure(
        chart=base.chart,
        phi=function_field(phi, name="phi_perturbed"),
        xi=base.xi,
        eta=base.eta,
        g=base.g,
        alpha=base.alpha,
        name=base.name + " perturbed",
        notes=base.notes,
        model=None,
        time=base.time,
    )
