"""
D-homothetic deformations and the class invariant
=================================================

A deformation with constant beta rescales alpha and the nullity constants
but leaves h' alone. Two models with the same spectrum are therefore
identified up to deformation.
"""

from akenmotsu import LieGroupModelParams, build_model
from akenmotsu.deformation import deform, transform_kmu, verify_lc_relation
from akenmotsu.nullity_analysis import classify_pair, fit_kmu, invariant

S = build_model(LieGroupModelParams(n=1, alpha=2.0, lambdas=(2.0,)))
points = S.chart.sample(8, seed=1)

fit = fit_kmu(S, points)
print(f"kappa={fit.kappa:.6f}  mu={fit.mu:.6f}  residual={fit.residual:.1e}")

###############################################################################
# Deform with beta = 2. The fitted constants follow kappa / beta^2 and
# mu / beta^2, while kappa / alpha^2 stays put.

D = deform(S, 2.0)
fit_d = fit_kmu(D, points)
print("predicted:", transform_kmu(fit.kappa, fit.mu, 2.0))
print(f"fitted:    ({fit_d.kappa:.6f}, {fit_d.mu:.6f})")
print("I before/after:", invariant(S, points).I, invariant(D, points).I)
print(verify_lc_relation(S, 2.0, points).summary())

###############################################################################
# A model with alpha = 1 lies in the same class; the witness constant is
# the ratio of the two alphas.

T = build_model(LieGroupModelParams(n=1, alpha=1.0, lambdas=(2.0,)))
verdict = classify_pair(T, S, T.chart.sample(6, 2), points)
print(verdict.verdict, "beta =", verdict.beta)

other = build_model(LieGroupModelParams(n=1, alpha=1.0, lambdas=(1.0,)))
print(classify_pair(T, other, T.chart.sample(6, 2), other.chart.sample(6, 2)).reason)
