"""
From alpha-Kenmotsu to almost cosymplectic
==========================================

On a model with all eigenvalues equal, the D-conformal change of the metric
kills d Phi. The new structure again has xi in a nullity distribution, with
the constant shifted by alpha^2.
"""

from akenmotsu import LieGroupModelParams, build_model
from akenmotsu.acm_structure import check_alpha_kenmotsu
from akenmotsu.deformation import d_conformal_change
from akenmotsu.nullity_analysis import fit_kappa_nullity, fit_kmu

for alpha, lam in [(1.0, 2.0), (0.5, 3.0), (2.0, 1.0)]:
    S = build_model(LieGroupModelParams(n=2, alpha=alpha, lambdas=(lam, lam)))
    points = S.chart.sample(6, seed=3)
    kappa = fit_kmu(S, points).kappa
    C = d_conformal_change(S)
    ak = check_alpha_kenmotsu(C, points)
    kc = fit_kappa_nullity(C, points).kappa
    print(
        f"alpha={alpha:g} lambda={lam:g}: kappa={kappa:+.5f} kappa_c={kc:+.5f} "
        f"kappa+alpha^2={kappa + alpha**2:+.5f} |dPhi'|={ak.data['d_Phi_max']:.1e} ({ak.data['kind']})"
    )
