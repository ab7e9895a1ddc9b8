"""
Heterogeneous effects: T-learning versus X-learning
===================================================

The T-learner fits one ensemble before treatment and one after, and reads
the effect off as their difference.  The X-learner also regresses the
imputed effects on the covariates and mixes the two residual models.
That extra step helps when the effect is simple (linear) and the residual
learner can represent it.  It hurts when the residual learner is
misspecified (a linear model for a quadratic effect).
"""

# %%
import numpy as np

from synthlearn import LearnerSpec, cate_mse, fit_t_learner, fit_x_learner
from synthlearn.dgp import DgpSpec, simulate

pool = [LearnerSpec("ridge", {"intercept": True}), LearnerSpec("knn", {"k": 5}),
        LearnerSpec("sc-constrained", {"intercept": True})]
resid = [LearnerSpec("ridge", {"intercept": True})]


def errors(cate, T, seeds=30):
    out = []
    for s in range(seeds):
        sim = simulate(DgpSpec("dgp1", J=5, cate=cate, T=T, T0=T // 2, t_minus=T // 4, seed=s))
        tm = fit_t_learner(sim.panel, pool, seed=s)
        xm = fit_x_learner(sim.panel, pool, residual_specs=resid, seed=s, t_model=tm)
        out.append((cate_mse(tm, sim.panel, sim.tau), cate_mse(xm, sim.panel, sim.tau)))
    return np.median(np.array(out), axis=0)


# %%
for cate in ("linear", "quadratic"):
    for T in (400, 800):
        t_err, x_err = errors(cate, T)
        print(f"{cate:9s} T={T}: sqrt MSE  T-learner {t_err:.3f}   X-learner {x_err:.3f}")
