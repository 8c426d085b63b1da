"""
Population estimands and the omitted-variable bias
==================================================

The regression coefficient is a well-defined population quantity; when a
common cause is left out it equals the causal effect plus ``beta * delta``.
"""

from scmlab import preset
from scmlab.estimands import (
    decompose,
    fd_estimand,
    implied_moments,
    iv_estimand,
    ols_estimand,
    threshold_treatment_moments,
)

# %%
# Exact moments, then the short and the long regression.
cont = preset("cont")
m = implied_moments(cont.model)
print("Var(D) =", m.var("D"), " Cov(D, Y) =", m.cov("D", "Y"))
short = ols_estimand(m, "Y", ["D"])
long = ols_estimand(m, "Y", ["D", "U"])
print(f"E[Y|D]    = {short.intercept:g} + {short.slope:g} D")
print(f"E[Y|D, U] = {long.intercept:g} + {long.coefficients['D']:g} D + {long.coefficients['U']:g} U")

# %%
# The decomposition reads tau off the outcome equation and projects the
# omitted term onto the regressors.
for name in ("cont", "cont-x", "binary", "iv-invalid", "panel"):
    s = preset(name)
    est = decompose(s.model, s.regression, s.latent)
    d = est.decomposition
    print(f"{name:<11} {s.regression.method:<17} slope {est.slope:10.4f} = tau {d.tau:g} + bias {d.bias:.4f}")

# %%
# With a threshold treatment the shift in U between arms has a closed form.
t = threshold_treatment_moments(rho=0.5, cutoff=0.0)
print("E[U|D=1] - E[U|D=0] =", t["delta"])

# %%
# An instrument that also moves U is biased by beta * delta / pi; a valid one
# is not. First differences remove a fixed effect of any size.
print("2SLS, Z -> U present:", iv_estimand(implied_moments(preset("iv-invalid").model), "Y", "D", "Z").slope)
print("2SLS, delta = 0     :", iv_estimand(implied_moments(preset("iv-invalid", delta=0.0).model), "Y", "D", "Z").slope)
for v in (0.0, 1e6):
    est = fd_estimand(preset("panel", fe_variance=v).model, ("Y1", "Y2"), ("D1", "D2"))
    print(f"FD slope with fixed-effect variance {v:g}: {est.slope}")
