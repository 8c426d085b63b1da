"""
Finite-sample estimators and residual diagnostics
=================================================

OLS, just-identified 2SLS and first differences on simulated data. The
residual is orthogonal to the regressors by construction, whether or not the
slope has a causal reading.
"""

from scmlab import Stream, preset, sample
from scmlab.estimators import fd_fit, ols_fit, residual_diagnostics, tsls_fit

# %%
cont = preset("cont")
data = sample(cont.model, 50_000, Stream(3))
fit = ols_fit(data, "Y", ["D"])
diag = residual_diagnostics(fit, data, ["D", "U"])
print(f"slope {fit.coefficients['D']:.2f} (tau is 100)")
print(f"Cov(residual, D) = {diag.covariances['D']:.2e}; Cov(residual, U) = {diag.covariances['U']:.1f}")

# %%
# Binary treatment: residual means by arm are zero as well.
binary = preset("binary")
data = sample(binary.model, 50_000, Stream(4))
fit = ols_fit(data, "Y", ["D"])
print("arm means of the residual:", residual_diagnostics(fit, data, ["D"]).arm_means["D"])
print("controlling for U:", ols_fit(data, "Y", ["D", "U"]).coefficients["D"])

# %%
iv = preset("iv-invalid")
data = sample(iv.model, 50_000, Stream(5))
fit = tsls_fit(data, "Y", "D", "Z")
print(f"2SLS slope {fit.coefficients['D']:.3f}; Cov(residual, Z) = "
      f"{residual_diagnostics(fit, data, ['Z']).covariances['Z']:.1e}")

# %%
panel = preset("panel")
data = sample(panel.model, 50_000, Stream(6))
fit = fd_fit(data, panel.regression.panel_pairs, "dY", ["dD"])
print(f"first-difference slope {fit.coefficients['dD']:.3f} (tau is 1)")
