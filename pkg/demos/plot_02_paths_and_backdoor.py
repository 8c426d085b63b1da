"""
Paths, colliders and the backdoor criterion
===========================================

Which paths connect a treatment to an outcome, which of them are open, and
whether a conditioning set closes every backdoor.
"""

from scmlab import preset
from scmlab.graph import Dag, classify_path, enumerate_paths, instrument_violations, is_backdoor_admissible

# %%
# A confounder U with a direct effect D -> Y.
g = Dag.from_edges("DUY", [("U", "D"), ("U", "Y"), ("D", "Y")])
for path in enumerate_paths(g, "D", "Y"):
    for z in ((), ("U",)):
        c = classify_path(g, path, z)
        print(f"{str(path):<14} given {set(z) or '{}'}: {c.kind}, {'open' if c.open else 'blocked'}")

print("{} admissible:", is_backdoor_admissible(g, "D", "Y", ()))
print("{U} admissible:", is_backdoor_admissible(g, "D", "Y", {"U"}))

# %%
# Conditioning on a collider opens a path that was closed.
g = Dag.from_edges("DWY", [("D", "W"), ("Y", "W")])
(path,) = enumerate_paths(g, "D", "Y")
print(path, "->", classify_path(g, path).open, "then given W ->", classify_path(g, path, {"W"}).open)

# %%
# Models work directly. Correlated exogenous variables are drawn with an
# explicit common cause, so the confounding path is visible.
cont = preset("cont").model
for path in enumerate_paths(cont, "D", "Y"):
    print(path)

# %%
# Nothing points into the instrument Z, so Z passes the backdoor test as an
# exposure, yet it still reaches Y through U without going through D.
iv = preset("iv-invalid").model
print("no backdoor into Z:", is_backdoor_admissible(iv, "Z", "Y", ()))
print("paths that bypass D:", [str(p) for p in instrument_violations(iv, "Z", "D", "Y")])
