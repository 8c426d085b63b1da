"""
Scenario files and the ``lab`` command
======================================

Presets serialise to TOML scenario files that round-trip exactly; the same
files drive the command line.
"""

import json
import tempfile
from pathlib import Path

from scmlab import preset
from scmlab.cli import main
from scmlab.scenario_io import dump_scenario, load_scenario

# %%
text = dump_scenario(preset("iv-invalid"))
print(text[:400], "...")

# %%
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "iv.toml"
    path.write_text(text)
    print("reloaded regression:", load_scenario(path).regression)

    # %%
    # ``lab explain`` and ``lab run`` from Python; the console script takes
    # the same arguments.
    main(["explain", "--scenario", str(path)])
    out = Path(tmp) / "out"
    main(["run", "--scenario", str(path), "--reps", "200", "--out", str(out), "--no-timestamp"])
    bundle = json.loads((out / "summary.json").read_text())
    print(sorted(bundle), "->", bundle["analytic"]["slope"], bundle["decomposition"])
    print((out / "coef_hist.csv").read_text().splitlines()[:3])
