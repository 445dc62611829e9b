"""
Phased fuzzing versus whole-program fuzzing on DeptGPAs
=======================================================
"""

# %%
from dataclasses import replace

from skewfuzz import config
from skewfuzz.fuzzer import Budget, run_baseline, run_phased

cc = config.load(config.shipped("deptgpas"))
campaign = cc.campaign()

# %%
# Fuzz the grouping UDF directly, then lift the winner into CSV lines.
ph = run_phased(campaign)
print("phased:", ph.triggered, ph.udf.iterations, "udf iterations,", ph.program.iterations, "program iterations")
print("udf score", ph.udf.best_score, "program score", ph.program.final_score)

# %%
# The baseline only edits whole input lines and rarely moves the ratio.
base = run_baseline(replace(campaign, budget=Budget(1000, 120)))
print("baseline:", base.triggered, "best ratio", base.best_score, "after", base.iterations)

# %%
series = ph.udf.score_series
print(series[:5], "...", series[-1])
