"""
Symptom monitors over per-partition metric vectors
==================================================
"""

# %%
from skewfuzz.monitors import IQROutlier, MaximumThreshold, NextComparison, Skewness

print(MaximumThreshold(100).evaluate([120, 11, 9]))
print(NextComparison(5.0).evaluate([10, 2, 2, 2]))
print(Skewness(2.0).evaluate([7, 7, 7, 7]))

# %%
# A flat bulk with one straggler gives an infinite IQR score.
print(IQROutlier(100).evaluate([0, 0, 0, 0, 0, 0, 0, 40]))

# %%
# With only four values the interpolated upper quartile leans on the max,
# which caps the score at 3 no matter how large the straggler is.
for top in (10, 1_000, 1_000_000):
    print(top, IQROutlier(100).score([0, 0, 0, top]))
