from robust_stats import running_median

assert running_median([3, 1, 2], 3) == [3, 2.0, 2]
