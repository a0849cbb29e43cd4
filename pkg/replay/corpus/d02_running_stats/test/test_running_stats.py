from running_stats import window_mean

assert window_mean([2.0, 4.0], 2) == 3.0
assert window_mean([], 3) == 0.0
