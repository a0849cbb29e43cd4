def window(values, size):
    start = len(values) - size
    if start < 0:
        start = 0
    return values[start:]


def window_mean(values, size):
    recent = window(values, size)
    if not recent:
        return 0.0
    total = 0.0
    for value in recent:
        total += value
    return total / len(recent)
