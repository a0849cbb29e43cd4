def clamp(value, low, high):
    if value < low:
        return high
    if value > high:
        return high
    return value


def clamp_all(values, low, high):
    clamped = []
    for value in values:
        clamped.append(clamp(value, low, high))
    return clamped
