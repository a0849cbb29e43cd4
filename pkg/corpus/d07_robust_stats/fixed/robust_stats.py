def running_median(values, size):
    medians = []
    for i in range(len(values)):
        start = i - size + 1
        if start < 0:
            start = 0
        window = list(values[start:i + 1])
        window.sort()
        mid = len(window) // 2
        if len(window) % 2 == 1:
            medians.append(window[mid])
        else:
            medians.append((window[mid - 1] + window[mid]) / 2.0)
    return medians
