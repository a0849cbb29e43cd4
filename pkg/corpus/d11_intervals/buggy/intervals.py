def overlaps(a_start, a_end, b_start, b_end):
    return a_start < b_end and b_start < a_end


def merge(intervals):
    merged = []
    for start, end in sorted(intervals):
        if merged and overlaps(merged[-1][0], merged[-1][1], start, end):
            last = merged[-1]
            merged[-1] = (last[0], max(last[1], end))
        else:
            merged.append((start, end))
    return merged
