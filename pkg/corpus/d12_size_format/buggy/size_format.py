UNITS = ["B", "KB", "MB", "GB"]


def format_size(count):
    value = float(count)
    index = 0
    while value > 1024 and index < len(UNITS) - 1:
        value /= 1024.0
        index += 1
    if value == int(value):
        text = str(int(value))
    else:
        text = "%.1f" % value
    return text + " " + UNITS[index]
