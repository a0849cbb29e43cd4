def split_words(text):
    words = []
    for chunk in text.split(" "):
        if chunk:
            words.append(chunk)
    return words


def wrap_line(text, width):
    words = split_words(text)
    lines = []
    current = ""
    for word in words:
        if current:
            candidate = current + " " + word
        else:
            candidate = word
        if len(candidate) > width:
            lines.append(current)
            current = word
        else:
            current = candidate
    if current:
        lines.append(current)
    return lines
