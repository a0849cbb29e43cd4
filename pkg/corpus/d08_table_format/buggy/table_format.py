def pad_cell(text, width):
    missing = width - len(text)
    if missing <= 0:
        return text
    return " " * missing + text


def format_row(cells, width):
    padded = []
    for cell in cells:
        padded.append(pad_cell(cell, width))
    return "|".join(padded)
