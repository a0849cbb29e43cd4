UNIT_SECONDS = {"s": 1, "m": 60, "h": 3600}


def split_amount(token):
    digits = ""
    for ch in token:
        if ch.isdigit():
            digits += ch
        else:
            break
    return digits, token[len(digits):]


def parse_duration(token):
    digits, unit = split_amount(token)
    amount = int(digits)
    if not unit:
        unit = "s"
    return amount * UNIT_SECONDS[unit]
