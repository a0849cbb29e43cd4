def yearly_rate(percent):
    return percent / 100.0


def compound_total(principal, percent, years):
    rate = yearly_rate(percent)
    total = principal * (1 + rate * years)
    return round(total, 2)
