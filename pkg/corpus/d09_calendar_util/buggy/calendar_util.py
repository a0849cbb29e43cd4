MONTH_DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def is_leap_year(year):
    if year % 400 == 0:
        return True
    if year % 100 == 0:
        return False
    return year % 4 == 0


def day_of_year(year, month, day):
    total = day
    for index in range(month - 1):
        total += MONTH_DAYS[index]
    if is_leap_year(year):
        total += 1
    return total
