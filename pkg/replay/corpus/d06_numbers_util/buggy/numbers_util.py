def gcd_pair(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return b


def lcm_pair(a, b):
    if a == 0 or b == 0:
        return 0
    return abs(a * b) // gcd_pair(a, b)
