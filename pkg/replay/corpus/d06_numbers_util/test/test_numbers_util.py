from numbers_util import gcd_pair

assert gcd_pair(12, 18) == 6
assert gcd_pair(7, 3) == 1
