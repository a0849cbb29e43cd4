from table_format import format_row

assert format_row(["wide"], 4) == "wide"
assert format_row(["ab", "c"], 4) == "ab  |c   "
