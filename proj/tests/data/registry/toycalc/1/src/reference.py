import re
import sys

if len(sys.argv) != 2 or not re.fullmatch(r"\d+([+-]\d+)*", sys.argv[1]):
    print("usage: reference.py EXPR", file=sys.stderr)
    sys.exit(2)
tokens = re.findall(r"\d+|[+-]", sys.argv[1])
total = int(tokens[0])
for op, value in zip(tokens[1::2], tokens[2::2]):
    total = total + int(value) if op == "+" else total - int(value)
print(total)
