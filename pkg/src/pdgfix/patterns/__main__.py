import sys

from . import build

for path in build(*sys.argv[1:2]):
    print(f"wrote {path}")
