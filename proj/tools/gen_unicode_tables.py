#!/usr/bin/env python3
"""Regenerates src/unicode_supercat.inc from the Python unicodedata UCD.

Supercategory mapping over Unicode general categories:
  L*, M* -> LM    P*, S* -> PS    N* -> N    Z* -> Z    C* / unassigned -> C
"""

import sys
import unicodedata

CLASS = {"L": "LM", "M": "LM", "P": "PS", "S": "PS", "N": "N", "Z": "Z", "C": "C"}
CODE = {"LM": 0, "PS": 1, "N": 2, "Z": 3, "C": 4}


def supercat(cp: int) -> str:
    return CLASS[unicodedata.category(chr(cp))[0]]


def main() -> None:
    out = sys.argv[1] if len(sys.argv) > 1 else "src/unicode_supercat.inc"
    ranges = []  # (lo, hi, class) for non-C runs; C is the default
    lo = 0
    cur = supercat(0)
    for cp in range(1, 0x110000):
        c = supercat(cp)
        if c != cur:
            if cur != "C":
                ranges.append((lo, cp - 1, cur))
            lo, cur = cp, c
    if cur != "C":
        ranges.append((lo, 0x10FFFF, cur))

    with open(out, "w") as f:
        f.write("// Generated by tools/gen_unicode_tables.py (UCD %s). Do not edit.\n"
                % unicodedata.unidata_version)
        f.write("// Packed (lo, hi, supercategory) runs; codepoints not covered are C.\n")
        f.write("inline constexpr SupercatRange kSupercatRanges[] = {\n")
        for lo, hi, c in ranges:
            f.write("    {0x%X, 0x%X, %d},\n" % (lo, hi, CODE[c]))
        f.write("};\n")
        f.write("inline constexpr size_t kSupercatRangeCount = %d;\n" % len(ranges))
    print("wrote %s: %d ranges" % (out, len(ranges)), file=sys.stderr)


if __name__ == "__main__":
    main()
