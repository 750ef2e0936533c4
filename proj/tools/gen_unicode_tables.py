#!/usr/bin/env python3
"""Regenerates include/mrcsplit/detail/unicode_tables.hpp from Python's unicodedata."""
import sys
import unicodedata


def ranges(pred):
    out, start, prev = [], None, None
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        if pred(cp):
            if start is None:
                start = cp
            prev = cp
        elif start is not None:
            out.append((start, prev))
            start = None
    if start is not None:
        out.append((start, prev))
    return out


def main(path):
    punct = ranges(lambda c: unicodedata.category(chr(c)).startswith("P"))
    space = ranges(lambda c: chr(c).isspace())
    lower = []
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        lo = chr(cp).lower()
        if len(lo) == 1 and ord(lo) != cp:
            lower.append((cp, ord(lo)))
    with open(path, "w") as f:
        f.write("// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit.\n"
                % unicodedata.unidata_version)
        f.write("#pragma once\n\n#include <array>\n#include <cstdint>\n\n")
        f.write("namespace mrcsplit::detail {\n\n")
        f.write("struct CodepointRange {\n  char32_t first;\n  char32_t last;\n};\n\n")
        f.write("struct CaseMapping {\n  char32_t from;\n  char32_t to;\n};\n\n")
        for name, rs in (("kPunctuationRanges", punct), ("kWhitespaceRanges", space)):
            f.write("inline constexpr std::array<CodepointRange, %d> %s{{\n" % (len(rs), name))
            for a, b in rs:
                f.write("    {0x%04X, 0x%04X},\n" % (a, b))
            f.write("}};\n\n")
        f.write("inline constexpr std::array<CaseMapping, %d> kLowercaseMappings{{\n" % len(lower))
        for a, b in lower:
            f.write("    {0x%04X, 0x%04X},\n" % (a, b))
        f.write("}};\n\n}  // namespace mrcsplit::detail\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/mrcsplit/detail/unicode_tables.hpp")
