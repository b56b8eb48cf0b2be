"""Shared escaping for oracle dump output.

Lines must match the scanner's test-side dumps byte for byte, so the escape
rules mirror them exactly: backslash, tab, newline, and any byte outside
0x20..0x7e become escape sequences.
"""


def escape(data):
    if isinstance(data, str):
        data = data.encode("utf-8", "surrogateescape")
    out = []
    for b in data:
        if b == 0x5C:
            out.append("\\\\")
        elif b == 0x09:
            out.append("\\t")
        elif b == 0x0A:
            out.append("\\n")
        elif b < 0x20 or b > 0x7E:
            out.append("\\x%02x" % b)
        else:
            out.append(chr(b))
    return "".join(out)
