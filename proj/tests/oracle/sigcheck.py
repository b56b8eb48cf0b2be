#!/usr/bin/env python3
"""Independent APK signing-scheme presence check.

Prints "V1" and/or "V2PLUS", one per line. V1 means a META-INF certificate
entry exists; V2PLUS means a structurally consistent signing block with the
"APK Sig Block 42" magic sits immediately before the central directory.
"""
import struct
import sys
import zipfile

MAGIC = b"APK Sig Block 42"


def find_cd_offset(data):
    # scan backwards for the EOCD signature
    for i in range(len(data) - 22, -1, -1):
        if data[i:i + 4] != b"PK\x05\x06":
            continue
        cd_offset = struct.unpack_from("<I", data, i + 16)[0]
        comment_len = struct.unpack_from("<H", data, i + 20)[0]
        if i + 22 + comment_len <= len(data):
            return cd_offset
    return None


def main():
    path = sys.argv[1]
    with open(path, "rb") as f:
        data = f.read()
    schemes = set()
    with zipfile.ZipFile(path) as z:
        for name in z.namelist():
            if name.startswith("META-INF/") and \
                    name.rsplit(".", 1)[-1].lower() in ("rsa", "dsa", "ec"):
                schemes.add("V1")
    cd = find_cd_offset(data)
    if cd is not None and cd >= len(MAGIC) + 24:
        if data[cd - len(MAGIC):cd] == MAGIC:
            (size_footer,) = struct.unpack_from("<Q", data, cd - 24)
            start = cd - size_footer - 8
            if size_footer >= 24 and start >= 0:
                (size_header,) = struct.unpack_from("<Q", data, start)
                if size_header == size_footer:
                    schemes.add("V2PLUS")
    for s in sorted(schemes):
        print(s)


if __name__ == "__main__":
    main()
