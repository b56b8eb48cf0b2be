#!/usr/bin/env python3
"""Reference ZIP listing via the Python standard library.

Prints one "entry\t<path>\t<size>" line per archive member, sorted.
"""
import sys
import zipfile

from common import escape


def main():
    path = sys.argv[1]
    lines = []
    with zipfile.ZipFile(path) as z:
        for info in z.infolist():
            lines.append("entry\t%s\t%d" % (escape(info.filename), info.file_size))
    for line in sorted(lines):
        print(line)


if __name__ == "__main__":
    main()
