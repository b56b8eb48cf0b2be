#!/usr/bin/env python3
"""Independent recomputation of corpus statistics from per-APK reports.

Reads every *.report.json in a directory, tallies technique/category counts
and the category-count histogram, and writes a JSON document with the same
shape the scanner's aggregator emits (percent as a %.4f string).
"""
import json
import os
import sys
from collections import OrderedDict

TECHNIQUES = [
    "UTC", "US", "UTP", "PPA", "ADU", "DDF", "UBS", "ADM",
    "DI", "CB", "TM", "HC", "ERS", "SI", "CSBD", "TBCBD",
    "MVBD", "UESB", "FP", "SU", "PD", "CIH", "SC", "CIC",
    "SA", "IV", "XPOSED", "FRIDA", "CIP", "CSCE", "CBTSP", "DP",
]
CATEGORIES = ["AD", "VED", "AT", "AH", "RD"]
CATEGORY_OF = {}
for t in TECHNIQUES[:8]:
    CATEGORY_OF[t] = "AD"
for t in TECHNIQUES[8:22]:
    CATEGORY_OF[t] = "VED"
for t in TECHNIQUES[22:26]:
    CATEGORY_OF[t] = "AT"
for t in TECHNIQUES[26:28]:
    CATEGORY_OF[t] = "AH"
for t in TECHNIQUES[28:]:
    CATEGORY_OF[t] = "RD"


def main():
    report_dir, out_path = sys.argv[1], sys.argv[2]
    tech_counts = {t: 0 for t in TECHNIQUES}
    cat_counts = {c: 0 for c in CATEGORIES}
    histogram = {i: 0 for i in range(6)}
    total = 0
    for name in sorted(os.listdir(report_dir)):
        if not name.endswith(".report.json"):
            continue
        with open(os.path.join(report_dir, name)) as f:
            doc = json.load(f)
        detail = doc["detail"]
        total += 1
        cats = set()
        for entry in detail["techniques"]:
            if entry["detected"]:
                tech_counts[entry["id"]] += 1
                cats.add(CATEGORY_OF[entry["id"]])
        for c in cats:
            cat_counts[c] += 1
        histogram[len(cats)] += 1

    def percent(count):
        return "%.4f" % (0.0 if total == 0 else 100.0 * count / total)

    out = OrderedDict()
    out["total_apks"] = total
    out["techniques"] = [
        OrderedDict([("id", t), ("count", tech_counts[t]),
                     ("percent", percent(tech_counts[t]))])
        for t in TECHNIQUES
    ]
    out["categories"] = [
        OrderedDict([("id", c), ("count", cat_counts[c]),
                     ("percent", percent(cat_counts[c]))])
        for c in CATEGORIES
    ]
    out["category_count_histogram"] = OrderedDict(
        (str(i), histogram[i]) for i in range(6))
    with open(out_path, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
