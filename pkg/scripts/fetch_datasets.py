#!/usr/bin/env python3
"""Download the public multi-label benchmark ARFF files into ./data.

Needs ordinary internet access; run it on a machine that has some. Each
dataset is tried against several known mirrors and written as
data/<name>.arff in the MEKA convention (labels first, -C token in the
relation name). Already-present files are kept.

Usage: python scripts/fetch_datasets.py [--data-dir DIR] [--only music,scene]
"""

import argparse
import io
import os
import sys
import urllib.request
import zipfile

MIRRORS = {
    # (name, label_count): candidate URLs, tried in order. The MEKA
    # project hosts single-file ARFFs; the Mulan distributions are zips
    # with Train/Test halves that we concatenate.
    "music": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Music.arff",
        "https://raw.githubusercontent.com/Waikato/meka/master/src/main/data/Music.arff",
    ],
    "scene": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Scene.arff",
    ],
    "yeast": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Yeast.arff",
    ],
    "genbase": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Genbase.arff",
    ],
    "medical": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Medical.arff",
    ],
    "enron": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Enron.arff",
    ],
    "reuters": [
        "https://downloads.sourceforge.net/project/meka/Datasets/Reuters-K500.arff",
    ],
}


def fetch(url, timeout=60):
    req = urllib.request.Request(url, headers={"User-Agent": "deepmlc-fetch/0.1"})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read()


def save_arff_bytes(blob, dest):
    if blob[:2] == b"PK":  # zip archive: concatenate the contained ARFFs
        with zipfile.ZipFile(io.BytesIO(blob)) as zf:
            names = [n for n in zf.namelist() if n.lower().endswith(".arff")]
            if not names:
                raise ValueError("zip has no .arff members")
            blob = b"\n".join(zf.read(n) for n in sorted(names))
    with open(dest, "wb") as fh:
        fh.write(blob)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--only", help="comma-separated dataset names")
    args = ap.parse_args()
    wanted = set(args.only.lower().split(",")) if args.only else set(MIRRORS)
    os.makedirs(args.data_dir, exist_ok=True)
    failures = []
    for name, urls in MIRRORS.items():
        if name not in wanted:
            continue
        dest = os.path.join(args.data_dir, f"{name}.arff")
        if os.path.exists(dest):
            print(f"{name}: already present, skipping")
            continue
        ok = False
        for url in urls:
            try:
                print(f"{name}: fetching {url}")
                save_arff_bytes(fetch(url), dest)
                ok = True
                break
            except Exception as exc:  # noqa: BLE001 - report and try next mirror
                print(f"{name}: {type(exc).__name__}: {exc}")
        if not ok:
            failures.append(name)
    if failures:
        print(f"failed to fetch: {', '.join(failures)}; place the files in "
              f"{args.data_dir}/ manually (MEKA-convention ARFF, labels first)")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
