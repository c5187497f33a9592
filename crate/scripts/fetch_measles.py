#!/usr/bin/env python3
"""Fetch the weekly measles counts (North Rhine-Westphalia, 2001-2013) from
the CRAN `tscount` package and write them to data/measles.csv.

Needs network access and the `rdata` package (pip install rdata). The
SHA-256 of the written CSV is checked against data/measles.sha256 when that
file exists; run with --pin to create it after a first trusted download.
"""

import argparse
import hashlib
import io
import sys
import tarfile
import tempfile
import urllib.request
from pathlib import Path

VERSION = "1.4.3"
URLS = [
    f"https://cran.r-project.org/src/contrib/tscount_{VERSION}.tar.gz",
    f"https://cran.r-project.org/src/contrib/Archive/tscount/tscount_{VERSION}.tar.gz",
]
EXPECTED_LEN = 646

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "measles.csv"
SUM = ROOT / "data" / "measles.sha256"


def download() -> bytes:
    for url in URLS:
        try:
            with urllib.request.urlopen(url, timeout=60) as r:
                return r.read()
        except OSError as e:
            print(f"{url}: {e}", file=sys.stderr)
    sys.exit("could not download tscount")


def extract_counts(tarball: bytes) -> list[int]:
    import rdata

    with tarfile.open(fileobj=io.BytesIO(tarball)) as tar:
        member = next(m for m in tar.getmembers() if m.name.endswith("data/measles.rda"))
        raw = tar.extractfile(member).read()
    with tempfile.NamedTemporaryFile(suffix=".rda") as f:
        f.write(raw)
        f.flush()
        converted = rdata.read_rda(f.name)
    series = converted["measles"]
    values = getattr(series, "values", series)
    return [int(v) for v in list(values)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pin", action="store_true", help="record the checksum of the written file")
    args = ap.parse_args()

    counts = extract_counts(download())
    if len(counts) != EXPECTED_LEN:
        sys.exit(f"expected {EXPECTED_LEN} weeks, got {len(counts)}")
    text = "cases\n" + "".join(f"{c}\n" for c in counts)
    digest = hashlib.sha256(text.encode()).hexdigest()

    if SUM.exists():
        want = SUM.read_text().split()[0]
        if want != digest:
            sys.exit(f"checksum mismatch: got {digest}, expected {want}")
    elif args.pin:
        SUM.write_text(f"{digest}  measles.csv\n")
    else:
        print(f"warning: no pinned checksum; sha256 {digest}", file=sys.stderr)

    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(text)
    print(f"wrote {OUT} ({len(counts)} weeks, sha256 {digest})")


if __name__ == "__main__":
    main()
