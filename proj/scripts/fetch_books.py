#!/usr/bin/env python3
"""Fetch plain-text books listed in a CSV book list.

The harness never downloads anything itself; this optional script turns a
book list into a local corpus directory plus a manifest the CLI can ingest.

Book list format (CSV with header):
    author,title,url,role
role is known|ood_validation|ood_test.

Usage:
    python3 scripts/fetch_books.py booklist.csv corpus_dir/
Writes corpus_dir/books/*.txt and corpus_dir/manifest.csv. Strip any
non-authorial front/back matter (licensing boilerplate, prefaces, notes)
from the downloaded files before training; the tokenizer does not do that.
"""

import csv
import pathlib
import re
import sys
import urllib.request


def slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")[:60]


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    booklist = pathlib.Path(sys.argv[1])
    out_dir = pathlib.Path(sys.argv[2])
    books_dir = out_dir / "books"
    books_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    with booklist.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"author", "title", "url", "role"}
        if set(reader.fieldnames or []) != required:
            print(f"book list needs columns {sorted(required)}", file=sys.stderr)
            return 2
        for row in reader:
            rows.append(row)

    manifest_rows = []
    for i, row in enumerate(rows):
        name = f"{slug(row['author'])}__{slug(row['title'])}.txt"
        target = books_dir / name
        if target.exists():
            print(f"[{i + 1}/{len(rows)}] cached {name}")
        else:
            print(f"[{i + 1}/{len(rows)}] fetching {row['url']}")
            with urllib.request.urlopen(row["url"]) as resp:
                target.write_bytes(resp.read())
        manifest_rows.append((row["author"], row["title"], f"books/{name}", row["role"]))

    with (out_dir / "manifest.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["author", "title", "path", "role"])
        writer.writerows(manifest_rows)
    print(f"wrote {out_dir / 'manifest.csv'} ({len(manifest_rows)} books)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
