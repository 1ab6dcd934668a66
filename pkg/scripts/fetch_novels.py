#!/usr/bin/env python3
"""Download public-domain novels for the order-comparison test.

The test tests/test_acceptance.py::test_order_trend_real_novels skips
itself unless it finds three or more plain-text novels of at least 1 MB
under tests/data/novels (or $GRAMFORGE_NOVELS_DIR). This script fills
that directory from Project Gutenberg, trimming the licensing header
and footer so only the novel text is scored. Run it on a machine with
internet access:

    python3 scripts/fetch_novels.py [destination]
"""

from __future__ import annotations

import sys
import urllib.request
from pathlib import Path

NOVELS = {
    "war-and-peace": 2600,
    "les-miserables": 135,
    "count-of-monte-cristo": 1184,
    "middlemarch": 145,
    "david-copperfield": 766,
}

MIN_BYTES = 1_000_000
START_MARK = "*** START OF"
END_MARK = "*** END OF"


def fetch(book_id: int) -> str:
    url = f"https://www.gutenberg.org/cache/epub/{book_id}/pg{book_id}.txt"
    request = urllib.request.Request(url, headers={"User-Agent": "corpus-fetch/1.0"})
    with urllib.request.urlopen(request, timeout=120) as response:
        return response.read().decode("utf-8", errors="replace")


def trim_boilerplate(text: str) -> str:
    lines = text.splitlines()
    start = 0
    end = len(lines)
    for index, line in enumerate(lines):
        if line.startswith(START_MARK):
            start = index + 1
            break
    for index in range(len(lines) - 1, -1, -1):
        if lines[index].startswith(END_MARK):
            end = index
            break
    return "\n".join(lines[start:end]).strip() + "\n"


def main() -> int:
    if len(sys.argv) > 2:
        print(__doc__, file=sys.stderr)
        return 1
    if len(sys.argv) == 2:
        destination = Path(sys.argv[1])
    else:
        destination = Path(__file__).resolve().parents[1] / "tests" / "data" / "novels"
    destination.mkdir(parents=True, exist_ok=True)

    saved = 0
    for slug, book_id in NOVELS.items():
        target = destination / f"{slug}.txt"
        if target.exists() and target.stat().st_size >= MIN_BYTES:
            print(f"already present: {target}")
            saved += 1
            continue
        print(f"fetching {slug} (book {book_id}) ...")
        try:
            text = trim_boilerplate(fetch(book_id))
        except OSError as exc:
            print(f"  failed: {exc}", file=sys.stderr)
            continue
        if len(text.encode("utf-8")) < MIN_BYTES:
            print(f"  skipped: {slug} came back under {MIN_BYTES} bytes", file=sys.stderr)
            continue
        target.write_text(text, encoding="utf-8")
        print(f"  wrote {target} ({target.stat().st_size:,} bytes)")
        saved += 1

    if saved < 3:
        print(f"only {saved} novels saved; the test needs 3", file=sys.stderr)
        return 1
    print(f"{saved} novels ready under {destination}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
