#!/usr/bin/env python3
"""Writes the bundled sample series used by `policy normalize`.

The loan stock is monthly and rises linearly; the average maturity is
quarterly and falls linearly. Both are centred on the same date, so the
median stock (1357) and median maturity (17.58 months) line up with the
median of the implied annual flow (1357 * 12 / 17.58 = 926.28).

A fetch of the real series from the FRED export endpoint would produce
files of the same layout; it is deliberately not part of the tested path.
"""

from datetime import date
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "series"


def months(start: date, n: int, step: int):
    y, m = start.year, start.month
    for _ in range(n):
        yield date(y, m, 1)
        m += step
        while m > 12:
            m -= 12
            y += 1


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    stock = OUT / "busloans_sample.csv"
    with stock.open("w", newline="\n") as f:
        f.write("DATE,VALUE\n")
        for i, d in enumerate(months(date(2014, 1, 1), 97, 1)):
            f.write(f"{d.isoformat()},{1357 + 3.25 * (i - 48):.2f}\n")
    maturity = OUT / "edanq_sample.csv"
    with maturity.open("w", newline="\n") as f:
        f.write("DATE,VALUE\n")
        for j, d in enumerate(months(date(2014, 1, 1), 33, 3)):
            f.write(f"{d.isoformat()},{17.58 - 0.06 * (j - 16):.2f}\n")


if __name__ == "__main__":
    main()
