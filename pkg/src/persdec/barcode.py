"""Barcodes: multisets of birth-death intervals over integer grades.

A bar (birth, death, mult) is alive at grade g when birth <= g < death; a
death of None means the class never vanishes.  Bars are stored merged and
sorted by (birth, death) with open-ended bars last, so equal multisets have
equal representations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

Bar = Tuple[int, Optional[int], int]  # (birth, death or None, multiplicity)


def _bar_key(bar: Bar):
    birth, death, _ = bar
    return (birth, death is None, death if death is not None else 0)


@dataclass(frozen=True)
class Barcode:
    """Canonical multiset of bars, tagged with the coefficient label."""

    bars: Tuple[Bar, ...]
    coeff: str = "Z"

    def __post_init__(self):
        merged: dict[Tuple[int, Optional[int]], int] = {}
        for birth, death, mult in self.bars:
            if mult < 1:
                raise ValueError(f"bar multiplicity must be >= 1, got {mult}")
            if death is not None and death <= birth:
                raise ValueError(f"bar [{birth}, {death}) is empty")
            merged[(birth, death)] = merged.get((birth, death), 0) + mult
        canon = tuple(sorted(((b, d, m) for (b, d), m in merged.items()), key=_bar_key))
        object.__setattr__(self, "bars", canon)

    @classmethod
    def empty(cls, coeff: str = "Z") -> "Barcode":
        return cls((), coeff)

    def total_at(self, grade: int) -> int:
        """Number of bars (with multiplicity) alive at the given grade."""
        return sum(m for b, d, m in self.bars if b <= grade and (d is None or grade < d))

    def same_bars(self, other: "Barcode") -> bool:
        """Multiset equality of the intervals, ignoring the coefficient tag."""
        return self.bars == other.bars

    def __iter__(self):
        return iter(self.bars)

    def __len__(self):
        return sum(m for _, _, m in self.bars)

    def to_json(self) -> dict:
        return {"coeff": self.coeff,
                "bars": [{"birth": b, "death": d, "mult": m} for b, d, m in self.bars]}

    @classmethod
    def from_json(cls, obj: dict) -> "Barcode":
        bars = tuple((int(bar["birth"]),
                      None if bar["death"] is None else int(bar["death"]),
                      int(bar["mult"])) for bar in obj["bars"])
        return cls(bars, str(obj.get("coeff", "Z")))

    @classmethod
    def of(cls, bars: Iterable[Tuple[int, Optional[int]]], coeff: str = "Z") -> "Barcode":
        """Barcode from an iterable of (birth, death) pairs, multiplicity 1 each."""
        return cls(tuple((b, d, 1) for b, d in bars), coeff)
