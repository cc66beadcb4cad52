"""Tabular sweep results with deterministic CSV serialization.

All floats are written with 12 significant digits in scientific notation so
identical runs produce byte-identical files on any platform.  Complex columns
are split into ``<name>_re`` / ``<name>_im`` pairs on write.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FLOAT_FORMAT = "{:.11e}"


def format_float(x: float) -> str:
    return FLOAT_FORMAT.format(float(x))


@dataclass
class SweepResult:
    """Column-labelled series produced by a frequency/power/parameter sweep."""

    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {name: len(np.atleast_1d(col)) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"column length mismatch: {lengths}")
        self.columns = {name: np.atleast_1d(np.asarray(col)) for name, col in self.columns.items()}

    def __len__(self) -> int:
        return 0 if not self.columns else len(next(iter(self.columns.values())))

    def header(self) -> list[str]:
        names = []
        for name, col in self.columns.items():
            if np.iscomplexobj(col):
                names.extend([f"{name}_re", f"{name}_im"])
            else:
                names.append(name)
        return names

    def rows(self):
        cols = []
        for col in self.columns.values():
            if np.iscomplexobj(col):
                cols.extend([col.real, col.imag])
            else:
                cols.append(col)
        for i in range(len(self)):
            yield [format_float(c[i]) for c in cols]

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        lines.extend(",".join(row) for row in self.rows())
        return "\n".join(lines) + "\n"

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv_text(cls, text: str) -> "SweepResult":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty CSV")
        names = lines[0].split(",")
        data = [[] for _ in names]
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != len(names):
                raise ValueError(f"row width {len(parts)} != header width {len(names)}")
            for slot, part in zip(data, parts):
                slot.append(float(part))
        return cls(columns={n: np.asarray(v) for n, v in zip(names, data)})

    @classmethod
    def load_csv(cls, path) -> "SweepResult":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_csv_text(fh.read())
