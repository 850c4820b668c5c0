"""Centerline profile records and their CSV form (shared by the simulation and the Riemann oracle)."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

HEADER = ["step", "z_index", "z_phys", "rho", "uz", "theta", "p"]


@dataclass
class Profile:
    step: int
    z_index: np.ndarray
    z_phys: np.ndarray
    rho: np.ndarray
    uz: np.ndarray
    theta: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return len(self.z_index)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_csv(profiles: Iterable[Profile], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for prof in profiles:
        for k in range(len(prof)):
            w.writerow([prof.step, int(prof.z_index[k]), _fmt(prof.z_phys[k]), _fmt(prof.rho[k]),
                        _fmt(prof.uz[k]), _fmt(prof.theta[k]), _fmt(prof.p[k])])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_csv(path: str | Path) -> list[Profile]:
    """Profiles in file order, one per distinct ``step`` value."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != HEADER:
            raise ValueError(f"unexpected profile header {reader.fieldnames}; expected {HEADER}")
        groups: dict[int, list[dict]] = {}
        for row in reader:
            groups.setdefault(int(row["step"]), []).append(row)
    out = []
    for step, rows in groups.items():
        cols = {k: np.array([float(r[k]) for r in rows]) for k in HEADER[2:]}
        out.append(Profile(step, np.array([int(r["z_index"]) for r in rows]), **cols))
    return out
