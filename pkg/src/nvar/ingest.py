"""Real-data pipeline: long-format records to a complete observation panel.

Daily records are bucketed by calendar month (year, month of the date; no
timezone handling), each cell keeping that month's maximum. The panel is
then the site subset and contiguous month window with no missing cells
that maximizes sites x months.
"""

from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NoCompleteCellError, TooShortError, UnparseableRecordError
from .model import SeriesPanel


@dataclass(frozen=True)
class ObservationRecord:
    site_id: str
    date: datetime.date
    value: float


@dataclass(frozen=True)
class RaggedMonthlyGrid:
    """Sites x contiguous months with NaN marking unobserved cells."""

    site_ids: tuple[str, ...]
    first_month: int  # months since year 0: year * 12 + (month - 1)
    values: np.ndarray

    @property
    def n_months(self) -> int:
        return self.values.shape[1]

    def month_label(self, k: int) -> str:
        m = self.first_month + k
        return f"{m // 12:04d}-{m % 12 + 1:02d}"


def load_records(path, lenient: bool = False) -> list[ObservationRecord]:
    """Read a CSV with header site_id,date,value; dates are ISO YYYY-MM-DD.

    Bad rows raise UnparseableRecordError with their line number unless
    lenient is set, in which case they are skipped.
    """
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["site_id", "date", "value"]:
            raise UnparseableRecordError(f"{path}: expected header site_id,date,value")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                if len(row) < 3:
                    raise ValueError("expected 3 fields")
                site = row[0].strip()
                date = datetime.date.fromisoformat(row[1].strip())
                value = float(row[2])
                if not np.isfinite(value):
                    raise ValueError("value must be finite")
            except ValueError as exc:
                if lenient:
                    continue
                raise UnparseableRecordError(f"{path}:{lineno}: {exc}") from exc
            records.append(ObservationRecord(site, date, value))
    return records


def monthly_max_aggregate(records: Sequence[ObservationRecord]) -> RaggedMonthlyGrid:
    """cell(site, month) = max of the site's values in that calendar month."""
    if not records:
        raise ValueError("no records")
    months = [r.date.year * 12 + (r.date.month - 1) for r in records]
    first, last = min(months), max(months)
    site_ids = tuple(sorted({r.site_id for r in records}))
    site_index = {s: i for i, s in enumerate(site_ids)}
    values = np.full((len(site_ids), last - first + 1), np.nan)
    for rec, m in zip(records, months):
        i, j = site_index[rec.site_id], m - first
        cur = values[i, j]
        values[i, j] = rec.value if np.isnan(cur) else max(cur, rec.value)
    return RaggedMonthlyGrid(site_ids=site_ids, first_month=first, values=values)


def select_complete_submatrix(grid: RaggedMonthlyGrid) -> tuple[tuple[str, ...], tuple[int, int]]:
    """Best (site subset, contiguous month window) with no missing cells.

    Scans every window [a, b], takes the sites fully observed on it, and
    maximizes p * n. Ties break toward the longer window, then the earlier
    start, then the lexicographically smaller site set.
    """
    observed = ~np.isnan(grid.values)
    n_sites, t = observed.shape
    # prefix[i, b] = number of observed cells of site i in months [0, b)
    prefix = np.zeros((n_sites, t + 1), dtype=int)
    prefix[:, 1:] = np.cumsum(observed, axis=1)
    best = None  # (score, n, -a, site tuple negated for lexicographic min) handled manually
    best_key = None
    for a in range(t):
        for b in range(a, t):
            length = b - a + 1
            complete = prefix[:, b + 1] - prefix[:, a] == length
            count = int(complete.sum())
            if count == 0:
                continue
            score = count * length
            sites = tuple(grid.site_ids[i] for i in np.flatnonzero(complete))
            key = (score, length, -a, tuple(-ord(c) for s in sites for c in s + "\0"))
            # Lexicographically smaller site set must win ties: invert for max-compare.
            if best_key is None or key > best_key:
                best = (sites, (a, b))
                best_key = key
    if best is None:
        raise NoCompleteCellError("no site is fully observed on any month window")
    return best


def grid_to_panel(grid: RaggedMonthlyGrid, sites: Sequence[str], window: tuple[int, int]) -> SeriesPanel:
    a, b = window
    idx = [grid.site_ids.index(s) for s in sites]
    values = grid.values[idx, a:b + 1]
    if np.any(np.isnan(values)):
        raise NoCompleteCellError("selected submatrix contains missing cells")
    return SeriesPanel(values=values, ids=tuple(sites))


def split_train_test(panel: SeriesPanel, fraction: float) -> tuple[SeriesPanel, SeriesPanel]:
    """First floor(fraction * n) columns vs the remainder; temporal order kept."""
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    cut = int(fraction * panel.n)
    if cut < 1 or cut >= panel.n:
        raise TooShortError(f"cannot split {panel.n} columns at fraction {fraction}")
    ids = panel.ids
    return (SeriesPanel(values=panel.values[:, :cut], ids=ids),
            SeriesPanel(values=panel.values[:, cut:], ids=ids))


def center_series(panel: SeriesPanel) -> tuple[SeriesPanel, np.ndarray]:
    """Subtract per-series means; returns the centered panel and the means."""
    means = panel.values.mean(axis=1)
    centered = panel.values - means[:, None]
    return SeriesPanel(values=centered, ids=panel.ids), means
