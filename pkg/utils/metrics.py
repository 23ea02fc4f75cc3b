# Directory: parallel-ist/utils/metrics.py
"""
Metrics Collection Service - Tracks phase timings of benchmark runs
Aggregates repeats into mean, stddev and speedup rows for CSV and table output
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from models.bench_models import CSV_COLUMNS, PhaseTiming, RunSpec
from parallel_ist.errors import BenchPhaseError

logger = logging.getLogger(__name__)

PHASE_ORDER = ("prefill", "prepare", "execute")


class MetricsCollector:
    """Collects per-repeat phase durations keyed by (impl, threads, phase)"""

    def __init__(self):
        self.samples: Dict[Tuple[str, int, str], List[float]] = {}

    def store_phase(self, impl: str, threads: int, phase: str, duration: float) -> None:
        """
        Store one timed repeat of a phase

        Args:
            impl: Implementation name
            threads: Worker budget used
            phase: Phase name
            duration: Wall-clock seconds
        """
        self.samples.setdefault((impl, threads, phase), []).append(duration)
        logger.debug(f"{impl} threads={threads} {phase}: {duration:.6f}s")

    @contextmanager
    def timed(self, impl: str, threads: int, phase: str, empty: bool = False) -> Iterator[None]:
        """
        Time the enclosed block as one repeat; failures become BenchPhaseError.

        A phase with no work (empty=True) is recorded as 0.0 seconds.
        """
        start = time.perf_counter()
        try:
            yield
        except BenchPhaseError:
            raise
        except Exception as e:
            logger.error(f"Phase {phase} of {impl} (threads={threads}) failed: {str(e)}")
            raise BenchPhaseError(phase, e) from e
        self.store_phase(impl, threads, phase, 0.0 if empty else time.perf_counter() - start)

    def _mean(self, impl: str, threads: int, phase: str) -> Optional[float]:
        durations = self.samples.get((impl, threads, phase))
        return float(np.mean(durations)) if durations else None

    def get_rows(self, spec: RunSpec) -> List[PhaseTiming]:
        """
        Aggregate samples into report rows

        Speedup is the 1-thread mean of the same implementation and phase
        divided by this row's mean; it is 1.0 when either mean is zero.
        """
        rows: List[PhaseTiming] = []
        for (impl, threads, phase), durations in sorted(
            self.samples.items(), key=lambda item: (item[0][0] != "ist", item[0][0], item[0][1], PHASE_ORDER.index(item[0][2]))
        ):
            mean = float(np.mean(durations))
            baseline = self._mean(impl, 1, phase)
            speedup = baseline / mean if baseline and mean > 0 else 1.0
            rows.append(PhaseTiming(
                impl=impl,
                n=spec.n,
                batch_size=spec.batch_size,
                threads=threads,
                alpha=spec.alpha,
                seed=spec.seed,
                phase=phase,
                mean_s=mean,
                stddev_s=float(np.std(durations)),
                speedup=speedup,
            ))
        return rows


def rows_to_frame(rows: List[PhaseTiming]) -> pd.DataFrame:
    """DataFrame with the fixed CSV column order"""
    return pd.DataFrame([row.model_dump() for row in rows], columns=CSV_COLUMNS)


def write_csv(rows: List[PhaseTiming], out=None) -> str:
    """
    Render rows as CSV with the fixed header

    Args:
        rows: Report rows
        out: Optional path or file object to write to

    Returns:
        The CSV text
    """
    text = rows_to_frame(rows).to_csv(index=False, float_format="%.6f", lineterminator="\n")
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", encoding="utf-8") as handle:
                handle.write(text)
    return text


def render_table(rows: List[PhaseTiming], console: Optional[Console] = None, title: str = "IST benchmark") -> Table:
    """Print rows as a rich table and return it"""
    table = Table(title=title)
    for column in CSV_COLUMNS:
        table.add_column(column, justify="left" if column in ("impl", "phase") else "right")
    for row in rows:
        values = row.model_dump()
        table.add_row(*[
            f"{values[column]:.6f}" if column in ("mean_s", "stddev_s") else
            f"{values[column]:.2f}" if column == "speedup" else str(values[column])
            for column in CSV_COLUMNS
        ])
    (console or Console()).print(table)
    return table
