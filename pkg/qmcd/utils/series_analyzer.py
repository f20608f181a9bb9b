"""
Series grouping utilities for sweep results
Groups aggregated cells into plot panels and series and builds their labels
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

if TYPE_CHECKING:
    from qmcd.models.experiment import AggregatedCell


class SeriesAnalyzer:
    """Groups aggregated sweep cells for plotting and slope tables."""

    # Line colors per sampler, in legend order
    SAMPLER_COLORS = {
        'MC': '#1f77b4',
        'RQMC-halton': '#2ca02c',
        'RQMC-sobol': '#ff7f0e',
        'RQMC-lattice': '#9467bd',
    }
    FALLBACK_COLORS = ['#d62728', '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf']

    @classmethod
    def panel_key(cls, cell: AggregatedCell) -> Tuple[str, int]:
        return (cell.generator, cell.d)

    @classmethod
    def panel_slug(cls, generator: str, d: int) -> str:
        """File-name friendly panel id, e.g. 'uniform_d1'."""
        return f"{generator}_d{d}"

    @classmethod
    def series_label(cls, cell: AggregatedCell, full: bool = False) -> str:
        label = f"{cell.sampler} {cell.discrepancy}"
        if full:
            return f"{cell.generator} d={cell.d} {label}"
        return label

    @classmethod
    def group_panels(cls, cells: Sequence[AggregatedCell]) -> Dict[Tuple[str, int], List[AggregatedCell]]:
        """
        Split cells into (generator, d) panels, keeping first-appearance order.

        Args:
            cells: Aggregated cells from any number of panels

        Returns:
            Dictionary mapping (generator, d) to that panel's cells
        """
        panels: Dict[Tuple[str, int], List[AggregatedCell]] = {}
        for cell in cells:
            panels.setdefault(cls.panel_key(cell), []).append(cell)
        return panels

    @classmethod
    def group_series(cls, cells: Sequence[AggregatedCell], full: Optional[bool] = None) -> Dict[str, List[AggregatedCell]]:
        """
        Group cells into series sorted by n.

        Labels include the panel when `full` is set, or automatically when cells span several panels.
        """
        if full is None:
            full = len(cls.group_panels(cells)) > 1
        series: Dict[str, List[AggregatedCell]] = {}
        for cell in cells:
            series.setdefault(cls.series_label(cell, full), []).append(cell)
        return {label: sorted(group, key=lambda c: c.n) for label, group in series.items()}

    @classmethod
    def series_color(cls, cells: Sequence[AggregatedCell], index: int) -> str:
        sampler = cells[0].sampler if cells else ''
        if sampler in cls.SAMPLER_COLORS:
            return cls.SAMPLER_COLORS[sampler]
        return cls.FALLBACK_COLORS[index % len(cls.FALLBACK_COLORS)]
