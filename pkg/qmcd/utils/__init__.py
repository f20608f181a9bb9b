# Utils package
from .seeding import array_sha256, derive_seed, philox
from .series_analyzer import SeriesAnalyzer

__all__ = ['SeriesAnalyzer', 'array_sha256', 'derive_seed', 'philox']
