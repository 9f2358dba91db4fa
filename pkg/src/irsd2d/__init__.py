"""IRS-assisted D2D offloading: two-timescale phase design, matching and baselines."""

__version__ = "0.1.0"
