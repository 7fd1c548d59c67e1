"""Entropy production of the driven-dissipative Kerr resonator under pump quenches."""

__version__ = "0.1.0"
