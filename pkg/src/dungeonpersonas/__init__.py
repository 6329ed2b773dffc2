"""Dungeon-crawl simulation, persona agents, playstyle labeling, and classifiers."""

__version__ = "0.1.0"
