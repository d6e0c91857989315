"""stabscope: stabilizer-vs-magic classification from measurement snapshots."""

__version__ = "0.1.0"
