"""Rate evaluation for superposition noisy network coding on relay networks."""

__version__ = "0.1.0"
