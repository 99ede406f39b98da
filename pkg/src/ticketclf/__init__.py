"""Bug vs. non-bug issue ticket classification."""
__version__ = "0.1.0"
