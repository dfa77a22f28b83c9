"""Image-acquisition planning for an agile Earth-observation satellite."""

__version__ = "0.1.0"
