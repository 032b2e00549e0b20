"""Knowledge-enhanced multi-label gene mutation prediction from patch features."""
__version__ = "0.1.0"
