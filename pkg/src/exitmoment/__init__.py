"""Exit-time moment bounds for SDEs via occupation-measure SDP relaxations."""

__version__ = "0.1.0"
