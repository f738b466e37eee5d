"""Static privacy auditing for VR Android apps."""

__version__ = "0.1.0"
