"""Peak localization of separable unimodal fields from sparse samples."""

__version__ = "0.1.0"
