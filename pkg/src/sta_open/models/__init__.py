from . import atom, oscillator, tls

__all__ = ["atom", "oscillator", "tls"]
