"""Monte Carlo laboratory for statistical hyperbolicity of H^n under harmonic measures."""

__version__ = "0.1.0"
