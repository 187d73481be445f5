"""Model, transmission, spectral analysis and regime classification."""
