"""Numerical toolkit for quasilinear Cauchy problems that change type.

The package is organized around one storyline: decide where a first order
system is non-hyperbolic (symbol), watch the predicted frequency-scaled
amplification in filtered spectral runs (spectral_vdw, kirchhoff), build
the oscillatory data and scaling schedule that turn pointwise ellipticity
into a quantitative instability (instability), certify the underlying
profile construction with majorant norms (majorant), and test analyticity
of data directly with Gaussian-phase integrals (fbi).  A small CLI (cli)
exposes reproducible runs of each piece.

Submodules are imported explicitly, scipy-style:

    from cauchylab import symbol
    sp = symbol.spectrum_classify(M)
"""

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "symbol",
    "spectral_vdw",
    "kirchhoff",
    "instability",
    "majorant",
    "fbi",
    "cli",
]
