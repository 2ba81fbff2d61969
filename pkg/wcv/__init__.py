"""
WCV - Wild Character Variety Toolkit

Version: 1.0
Date: October 19, 2026

Exact and floating-point computations with untwisted wild character
varieties for GL_n: fission and multi-fission spaces, Stokes data,
conjugacy-class charts, and the explicit unfolding from irregular to tame
data together with seeded checks of every identity they satisfy.
"""

__version__ = "1.0"
__author__ = "Topher"
__date__ = "October 19, 2026"
