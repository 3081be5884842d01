"""Traces and extensions between a sampled domain and its boundary.

Modules: ``space`` (metric measure samples), ``domain`` (preset domains),
``whitney`` (cover and partition of unity), ``chains`` (uniform curves and
ball chains), ``besov`` (seminorms and gradient surrogate),
``trace_extension`` (operators and audits) and ``cli``.
"""
__version__ = "0.1.0"
