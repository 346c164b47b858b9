"""
LabelMap - Supervised Nonlinear Mapping
Embed labeled dissimilarity data in 2-D so that distortions become tears
between classes and false neighborhoods within classes.
"""

__version__ = '1.0.0'
