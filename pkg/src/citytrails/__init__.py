"""Stigmergic trail analysis of urban activity data.

Evaporating mark/trail aggregation turns raw spatiotemporal samples into
short-term memories that can be thresholded (hotspot discovery), compared
(receptive fields, perceptron activity levels), and scored for divergence
from typical behavior (anomaly indices), with differential evolution doing
all parameter calibration.
"""

__version__ = "0.1.0"
