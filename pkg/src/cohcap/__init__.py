"""Toolkit for coherence relations between images and captions.

Covers the full loop: annotate image-caption pairs with discourse
coherence relations, compute corpus statistics and agreement, train
relation classifiers over fused text/image features, and generate
captions conditioned on a requested relation.
"""

__version__ = "0.1.0"
