"""vldg-extractor: batch feature export for dataset domain-gap analysis.

Reads a dataset manifest (JSONL records pointing at images and carrying
captions, questions, or hypotheses), runs a ResNet image encoder or a
BERT text encoder over it, and writes the vectors to a VLDG embedding
file that downstream analyzers load.
"""

__version__ = "0.1.0"
