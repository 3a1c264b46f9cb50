"""styleforge: forge stylized vision-language datasets.

Converts a source corpus of (image, annotation) records into stylized
variants (cartoon, pencil, oil painting) through a multimodal LLM and a
text-to-image generator, re-annotates labels with verification gates,
assembles dataset manifests, and measures inter-domain gaps with MMD.
"""

__version__ = "0.1.0"
