"""diarkit: speaker diarisation back-end toolkit.

Per-session autoencoder enhancement of speaker embeddings (with a
speaker/noise code split and a speech/non-speech indicator), attention
aggregation, spectral clustering, and DER scoring.
"""

__version__ = "0.1.0"
