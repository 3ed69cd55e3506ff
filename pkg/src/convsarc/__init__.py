"""Context-aware sarcasm detection over (conversation context, reply) pairs.

Library layout: nn (numerical core), embeddings, data (corpus pipeline),
features (discrete features + SVM baseline), models (LSTM variants with
attention), evaluate (metrics, overlap, heatmaps), cli (pipeline driver).
"""

__version__ = "0.1.0"
