"""Entity set expansion with Gaussian set encodings.

A seed set is encoded as a diagonal Gaussian; vocabulary terms are ranked
by how far adding them moves that Gaussian under the 2-Wasserstein metric.
"""

from .embeddings import (EmbeddingStore, SeedSet, centroid, cosine, load_embeddings, lookup,
                         resolve_seed)
from .encoder import (EncoderParams, GaussianEncoding, backward, encode_set, init_params,
                      load_params, save_params)
from .expander import GroundTruthSet, Ranking, expand, expand_centroid
from .metrics import average_precision, map_at_k
from .scoring import centroid_score, hinge_loss, score_candidate, wasserstein_sq
from .synthetic import gen_synthetic
from .trainer import TrainConfig, train, train_step
from .weak import extract_contexts, relevance, sample_pairs, weak_label

__version__ = "0.1.0"
