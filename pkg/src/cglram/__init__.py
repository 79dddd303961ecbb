"""Low-rank compression of matrix collections: GLRAM, K-means, and clustered GLRAM."""
from .baselines import kmeans_glram, storage_count, svd_baseline
from .bench import reduction_ratio_to_rank, run_compare
from .cluster import (CglramConfig, ClusterModel, assign_clusters, cglram_fit,
                      generalized_distance_sq, wcssre)
from .dataio import SynthSpec, load_idx_images, load_stack, save_stack, synth_generate
from .glram import (IterationConfig, MatrixStack, ProjectorPair, glram_fit, glram_init,
                    reconstruct, rmsre)
from .kmeans import kmeans_fit, variance_decomposition
from .linalg import frobenius_norm, full_svd, top_k_eigs_sym, tsvd_error

__version__ = "0.1.0"
