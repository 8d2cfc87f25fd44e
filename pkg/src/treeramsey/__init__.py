"""Regular embeddings, signature families and random split colourings of binary trees."""

from .coloring import (
    Coloring,
    Rng,
    block_coloring,
    find_mono_replica,
    find_t2free_coloring,
    martingale_trace,
    mc_lemma6,
    random_fit_branch,
    random_split_coloring,
)
from .density import arithmetic_replica, binary_entropy, chernoff_check, inv_entropy, longest_ap, restrict_replica
from .signatures import (
    EmbeddingWitness,
    SignatureFamily,
    contains_replica,
    extract_replica,
    max_replica_depth,
    signature_set,
    theorem1_check,
    validate_embedding,
)
from .tree import DyadicWeight, ResourceLimitError, TreeSubset, set_weight

__all__ = [name for name in dir() if not name.startswith("_")]
