"""Gene graph construction: node features and knowledge encodings."""
from .embed import embed_linguistic, hash_embed, load_embeddings, one_hot_features, save_embeddings, tokenize
from .encodings import (DegenerateGraphError, consistency_encoding, incidence_matrix,
                        normalize_adjacency, pathway_adjacency, phenotype_encoding)
from .graph import AssemblyError, GeneGraph, assemble_graph
from .vocab import GeneRecord, GeneVocabulary, IngestionError, MutationTable, ParseError

__all__ = [
    "GeneVocabulary", "GeneRecord", "MutationTable", "IngestionError", "ParseError",
    "embed_linguistic", "hash_embed", "tokenize", "load_embeddings", "save_embeddings",
    "one_hot_features", "phenotype_encoding", "pathway_adjacency", "incidence_matrix",
    "normalize_adjacency", "consistency_encoding", "DegenerateGraphError", "GeneGraph",
    "assemble_graph", "AssemblyError",
]
