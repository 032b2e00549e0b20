"""Gene encoder + label decoder assembled into one trainable model."""
from __future__ import annotations

import numpy as np

from ..genegraph import (GeneGraph, assemble_graph, consistency_encoding, embed_linguistic,
                         normalize_adjacency, one_hot_features, pathway_adjacency)
from ..geneencoder import gene_priors, kam_param_spec, kam_params_from, KAMParams
from ..labeldecoder import (decode, decoder_param_spec, decoder_params_from, matrix_fusion,
                            matrix_fusion_spec)
from ..numkernel import ParameterSet, Tensor, no_grad, param_seed, xavier_init
from ..objective import LabeledLogits, bce_loss, comparative_loss


def build_graph(dataset, cfg, train_idx=None):
    """Gene graph under ``cfg.encodings``; consistency uses training slides only.

    Disabled encodings become zeros; without linguistic features the genes
    get one-hot initial features.
    """
    vocab, enc = dataset.vocab, set(cfg.encodings)
    K = vocab.K
    if "linguistic" in enc:
        G = embed_linguistic(dataset.records, cfg.embedder, cfg.d, seed=0)
    else:
        G = one_hot_features(K, cfg.d)
    delta = dataset.delta if "phenotype" in enc else np.zeros((K, vocab.C))
    if "pathway" in enc:
        E_adj = normalize_adjacency(pathway_adjacency(dataset.pathways, vocab))
    else:
        E_adj = np.zeros((K, K))
    if "consistency" in enc:
        table = dataset.table if train_idx is None else dataset.table.subset(train_idx)
        E_con = consistency_encoding(table, cfg.con_threshold, cfg.con_mode, cfg.con_truncate)
    else:
        E_con = np.eye(K)
    graph = assemble_graph(G, delta, E_adj, E_con, vocab)
    if "consistency" not in enc:
        graph = GeneGraph(vocab, graph.G, graph.delta, graph.E_adj, np.zeros((K, K)))
    return graph


def model_param_spec(graph, cfg, d_in):
    K, C, d, seed = graph.K, graph.vocab.C, cfg.d, cfg.seed
    spec = [("phenotype.w", xavier_init((C, d), param_seed(seed, "phenotype.w")))]
    if cfg.association and cfg.L > 0:
        spec += kam_param_spec(K, d, cfg.L, seed)
    if cfg.fusion == "mfm":
        dec = decoder_param_spec(K, d, cfg.I, seed)
        # patch features may be wider or narrower than the model dimension
        dec[0] = ("dec.mk", xavier_init((d_in, d), param_seed(seed, "dec.mk")))
        dec[1] = ("dec.mv", xavier_init((d_in, d), param_seed(seed, "dec.mv")))
        spec += dec
    else:
        spec += matrix_fusion_spec(K, d, seed)
        spec[-2] = ("mat.w", xavier_init((d, d_in), param_seed(seed, "mat.w")))
    return spec


class Model:
    def __init__(self, graph, cfg, d_in):
        if graph.d != cfg.d:
            raise ValueError(f"graph feature dim {graph.d} != model dim {cfg.d}")
        self.graph, self.cfg, self.d_in = graph, cfg, d_in
        self.params = ParameterSet(model_param_spec(graph, cfg, d_in))

    @property
    def use_kam(self):
        return self.cfg.association and self.cfg.L > 0

    def priors(self):
        p = self.params
        kam = kam_params_from(p, self.cfg.L) if self.use_kam else KAMParams([], None, None)
        return gene_priors(self.graph, kam, p["phenotype.w"])

    def logits(self, F, P=None, return_attention=False):
        P = self.priors() if P is None else P
        F = F if isinstance(F, Tensor) else Tensor(F)
        if self.cfg.fusion == "mfm":
            return decode(P, F, decoder_params_from(self.params, self.cfg.I), return_attention)
        y = matrix_fusion(P, F, self.params["mat.w"], self.params["mat.b"])
        return (y, None) if return_attention else y

    def loss(self, y, labels):
        sample = LabeledLogits(y, labels)
        if self.cfg.loss == "bce":
            return bce_loss(sample)
        return comparative_loss(sample, self.cfg.T, self.cfg.empty_mode)

    def predict_logits(self, slides):
        """(len(slides), K) logits without building a tape."""
        with no_grad():
            P = self.priors()
            return np.stack([self.logits(s.features, P).data for s in slides])

    def attention(self, F):
        with no_grad():
            _, A = self.logits(F, return_attention=True)
        return None if A is None else A.data
