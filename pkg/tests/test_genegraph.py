from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genemut.genegraph import (AssemblyError, DegenerateGraphError, GeneRecord, GeneVocabulary,
                               IngestionError, MutationTable, ParseError, assemble_graph,
                               consistency_encoding, embed_linguistic, normalize_adjacency,
                               pathway_adjacency, phenotype_encoding, save_embeddings, tokenize)
from genemut.genegraph import formats
from genemut.numkernel import Tensor


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


# ---- linguistic features ------------------------------------------------------

def test_tokenize_strips_trailing_digits():
    assert tokenize("BRCA1/BRCA2, TP53 tumor-suppressor 53") == ["brca", "brca", "tp", "tumor", "suppressor", "53"]


def test_identical_descriptions_identical_embeddings():
    recs = [GeneRecord("A", "DNA repair kinase"), GeneRecord("B", "DNA repair kinase")]
    G = embed_linguistic(recs, "token-hash", 16, seed=3)
    assert np.array_equal(G[0], G[1])


def test_related_descriptions_are_closer_than_unrelated():
    recs = [GeneRecord("TP53", "tumor suppressor TP53"), GeneRecord("TP73", "tumor suppressor TP73"),
            GeneRecord("X", "membrane transporter of glucose"), GeneRecord("Y", "ribosomal subunit assembly")]
    G = embed_linguistic(recs, "token-hash", 64)
    assert cosine(G[0], G[1]) > cosine(G[2], G[3])
    assert cosine(G[0], G[1]) > cosine(G[0], G[2])


def test_file_embedder_roundtrip(tmp_path):
    recs = [GeneRecord(g, "") for g in ("A", "B", "C")]
    G = np.random.default_rng(0).normal(size=(3, 5))
    save_embeddings(tmp_path / "emb.txt", ["A", "B", "C"], G)
    back = embed_linguistic(recs, f"file:{tmp_path / 'emb.txt'}", 5)
    assert np.array_equal(back, G)


def test_file_embedder_lists_missing_ids(tmp_path):
    save_embeddings(tmp_path / "emb.txt", ["A"], np.ones((1, 2)))
    with pytest.raises(IngestionError, match=r"\['B', 'C'\]"):
        embed_linguistic([GeneRecord(g) for g in "ABC"], f"file:{tmp_path / 'emb.txt'}", 2)


def test_empty_description_gives_zero_row():
    G = embed_linguistic([GeneRecord("A", "  ")], "token-hash", 8)
    assert not G.any()


# ---- phenotype encoding ----------------------------------------------------------

def test_phenotype_zero_row():
    W = Tensor(np.arange(6.0).reshape(3, 2))
    phi = phenotype_encoding(np.array([[0, 0, 0], [1, 1, 0]]), W).data
    assert phi[0].tolist() == [0.0, 0.0]


def test_phenotype_direct_sum():
    W = Tensor(np.array([[1.0, 0.0], [5.0, 5.0], [0.0, 2.0]]))
    phi = phenotype_encoding(np.array([[1, 0, 1]]), W).data
    assert phi[0].tolist() == [1.0, 2.0]


def test_phenotype_tp53_sums_its_four_cancers():
    cancers = ["BRCA", "LUAD", "COAD", "HNSC", "KIRC"]
    W = np.random.default_rng(0).normal(size=(5, 4))
    delta = np.array([[1, 1, 1, 1, 0]])
    phi = phenotype_encoding(delta, Tensor(W)).data[0]
    expected = sum(W[cancers.index(c)] for c in ("BRCA", "LUAD", "COAD", "HNSC"))
    np.testing.assert_allclose(phi, expected, rtol=0, atol=1e-15)


# ---- pathway adjacency ------------------------------------------------------------

TOY_VOCAB = GeneVocabulary(["GSDME", "TP53", "BRCA2", "BRCA1"], ["BRCA"])
TOY_MEMBERSHIP = [("Pathway1", "GSDME"), ("Pathway1", "TP53"),
                   ("Pathway2", "TP53"), ("Pathway2", "BRCA2"), ("Pathway2", "BRCA1")]


def test_pathway_worked_example():
    A = pathway_adjacency(TOY_MEMBERSHIP, TOY_VOCAB)
    # 1-based (2, 4) and (4, 2): TP53 and BRCA1 share exactly Pathway2
    assert A[1, 3] == A[3, 1] == 1
    assert A[1, 0] == A[1, 2] == 1
    assert A[0, 2] == 0
    assert A[1, 1] == 2  # max off-diagonal 1, plus 1


def test_isolated_gene_has_unit_diagonal():
    vocab = GeneVocabulary(["A", "B", "C"], ["X"])
    A = pathway_adjacency([("p", "A"), ("p", "B")], vocab)
    assert A[2].tolist() == [0, 0, 1]


def test_unknown_gene_rejected():
    with pytest.raises(IngestionError, match="ZZZ"):
        pathway_adjacency([("p", "ZZZ")], TOY_VOCAB)


def brute_force_adjacency(membership, genes):
    members = {}
    for p, g in membership:
        members.setdefault(g, set()).add(p)
    K = len(genes)
    A = [[0] * K for _ in range(K)]
    for i, j in product(range(K), repeat=2):
        if i != j:
            A[i][j] = len(members.get(genes[i], set()) & members.get(genes[j], set()))
    for i in range(K):
        A[i][i] = max([A[i][j] for j in range(K) if j != i], default=0) + 1
    return A


def random_bipartite(rng):
    K = int(rng.integers(1, 9))
    P = int(rng.integers(0, 7))
    genes = [f"g{i}" for i in range(K)]
    membership = [(f"p{p}", genes[i]) for p in range(P) for i in range(K) if rng.random() < 0.4]
    return GeneVocabulary(genes, ["c"]), membership


def test_pathway_matches_brute_force_random():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        vocab, membership = random_bipartite(rng)
        A = pathway_adjacency(membership, vocab)
        assert A.tolist() == brute_force_adjacency(membership, list(vocab.genes))


# ---- normalization ------------------------------------------------------------------

def test_normalize_two_by_two():
    E = normalize_adjacency(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(E, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], rtol=0, atol=1e-15)


def test_normalize_diagonal_is_identity():
    assert np.array_equal(normalize_adjacency(np.diag([1.0, 3.0, 7.0])), np.eye(3))


def test_normalize_zero_row_rejected():
    with pytest.raises(DegenerateGraphError):
        normalize_adjacency(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_normalize_elementwise_and_spectral():
    rng = np.random.default_rng(7)
    for _ in range(50):
        vocab, membership = random_bipartite(rng)
        A = pathway_adjacency(membership, vocab).astype(float)
        E = normalize_adjacency(A)
        D = A.sum(axis=1)
        for i, j in product(range(vocab.K), repeat=2):
            assert E[i, j] == pytest.approx(A[i, j] / np.sqrt(D[i] * D[j]), abs=1e-15)
        Dm = np.diag(D ** -0.5)
        np.testing.assert_allclose(E, Dm @ A @ Dm, rtol=0, atol=1e-12)
        assert np.array_equal(E, E.T)
        assert np.linalg.eigvalsh(E).max() <= 1 + 1e-9


# ---- consistency encoding -----------------------------------------------------------

def table_from(cancer_rows, genes=("g0", "g1", "g2")):
    cancers = sorted({c for c, _ in cancer_rows})
    vocab = GeneVocabulary(list(genes), cancers)
    return MutationTable(vocab, [f"s{i}" for i in range(len(cancer_rows))],
                         [c for c, _ in cancer_rows], np.array([r for _, r in cancer_rows]))


def direct_consistency(table, thr, mode="joint"):
    K, N = table.vocab.K, table.N
    E = [[Fraction(0)] * K for _ in range(K)]
    for c in table.vocab.cancers:
        rows = [table.labels[s] for s in range(N) if table.cancer_types[s] == c]
        nc = len(rows)
        if not nc:
            continue
        for i, j in product(range(K), repeat=2):
            if mode == "joint":
                hit = sum(1 for r in rows if r[i] and r[j]) / nc >= thr
            else:
                hit = (sum(r[i] for r in rows) / nc >= thr) and (sum(r[j] for r in rows) / nc >= thr)
            if hit:
                E[i][j] += nc
    return np.array([[1.0 if i == j else float(E[i][j] / N) for j in range(K)] for i in range(K)])


def test_consistency_weighted_example():
    rows = [("A", [1, 1, 0])] + [("A", [0, 0, 0])] * 59 + [("B", [1, 0, 0]), ("B", [0, 1, 0])] + \
        [("B", [0, 0, 0])] * 38
    E = consistency_encoding(table_from(rows), 0.01)
    assert E[0, 1] == E[1, 0] == 0.6
    assert np.diag(E).tolist() == [1.0, 1.0, 1.0]


def test_consistency_identity_when_nothing_co_mutates():
    rows = [("A", [1, 0, 0]), ("A", [0, 1, 0]), ("B", [0, 0, 1])]
    assert np.array_equal(consistency_encoding(table_from(rows)), np.eye(3))


def test_consistency_marginal_mode_differs():
    rows = [("A", [1, 0, 0]), ("A", [0, 1, 0])]
    t = table_from(rows)
    assert consistency_encoding(t, 0.01, "marginal")[0, 1] == 1.0
    assert consistency_encoding(t, 0.01, "joint")[0, 1] == 0.0


def test_consistency_probability_valued_mode():
    rows = [("A", [1, 1, 0]), ("A", [0, 0, 0]), ("A", [1, 1, 0]), ("A", [0, 1, 0])]
    E = consistency_encoding(table_from(rows), 0.01, truncate=False)
    assert E[0, 1] == pytest.approx(0.5)


def test_consistency_empty_table():
    vocab = GeneVocabulary(["a"], ["c"])
    with pytest.raises(IngestionError):
        consistency_encoding(MutationTable(vocab, [], [], np.zeros((0, 1))))


def random_table(rng, K=None):
    K = K or int(rng.integers(2, 7))
    C = int(rng.integers(1, 4))
    N = int(rng.integers(1, 60))
    vocab = GeneVocabulary([f"g{k}" for k in range(K)], [f"c{c}" for c in range(C)])
    cts = [f"c{int(rng.integers(C))}" for _ in range(N)]
    labels = (rng.random((N, K)) < rng.uniform(0.0, 0.3)).astype(int)
    return MutationTable(vocab, [f"s{i}" for i in range(N)], cts, labels)


@pytest.mark.parametrize("mode", ["joint", "marginal"])
def test_consistency_matches_direct_evaluation(mode):
    rng = np.random.default_rng(11)
    for _ in range(50):
        t = random_table(rng)
        thr = float(rng.choice([0.01, 0.05, 0.1, 0.3]))
        E = consistency_encoding(t, thr, mode)
        np.testing.assert_allclose(E, direct_consistency(t, thr, mode), rtol=0, atol=1e-12)
        assert np.array_equal(E, E.T)
        assert (np.diag(E) == 1.0).all()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_consistency_invariant_to_slide_order(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng)
    perm = rng.permutation(t.N)
    assert np.array_equal(consistency_encoding(t), consistency_encoding(t.subset(perm)))


# ---- assembly and equivariance --------------------------------------------------------

def toy_inputs(K=4, C=3, d=5, seed=0):
    rng = np.random.default_rng(seed)
    vocab = GeneVocabulary([f"g{k}" for k in range(K)], [f"c{c}" for c in range(C)])
    G = rng.normal(size=(K, d))
    delta = (rng.random((K, C)) < 0.5).astype(int)
    membership = [(f"p{p}", f"g{k}") for p in range(3) for k in range(K) if rng.random() < 0.5]
    E_adj = normalize_adjacency(pathway_adjacency(membership, vocab))
    t = random_table(rng, K=K)
    t = MutationTable(vocab, t.slide_ids, [vocab.cancers[hash(c) % C] for c in t.cancer_types], t.labels)
    E_con = consistency_encoding(t)
    return vocab, G, delta, E_adj, E_con, membership, t


def test_assemble_valid_graph():
    vocab, G, delta, E_adj, E_con, _, _ = toy_inputs()
    g = assemble_graph(G, delta, E_adj, E_con, vocab)
    assert g.K == 4 and g.d == 5
    with pytest.raises(ValueError):
        g.E_con[0, 1] = 0.3  # immutable


def test_assemble_rejects_asymmetric_consistency():
    vocab, G, delta, E_adj, E_con, _, _ = toy_inputs()
    bad = E_con.copy()
    bad[1, 2] = 0.25
    bad[2, 1] = 0.75
    with pytest.raises(AssemblyError, match=r"E_con not symmetric at \(1, 2\)"):
        assemble_graph(G, delta, E_adj, bad, vocab)


def test_assemble_rejects_non_unit_diagonal():
    vocab, G, delta, E_adj, E_con, _, _ = toy_inputs()
    bad = E_con.copy()
    bad[3, 3] = 0.5
    with pytest.raises(AssemblyError, match=r"\(3, 3\)"):
        assemble_graph(G, delta, E_adj, bad, vocab)


def test_assemble_thirty_genes_nine_cancers():
    vocab, G, delta, E_adj, E_con, _, _ = toy_inputs(K=30, C=9, d=16, seed=1)
    g = assemble_graph(G, delta, E_adj, E_con, vocab)
    assert (g.K, g.vocab.C) == (30, 9)


def test_permutation_equivariance():
    vocab, G, delta, E_adj, E_con, membership, table = toy_inputs(K=6, seed=3)
    perm = np.random.default_rng(0).permutation(6)
    pv = GeneVocabulary([vocab.genes[i] for i in perm], vocab.cancers)
    recs = [GeneRecord(g, f"desc {g} kinase") for g in vocab.genes]
    G0 = embed_linguistic(recs, "token-hash", 8)
    G1 = embed_linguistic([recs[i] for i in perm], "token-hash", 8)
    assert np.array_equal(G1, G0[perm])
    W = Tensor(np.random.default_rng(1).normal(size=(vocab.C, 8)))
    assert np.array_equal(phenotype_encoding(delta[perm], W).data, phenotype_encoding(delta, W).data[perm])
    A1 = normalize_adjacency(pathway_adjacency(membership, pv))
    assert np.array_equal(A1, E_adj[np.ix_(perm, perm)])
    t1 = MutationTable(pv, table.slide_ids, table.cancer_types, table.labels[:, perm])
    assert np.array_equal(consistency_encoding(t1), E_con[np.ix_(perm, perm)])


# ---- file formats ----------------------------------------------------------------------

def test_formats_roundtrip(tmp_path):
    vocab, G, delta, E_adj, E_con, membership, table = toy_inputs()
    recs = [GeneRecord(g, f"{g} does things") for g in vocab.genes]
    formats.write_genes(tmp_path / "genes.tsv", recs)
    formats.write_cancers(tmp_path / "cancers.txt", vocab.cancers)
    formats.write_delta(tmp_path / "delta.csv", vocab, delta)
    formats.write_pathways(tmp_path / "pathways.tsv", membership)
    formats.write_labels(tmp_path / "labels.csv", table)
    v2, r2 = formats.vocab_from_files(tmp_path / "genes.tsv", tmp_path / "cancers.txt")
    assert v2 == vocab and r2 == recs
    assert np.array_equal(formats.read_delta(tmp_path / "delta.csv", v2), delta)
    assert formats.read_pathways(tmp_path / "pathways.tsv") == membership
    t2 = formats.read_labels(tmp_path / "labels.csv", v2)
    assert t2.slide_ids == table.slide_ids and np.array_equal(t2.labels, table.labels)


def test_labels_parse_error_has_line_number(tmp_path):
    vocab = GeneVocabulary(["a", "b"], ["c"])
    (tmp_path / "labels.csv").write_text("slide_id,cancer_type,a,b\ns0,c,0,1\ns1,c,0,7\n")
    with pytest.raises(ParseError, match=":3:"):
        formats.read_labels(tmp_path / "labels.csv", vocab)


def test_duplicate_gene_ids_rejected():
    with pytest.raises(IngestionError, match="duplicate"):
        GeneVocabulary(["a", "a"], ["c"])
