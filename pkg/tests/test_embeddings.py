import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausset.embeddings import (DegenerateVectorError, EmbeddingFormatError, EmbeddingStore,
                                UnknownTermError, centroid, cosine, load_embeddings, lookup,
                                resolve_seed, save_embeddings)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def _store(mapping):
    return EmbeddingStore.from_arrays(list(mapping), list(mapping.values()))


class TestLoad:
    def test_single_line(self):
        store = load_embeddings(["the 0.1 0.2 0.3\n"], max_terms=10)
        assert store.dim == 3
        assert store.terms == ("the",)
        assert lookup(store, "the").tolist() == [0.1, 0.2, 0.3]

    def test_cap_is_prefix(self):
        lines = [f"w{i} {i} {i}" for i in range(5)]
        store = load_embeddings(lines, max_terms=2)
        assert store.terms == ("w0", "w1")

    def test_dimension_mismatch(self):
        with pytest.raises(EmbeddingFormatError, match="dimension mismatch"):
            load_embeddings(["the 0.1 0.2 0.3", "cat 0.1 0.2"])

    def test_empty_source(self):
        with pytest.raises(EmbeddingFormatError, match="empty"):
            load_embeddings([])

    def test_non_numeric(self):
        with pytest.raises(EmbeddingFormatError):
            load_embeddings(["the 0.1 abc"])

    def test_duplicate_term(self):
        with pytest.raises(EmbeddingFormatError, match="duplicate"):
            load_embeddings(["a 1 2", "a 3 4"])

    def test_dim_assertion(self):
        with pytest.raises(EmbeddingFormatError, match="expected dimension 300"):
            load_embeddings(["a 1 2"], dim=300)

    def test_mismatch_after_cap_is_ignored(self):
        store = load_embeddings(["a 1 2", "b 1 2", "c 1"], max_terms=2)
        assert len(store) == 2

    def test_store_is_read_only(self):
        store = load_embeddings(["a 1 2"])
        with pytest.raises(ValueError):
            store.vectors[0, 0] = 5.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(finite, min_size=3, max_size=3), min_size=1, max_size=20))
    def test_save_load_bit_exact(self, rows):
        terms = [f"t{i}" for i in range(len(rows))]
        store = EmbeddingStore.from_arrays(terms, rows)
        buf = io.StringIO()
        save_embeddings(store, buf)
        again = load_embeddings(io.StringIO(buf.getvalue()))
        assert again.terms == store.terms
        assert again.vectors.tobytes() == store.vectors.tobytes()

    def test_lookup_matches_parsed_text(self):
        lines = ["x 0.1 -2.5e-3 7", "y 3.14159 1e10 -0"]
        store = load_embeddings(lines)
        for line in lines:
            term, *vals = line.split(" ")
            assert lookup(store, term).tolist() == [float(v) for v in vals]


class TestLookup:
    def test_exact(self):
        assert lookup(_store({"paris": (1, 0)}), "paris").tolist() == [1, 0]

    def test_phrase_fallback(self):
        store = _store({"john": (1, 0), "kennedy": (0, 1)})
        np.testing.assert_array_equal(lookup(store, "john_kennedy"), [0.5, 0.5])

    def test_phrase_partial(self):
        store = _store({"john": (1, 0), "kennedy": (0, 1)})
        np.testing.assert_array_equal(lookup(store, "john_zzz"), [1.0, 0.0])

    def test_miss(self):
        assert lookup(_store({"john": (1, 0)}), "zzzz") is None

    def test_exact_wins_over_tokens(self):
        store = _store({"new_york": (9, 9), "new": (1, 0), "york": (0, 1)})
        assert lookup(store, "new_york").tolist() == [9, 9]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(finite, min_size=2, max_size=2), min_size=1, max_size=5))
    def test_fallback_equals_centroid(self, rows):
        terms = [f"w{i}" for i in range(len(rows))]
        store = EmbeddingStore.from_arrays(terms, rows)
        got = lookup(store, "_".join(terms + ["missing"]))
        np.testing.assert_array_equal(got, centroid(rows))


class TestCosine:
    def test_orthogonal(self):
        assert cosine((1, 0), (0, 1)) == 0

    def test_colinear(self):
        assert cosine((1, 2), (2, 4)) == pytest.approx(1.0, abs=1e-15)

    def test_diagonal(self):
        assert cosine((1, 0), (1, 1)) == pytest.approx(0.7071067811865475, abs=1e-15)

    def test_zero_norm(self):
        with pytest.raises(DegenerateVectorError):
            cosine((0, 0), (1, 1))

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            u, v = rng.normal(size=(2, 7))
            a, b = rng.uniform(0.01, 100, size=2)
            assert cosine(u, v) == pytest.approx(cosine(a * u, b * v), abs=1e-12)


class TestCentroid:
    def test_symmetric(self):
        assert centroid([(1, 3), (3, 1)]).tolist() == [2, 2]

    def test_singleton(self):
        assert centroid([(5, 5)]).tolist() == [5, 5]

    def test_three(self):
        assert centroid([(0, 0), (1, 0), (2, 3)]).tolist() == [1, 1]

    def test_empty(self):
        with pytest.raises(ValueError):
            centroid([])

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            vecs = rng.normal(size=(int(rng.integers(1, 10)), 4))
            perm = rng.permutation(len(vecs))
            np.testing.assert_allclose(centroid(vecs), centroid(vecs[perm]), rtol=0, atol=1e-14)


class TestSeed:
    def test_resolves(self):
        store = _store({"a": (1, 0), "b": (0, 1)})
        seed = resolve_seed(store, ["a", "b"])
        assert seed.vectors.shape == (2, 2)

    def test_unknown(self):
        with pytest.raises(UnknownTermError, match="zz"):
            resolve_seed(_store({"a": (1, 0)}), ["a", "zz"])

    def test_empty(self):
        with pytest.raises(ValueError):
            resolve_seed(_store({"a": (1, 0)}), [])
