"""Vocabulary construction, ordering, digests."""

import pytest
from hypothesis import given, strategies as st

from hdhgn import ast_io
from hdhgn.graphs import build_hdhg
from hdhgn.vocab import UNK_ID, UNK_TOKEN, Vocab, build_vocab
from hdhgn.errors import EmptyCorpus, EncodingError

from fixtures_data import a_eq_1_record


def _fixture_graph(label=0):
    return build_hdhg(ast_io.ast_from_obj(a_eq_1_record(label=label)))


def test_fixture_vocab_sizes():
    v = build_vocab([_fixture_graph()], min_identifier_freq=1)
    assert len(v.ast_values) == 5
    assert len(v.identifier_values) == 3  # UNK, "1", "a"
    assert len(v.edge_types) == 5  # body, ctx, id, targets, value
    assert v.identifier_values[UNK_ID] == UNK_TOKEN


def test_frequency_cutoff_leaves_only_unk():
    v = build_vocab([_fixture_graph()], min_identifier_freq=2)
    assert v.identifier_values == (UNK_TOKEN,)


def test_empty_corpus_raises():
    with pytest.raises(EmptyCorpus):
        build_vocab([], min_identifier_freq=1)


def test_ordering_frequency_desc_then_lexicographic():
    v = build_vocab([_fixture_graph()], min_identifier_freq=1)
    # "value" appears twice (Assign.value, Constant.value); the rest once
    assert v.edge_types[0] == "value"
    assert v.edge_types[1:] == ("body", "ctx", "id", "targets")
    assert v.ast_values == ("Assign", "Constant", "Module", "Name", "Store")
    assert v.identifier_values == (UNK_TOKEN, "1", "a")


def test_label_names_sorted_and_dense():
    graphs = [_fixture_graph(label=7), _fixture_graph(label=2)]
    v = build_vocab(graphs, min_identifier_freq=1)
    assert v.label_names == ("2", "7")
    assert v.label_id(7) == 1
    with pytest.raises(EncodingError):
        v.label_id(3)


def test_lookup_errors_and_unk_fallback():
    v = build_vocab([_fixture_graph()], min_identifier_freq=1)
    assert v.identifier_id("zzz-not-present") == UNK_ID
    with pytest.raises(EncodingError):
        v.ast_id("NotAGrammarNode")
    with pytest.raises(EncodingError):
        v.edge_id("not_a_field")


def test_json_roundtrip_and_digest_stability():
    v = build_vocab([_fixture_graph()], min_identifier_freq=1)
    v2 = Vocab.from_obj(v.to_obj())
    assert v2 == v
    assert v2.digest() == v.digest()
    assert len(v.digest()) == 64


@given(st.lists(st.text(min_size=1, max_size=8), min_size=1, max_size=20, unique=True))
def test_encode_decode_identity_for_in_vocab_strings(words):
    words = [w for w in words if w != UNK_TOKEN]
    v = Vocab(
        ast_values=tuple(sorted(words)),
        identifier_values=(UNK_TOKEN, *sorted(words)),
        edge_types=tuple(sorted(words)),
        label_names=("0",),
    )
    for w in words:
        assert v.ast_values[v.ast_id(w)] == w
        assert v.identifier_values[v.identifier_id(w)] == w
        assert v.edge_types[v.edge_id(w)] == w
