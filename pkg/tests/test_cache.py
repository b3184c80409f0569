"""Binary encoded-dataset cache: round-trip, digest guard, regeneration."""

import pytest

from hdhgn import ast_io, cache
from hdhgn.graphs import build_hdhg
from hdhgn.vocab import build_vocab
from hdhgn.encode import encode_graph, encoded_equal

from fixtures_data import a_eq_1_record, single_node_record, two_statement_module_record


def _encoded():
    asts = [
        ast_io.ast_from_obj(a_eq_1_record(label=0)),
        ast_io.ast_from_obj(two_statement_module_record(label=1)),
        ast_io.ast_from_obj(single_node_record()),
    ]
    graphs = [build_hdhg(a) for a in asts]
    vocab = build_vocab(graphs, min_identifier_freq=1)
    return vocab, [encode_graph(g, vocab) for g in graphs]


def test_write_read_roundtrip(tmp_path):
    vocab, encoded = _encoded()
    path = tmp_path / "data.hdgc"
    cache.write_cache(path, encoded, vocab.digest())
    digest, back = cache.read_cache(path)
    assert digest == vocab.digest()
    assert len(back) == len(encoded)
    for a, b in zip(encoded, back):
        assert encoded_equal(a, b)


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.hdgc"
    path.write_bytes(b"nope" + b"\0" * 64)
    with pytest.raises(cache.CacheError):
        cache.read_cache(path)


def test_load_or_encode_hits_and_regenerates(tmp_path):
    vocab, encoded = _encoded()
    path = tmp_path / "cached.hdgc"
    calls = []

    def encode_all():
        calls.append(1)
        return encoded

    first = cache.load_or_encode(path, vocab.digest(), encode_all)
    assert len(calls) == 1
    second = cache.load_or_encode(path, vocab.digest(), encode_all)
    assert len(calls) == 1  # served from disk
    for a, b in zip(first, second):
        assert encoded_equal(a, b)
    # different digest forces regeneration and rewrites the file
    third = cache.load_or_encode(path, "f" * 64, encode_all)
    assert len(calls) == 2
    digest, _ = cache.read_cache(path)
    assert digest == "f" * 64
    assert len(third) == len(encoded)


def test_cache_file_is_deterministic(tmp_path):
    vocab, encoded = _encoded()
    p1, p2 = tmp_path / "a.hdgc", tmp_path / "b.hdgc"
    cache.write_cache(p1, encoded, vocab.digest())
    cache.write_cache(p2, encoded, vocab.digest())
    assert p1.read_bytes() == p2.read_bytes()
