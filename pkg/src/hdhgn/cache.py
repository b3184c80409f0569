"""Binary cache of encoded datasets, keyed by vocabulary digest.

Layout (all integers little-endian):

    magic   4 bytes  b"HDGC"
    version u32      currently 1
    digest  64 bytes vocabulary digest, lowercase hex
    count   u64      number of records
    then per record: u64 payload length, payload =
        u32 num_nodes | u32 num_edges | i64 label
        u8  node_kind[num_nodes]
        u32 node_value[num_nodes]
        per edge: u32 edge_type | u32 head | u32 num_tails | u32 tails[...]

A cache whose digest does not match the requested vocabulary is regenerated.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Callable

import numpy as np

from .encode import EncodedGraph
from .errors import HdhgnError

MAGIC = b"HDGC"
VERSION = 1


class CacheError(HdhgnError):
    """Cache file is unreadable or structurally invalid."""


def _pack_record(g: EncodedGraph) -> bytes:
    parts = [struct.pack("<IIq", g.num_nodes, g.num_edges, g.label)]
    parts.append(g.node_kind.astype("<u1").tobytes())
    parts.append(g.node_value.astype("<u4").tobytes())
    for et, ts, h in zip(g.edge_type, g.tails, g.heads):
        parts.append(struct.pack("<III", int(et), int(h), len(ts)))
        parts.append(ts.astype("<u4").tobytes())
    return b"".join(parts)


def _unpack_record(payload: bytes, digest: str) -> EncodedGraph:
    n, e, label = struct.unpack_from("<IIq", payload, 0)
    off = 16
    node_kind = np.frombuffer(payload, dtype="<u1", count=n, offset=off).astype(np.int8)
    off += n
    node_value = np.frombuffer(payload, dtype="<u4", count=n, offset=off).astype(np.int64)
    off += 4 * n
    edge_type = np.zeros(e, dtype=np.int64)
    heads = np.zeros(e, dtype=np.int64)
    tails = []
    for j in range(e):
        et, h, k = struct.unpack_from("<III", payload, off)
        off += 12
        edge_type[j] = et
        heads[j] = h
        tails.append(np.frombuffer(payload, dtype="<u4", count=k, offset=off).astype(np.int64))
        off += 4 * k
    if off != len(payload):
        raise CacheError("record payload has trailing bytes")
    return EncodedGraph(
        node_kind=node_kind,
        node_value=node_value,
        edge_type=edge_type,
        tails=tails,
        heads=heads,
        label=int(label),
        vocab_digest=digest,
    )


def write_cache(path: str | Path, graphs: list[EncodedGraph], digest: str) -> None:
    if len(digest) != 64:
        raise CacheError("digest must be 64 hex chars")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(digest.encode("ascii"))
        fh.write(struct.pack("<Q", len(graphs)))
        for g in graphs:
            payload = _pack_record(g)
            fh.write(struct.pack("<Q", len(payload)))
            fh.write(payload)


def read_cache(path: str | Path) -> tuple[str, list[EncodedGraph]]:
    with open(path, "rb") as fh:
        head = fh.read(4 + 4 + 64 + 8)
        if len(head) < 80 or head[:4] != MAGIC:
            raise CacheError(f"{path}: not a dataset cache file")
        (version,) = struct.unpack_from("<I", head, 4)
        if version != VERSION:
            raise CacheError(f"{path}: unsupported cache version {version}")
        digest = head[8:72].decode("ascii")
        (count,) = struct.unpack_from("<Q", head, 72)
        graphs = []
        for _ in range(count):
            raw_len = fh.read(8)
            if len(raw_len) != 8:
                raise CacheError(f"{path}: truncated cache")
            (length,) = struct.unpack("<Q", raw_len)
            payload = fh.read(length)
            if len(payload) != length:
                raise CacheError(f"{path}: truncated record")
            graphs.append(_unpack_record(payload, digest))
    return digest, graphs


def load_or_encode(
    path: str | Path,
    digest: str,
    encode_all: Callable[[], list[EncodedGraph]],
) -> list[EncodedGraph]:
    """Serve encoded graphs from `path` when its digest matches, else
    run `encode_all`, rewrite the cache, and return the fresh encoding."""
    path = Path(path)
    if path.exists():
        try:
            found, graphs = read_cache(path)
            if found == digest:
                return graphs
        except CacheError:
            pass  # fall through to regeneration
    graphs = encode_all()
    path.parent.mkdir(parents=True, exist_ok=True)
    write_cache(path, graphs, digest)
    return graphs
