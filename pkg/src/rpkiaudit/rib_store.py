"""BGP RIB ingestion: MRT TABLE_DUMP_V2 and text dumps into a prefix trie.

The trie answers "all covering prefixes and their origin ASes" for any
address; origin is the rightmost AS-path element, with AS_SET-terminated
paths marked and kept out of the analysis set.
"""

from __future__ import annotations

import gzip
import io
import ipaddress
import struct
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

from ._radix import RadixTrie
from .diagnostics import Diagnostics
from .errors import BadMagicError, EmptyPathError

IPNetwork = Union[ipaddress.IPv4Network, ipaddress.IPv6Network]
IPAddress = Union[ipaddress.IPv4Address, ipaddress.IPv6Address]

# An AS path is a flat segment tuple: plain ints for AS_SEQUENCE members,
# frozensets for AS_SET segments.
AsPath = tuple[Union[int, frozenset[int]], ...]

MAX_ASN = 2**32 - 1

# MRT record types (RFC 6396); anything else in the first header means the
# stream is not MRT at all.
_MRT_TYPES = frozenset({11, 12, 13, 16, 17, 32, 33, 48, 49})
_TABLE_DUMP_V2 = 13
_PEER_INDEX_TABLE = 1
_RIB_IPV4_UNICAST = 2
_RIB_IPV6_UNICAST = 4

_AS_SET = 1
_AS_SEQUENCE = 2
_AS_CONFED_SEQUENCE = 3
_AS_CONFED_SET = 4

_ATTR_AS_PATH = 2


class _Malformed(Exception):
    pass


@dataclass(frozen=True, slots=True)
class RibEntry:
    prefix: IPNetwork
    as_path: AsPath
    # Rightmost-path origin; None marks an AS_SET-terminated path (RFC 6472
    # deprecates those, so they never become PrefixOriginPairs).
    origin: int | None


@dataclass(frozen=True, slots=True)
class PrefixOriginPair:
    prefix: IPNetwork
    origin_asn: int
    # lookups return many pairs into result sets; hashing an IPNetwork per
    # membership test is the bottleneck at scale, so the hash is precomputed
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.origin_asn, int):
            raise TypeError("origin_asn must be a plain ASN, never an AS_SET")
        if not 0 <= self.origin_asn <= MAX_ASN:
            raise ValueError(f"ASN {self.origin_asn} out of range")
        object.__setattr__(self, "_hash", hash(self.sort_key()))

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self) -> tuple:
        return (
            self.prefix.version,
            int(self.prefix.network_address),
            self.prefix.prefixlen,
            self.origin_asn,
        )


def origin_from_path(as_path: AsPath) -> int | None:
    """Rightmost-ASN origin of a path; None when the path ends in an AS_SET."""
    if not as_path:
        raise EmptyPathError("AS path has no segments")
    last = as_path[-1]
    if isinstance(last, frozenset):
        return None
    return int(last)


# ---------------------------------------------------------------------------
# MRT TABLE_DUMP_V2 parsing


def _open_stream(source: Union[bytes, IO[bytes]]) -> IO[bytes]:
    stream: IO[bytes] = io.BytesIO(source) if isinstance(source, bytes) else source
    if stream.seekable():
        head = stream.read(2)
        stream.seek(-len(head), io.SEEK_CUR)
    else:
        data = stream.read()
        stream = io.BytesIO(data)
        head = data[:2]
    if head == b"\x1f\x8b":
        return gzip.GzipFile(fileobj=stream)  # type: ignore[return-value]
    return stream


def parse_mrt(
    source: Union[bytes, IO[bytes]], diag: Diagnostics | None = None
) -> list[RibEntry]:
    """Decode TABLE_DUMP_V2 RIB records from an MRT stream (gzip sniffed).

    Unsupported record types/subtypes, truncated records and inconsistent
    AS_PATH attributes are skipped and counted (keys mrt_skipped_records
    plus a per-reason key); BadMagicError is raised only when the stream is
    not MRT at all.
    """
    diag = diag if diag is not None else Diagnostics()
    stream = _open_stream(source)
    entries: list[RibEntry] = []
    first = True
    while True:
        header = stream.read(12)
        if not header:
            if first:
                raise BadMagicError("empty stream is not an MRT file")
            break
        if len(header) < 12:
            if first:
                raise BadMagicError("stream shorter than an MRT record header")
            diag.count("mrt_skipped_records")
            diag.count("mrt_truncated")
            break
        _ts, mtype, subtype, length = struct.unpack(">IHHI", header)
        if first:
            if mtype not in _MRT_TYPES:
                raise BadMagicError(f"type {mtype} is not an MRT record type")
            first = False
        body = stream.read(length)
        if len(body) < length:
            diag.count("mrt_skipped_records")
            diag.count("mrt_truncated")
            break
        if mtype != _TABLE_DUMP_V2:
            diag.count("mrt_skipped_records")
            diag.count("mrt_unsupported_type")
            continue
        if subtype == _PEER_INDEX_TABLE:
            continue  # peer details are irrelevant to origin extraction
        if subtype not in (_RIB_IPV4_UNICAST, _RIB_IPV6_UNICAST):
            diag.count("mrt_skipped_records")
            diag.count("mrt_unsupported_subtype")
            continue
        try:
            entries.extend(_parse_rib_record(body, subtype == _RIB_IPV6_UNICAST))
        except _Malformed:
            diag.count("mrt_skipped_records")
            diag.count("mrt_malformed_path")
    return entries


def _parse_rib_record(body: bytes, v6: bool) -> list[RibEntry]:
    width = 128 if v6 else 32
    if len(body) < 5:
        raise _Malformed
    _seq, plen = struct.unpack(">IB", body[:5])
    if plen > width:
        raise _Malformed
    octets = (plen + 7) // 8
    if len(body) < 7 + octets:
        raise _Malformed
    raw = body[5 : 5 + octets] + bytes(width // 8 - octets)
    net_int = int.from_bytes(raw, "big")
    if plen < width:  # trailing pad bits are irrelevant per RFC 6396
        net_int &= ~((1 << (width - plen)) - 1)
    addr = ipaddress.ip_address(net_int) if v6 else ipaddress.IPv4Address(net_int)
    prefix = ipaddress.ip_network((addr, plen))
    (entry_count,) = struct.unpack(">H", body[5 + octets : 7 + octets])

    out: list[RibEntry] = []
    off = 7 + octets
    for _ in range(entry_count):
        if off + 8 > len(body):
            raise _Malformed
        # peer index (2) + originated time (4) + attribute length (2)
        attr_len = struct.unpack(">H", body[off + 6 : off + 8])[0]
        off += 8
        attrs = body[off : off + attr_len]
        if len(attrs) < attr_len:
            raise _Malformed
        off += attr_len
        path = _as_path_from_attrs(attrs)
        out.append(RibEntry(prefix, path, origin_from_path(path)))
    if off != len(body):
        raise _Malformed
    return out


def _as_path_from_attrs(attrs: bytes) -> AsPath:
    off = 0
    path_data = None
    while off < len(attrs):
        if off + 3 > len(attrs):
            raise _Malformed
        flags = attrs[off]
        atype = attrs[off + 1]
        off += 2
        if flags & 0x10:  # extended length
            if off + 2 > len(attrs):
                raise _Malformed
            alen = struct.unpack(">H", attrs[off : off + 2])[0]
            off += 2
        else:
            alen = attrs[off]
            off += 1
        if off + alen > len(attrs):
            raise _Malformed
        if atype == _ATTR_AS_PATH and path_data is None:
            path_data = attrs[off : off + alen]
        off += alen
    if path_data is None:
        raise _Malformed
    path = _decode_path(path_data)
    if not path:
        raise _Malformed
    return path


def _decode_path(data: bytes) -> AsPath:
    # RFC 6396 mandates 4-byte ASNs in TABLE_DUMP_V2 paths, but 2-byte
    # encodings exist in the wild; accept whichever consumes the attribute
    # exactly, preferring 4-byte.
    for as_size in (4, 2):
        segs = _try_decode_path(data, as_size)
        if segs is not None:
            return segs
    raise _Malformed


def _try_decode_path(data: bytes, as_size: int) -> AsPath | None:
    off = 0
    segs: list[int | frozenset[int]] = []
    while off < len(data):
        if off + 2 > len(data):
            return None
        stype = data[off]
        count = data[off + 1]
        off += 2
        if stype not in (_AS_SET, _AS_SEQUENCE, _AS_CONFED_SEQUENCE, _AS_CONFED_SET):
            return None
        if count == 0:
            return None
        end = off + count * as_size
        if end > len(data):
            return None
        asns = [
            int.from_bytes(data[i : i + as_size], "big")
            for i in range(off, end, as_size)
        ]
        off = end
        if stype in (_AS_SEQUENCE, _AS_CONFED_SEQUENCE):
            segs.extend(asns)
        else:
            segs.append(frozenset(asns))
    return tuple(segs)


# ---------------------------------------------------------------------------
# Text RIB parsing ("prefix|as_path" lines)


def parse_text_rib(
    source: Union[bytes, IO[bytes], str], diag: Diagnostics | None = None
) -> list[RibEntry]:
    """Parse "prefix|as_path" lines; "{a,b}" denotes an AS_SET segment.

    Semantics match parse_mrt output; malformed lines (bad prefix, host bits
    set, bad ASN) are skipped and counted.
    """
    diag = diag if diag is not None else Diagnostics()
    if isinstance(source, str):
        text = source
    else:
        data = source if isinstance(source, bytes) else source.read()
        text = data.decode("utf-8")

    entries: list[RibEntry] = []
    for line in text.split("\n"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("|")
        if len(parts) != 2:
            diag.count("malformed_lines")
            continue
        try:
            prefix = ipaddress.ip_network(parts[0].strip())  # strict: host bits
            path = _parse_text_path(parts[1])
        except (ValueError, _Malformed):
            diag.count("malformed_lines")
            continue
        entries.append(RibEntry(prefix, path, origin_from_path(path)))
    return entries


def _parse_text_path(text: str) -> AsPath:
    tokens = text.split()
    if not tokens:
        raise _Malformed
    path: list[int | frozenset[int]] = []
    for tok in tokens:
        if tok.startswith("{") and tok.endswith("}"):
            members = frozenset(_parse_asn(t) for t in tok[1:-1].split(","))
            if not members:
                raise _Malformed
            path.append(members)
        else:
            path.append(_parse_asn(tok))
    return tuple(path)


def _parse_asn(token: str) -> int:
    asn = int(token.strip())
    if not 0 <= asn <= MAX_ASN:
        raise _Malformed
    return asn


# ---------------------------------------------------------------------------
# Prefix trie


class PrefixTrie:
    """Immutable-after-build index answering all-covering-prefix queries."""

    def __init__(self) -> None:
        self._v4 = RadixTrie(32)
        self._v6 = RadixTrie(128)
        self.as_set_count = 0

    def __len__(self) -> int:
        return len(self._v4) + len(self._v6)

    def _insert(self, pair: PrefixOriginPair) -> None:
        trie = self._v6 if pair.prefix.version == 6 else self._v4
        trie.insert(int(pair.prefix.network_address), pair.prefix.prefixlen, pair)

    def covering(self, ip: IPAddress) -> set[PrefixOriginPair]:
        trie = self._v6 if ip.version == 6 else self._v4
        return set(trie.covering_of_address(int(ip)))

    def pairs(self) -> set[PrefixOriginPair]:
        return set(self._v4.iter_items()) | set(self._v6.iter_items())


def build_trie(
    entries: Iterable[RibEntry], diag: Diagnostics | None = None
) -> PrefixTrie:
    """Index every non-AS_SET entry; AS_SET entries only bump a counter."""
    diag = diag if diag is not None else Diagnostics()
    trie = PrefixTrie()
    for entry in entries:
        if entry.origin is None:
            trie.as_set_count += 1
            diag.count("as_set_entries")
            continue
        trie._insert(PrefixOriginPair(entry.prefix, entry.origin))
    return trie


def covering_pairs(
    ip: Union[str, IPAddress], trie: PrefixTrie
) -> set[PrefixOriginPair]:
    """Every (prefix, origin) in the trie whose prefix contains the address."""
    if isinstance(ip, str):
        ip = ipaddress.ip_address(ip)
    return trie.covering(ip)
