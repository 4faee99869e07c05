"""Route-origin validation of prefix/origin pairs against ROA payloads.

Consumes validated ROA exports (relying-party tool output) and classifies
each PrefixOriginPair as valid, invalid or not-found: a pair is valid iff
some covering ROA authorizes its origin AS at its prefix length, not-found
iff no ROA covers the prefix at all, invalid otherwise.
"""

from __future__ import annotations

import csv
import enum
import io
import ipaddress
import json
from dataclasses import dataclass
from typing import IO, Iterable, Union

from ._radix import RadixTrie
from .diagnostics import Diagnostics
from .rib_store import MAX_ASN, IPNetwork, PrefixOriginPair

TRUST_ANCHORS = frozenset({"afrinic", "apnic", "arin", "lacnic", "ripe"})


class RoaFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


class ValidationState(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    NOT_FOUND = "notfound"


@dataclass(frozen=True, slots=True)
class RoaPayload:
    asn: int
    prefix: IPNetwork
    max_length: int
    trust_anchor: str = "other"

    def __post_init__(self):
        if not 0 <= self.asn <= MAX_ASN:
            raise ValueError(f"ASN {self.asn} out of range")
        if not self.prefix.prefixlen <= self.max_length <= self.prefix.max_prefixlen:
            raise ValueError(
                f"maxLength {self.max_length} outside "
                f"[{self.prefix.prefixlen}, {self.prefix.max_prefixlen}]"
            )

    def sort_key(self) -> tuple:
        return (
            self.prefix.version,
            int(self.prefix.network_address),
            self.prefix.prefixlen,
            self.asn,
            self.max_length,
        )


def _parse_asn_field(raw: Union[str, int]) -> int:
    if isinstance(raw, int):
        asn = raw
    else:
        text = raw.strip()
        if text[:2].upper() == "AS":
            text = text[2:]
        asn = int(text)
    if not 0 <= asn <= MAX_ASN:
        raise ValueError(f"ASN {asn} out of range")
    return asn


def _normalize_ta(raw: object) -> str:
    if raw is None:
        return "other"
    ta = str(raw).strip().lower()
    return ta if ta in TRUST_ANCHORS else "other"


def _payload_from_fields(
    asn_field, prefix_field, maxlen_field, ta_field
) -> RoaPayload:
    asn = _parse_asn_field(asn_field)
    prefix = ipaddress.ip_network(str(prefix_field).strip())
    if maxlen_field is None or (isinstance(maxlen_field, str) and not maxlen_field.strip()):
        max_length = prefix.prefixlen  # absent maxLength: exact-prefix ROA
    else:
        max_length = int(str(maxlen_field).strip())
    return RoaPayload(asn, prefix, max_length, _normalize_ta(ta_field))


def load_roas(
    source: Union[bytes, IO[bytes], str],
    fmt: RoaFormat = RoaFormat.CSV,
    diag: Diagnostics | None = None,
) -> set[RoaPayload]:
    """Load validated ROA payloads from csv or json export.

    Rows violating the maxLength invariant (or otherwise unparseable) could
    not have come from a correct relying-party validator; they are rejected
    and counted.  An empty result is a warning, not an error: validation
    then yields NotFound everywhere.
    """
    diag = diag if diag is not None else Diagnostics()
    if isinstance(source, str):
        text = source
    else:
        data = source if isinstance(source, bytes) else source.read()
        text = data.decode("utf-8")

    payloads: set[RoaPayload] = set()
    if fmt is RoaFormat.CSV:
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and rows[0][0].strip().upper() == "ASN":
            rows = rows[1:]  # header line
        for row in rows:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if not 2 <= len(row) <= 4:
                diag.count("malformed_roa_rows")
                continue
            fields = row + [None] * (4 - len(row))
            try:
                payloads.add(_payload_from_fields(*fields[:4]))
            except (ValueError, TypeError):
                diag.count("malformed_roa_rows")
    else:
        try:
            doc = json.loads(text) if text.strip() else []
        except json.JSONDecodeError:
            diag.count("malformed_roa_rows")
            doc = []
        if not isinstance(doc, list):
            diag.count("malformed_roa_rows")
            doc = []
        for obj in doc:
            try:
                payloads.add(
                    _payload_from_fields(
                        obj["asn"],
                        obj["prefix"],
                        obj.get("maxLength"),
                        obj.get("ta"),
                    )
                )
            except (ValueError, TypeError, KeyError):
                diag.count("malformed_roa_rows")

    if not payloads:
        diag.warn("empty_roa_set", "no ROA payloads loaded; everything validates NotFound")
    return payloads


class RoaIndex:
    """Prefix-keyed ROA lookup: covering(p) = ROAs whose prefix contains p."""

    def __init__(self) -> None:
        self._v4 = RadixTrie(32)
        self._v6 = RadixTrie(128)

    def __len__(self) -> int:
        return len(self._v4) + len(self._v6)

    def _insert(self, roa: RoaPayload) -> None:
        trie = self._v6 if roa.prefix.version == 6 else self._v4
        trie.insert(int(roa.prefix.network_address), roa.prefix.prefixlen, roa)

    def covering(self, prefix: IPNetwork) -> set[RoaPayload]:
        trie = self._v6 if prefix.version == 6 else self._v4
        return set(
            trie.covering_of_prefix(int(prefix.network_address), prefix.prefixlen)
        )


def build_roa_index(roas: Iterable[RoaPayload]) -> RoaIndex:
    index = RoaIndex()
    for roa in roas:
        index._insert(roa)
    return index


def validate(pair: PrefixOriginPair, index: RoaIndex) -> ValidationState:
    """Three-state route origin validation of one prefix/origin pair.

    NotFound iff no ROA covers the prefix; Valid iff a covering ROA names
    the pair's origin (AS0 never authorizes) and its maxLength admits the
    prefix length; Invalid otherwise.
    """
    if not isinstance(pair.origin_asn, int):
        # AS_SET-originated pairs are excluded upstream; reaching here is a bug.
        raise TypeError("validate() requires a plain-ASN origin")
    covering = index.covering(pair.prefix)
    if not covering:
        return ValidationState.NOT_FOUND
    plen = pair.prefix.prefixlen
    for roa in covering:
        if roa.asn == pair.origin_asn and roa.asn != 0 and plen <= roa.max_length:
            return ValidationState.VALID
    return ValidationState.INVALID
