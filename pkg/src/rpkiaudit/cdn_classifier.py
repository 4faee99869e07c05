"""CDN detection: CNAME-chain heuristic, AS-registry keyword spotting, and
agreement against an external classification."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import IO, Iterable, Mapping, Union

from .diagnostics import Diagnostics
from .dns_resolution import ResolutionResult, ResolutionStatus
from .domain_ingest import normalize_name
from .rib_store import MAX_ASN, PrefixOriginPair

CHAIN_THRESHOLD = 2


@dataclass(slots=True)
class CdnLabel:
    domain: str
    chain_length: int
    by_chain: bool
    by_asn: bool = False
    external: bool | None = None

    def __post_init__(self):
        if self.by_chain != (self.chain_length >= CHAIN_THRESHOLD):
            raise ValueError("by_chain must equal (chain_length >= 2)")


@dataclass(frozen=True, slots=True)
class AsRegistryEntry:
    asn: int
    description: str


@dataclass(frozen=True, slots=True)
class AgreementReport:
    coverage: Fraction
    agree: Fraction | None
    # (heuristic, external) -> count, keys over {0,1} x {0,1}
    confusion: dict[tuple[int, int], int]


def classify_by_chain(result: ResolutionResult) -> CdnLabel:
    """Label a resolved domain CDN-served iff it sits behind >= 2 CNAMEs."""
    if result.status is not ResolutionStatus.OK:
        raise ValueError(f"{result.domain}: classify_by_chain needs an Ok result")
    length = len(result.cname_chain)
    return CdnLabel(result.domain, length, length >= CHAIN_THRESHOLD)


def spot_keywords(
    keywords: Iterable[str], registry: Iterable[AsRegistryEntry]
) -> set[int]:
    """ASNs whose registry description contains any keyword (case-folded).

    A substring match over assignment-list descriptions; by construction a
    lower bound on each operator's AS footprint.
    """
    tokens = [k.strip().lower() for k in keywords if k.strip()]
    if not tokens:
        raise ValueError("keyword list must be nonempty")
    hits: set[int] = set()
    for entry in registry:
        description = entry.description.lower()
        if any(token in description for token in tokens):
            hits.add(entry.asn)
    return hits


def classify_by_asn(pairs: Iterable[PrefixOriginPair], cdn_asns: set[int]) -> bool:
    """True iff any of the domain's origin ASes belongs to a CDN."""
    return any(pair.origin_asn in cdn_asns for pair in pairs)


def compare_external(
    labels: Iterable[CdnLabel], external: Mapping[str, bool]
) -> AgreementReport:
    """Agreement of the chain heuristic with an external classification.

    Coverage is the fraction of labels the external map knows about; the
    agreement fraction and 2x2 confusion counts are computed over that
    subset.  External entries are keyed by domain; a www-prefixed label
    falls back to its base name.
    """
    if not external:
        raise ValueError("external classification map is empty")
    labels = list(labels)
    if not labels:
        raise ValueError("no labels to compare")
    confusion = {(h, e): 0 for h in (0, 1) for e in (0, 1)}
    matched = 0
    agreed = 0
    for label in labels:
        value = external.get(label.domain)
        if value is None and label.domain.startswith("www."):
            value = external.get(label.domain[4:])
        if value is None:
            continue
        matched += 1
        confusion[(int(label.by_chain), int(value))] += 1
        if label.by_chain == value:
            agreed += 1
    coverage = Fraction(matched, len(labels))
    agree = Fraction(agreed, matched) if matched else None
    return AgreementReport(coverage, agree, confusion)


# ---------------------------------------------------------------------------
# Input loaders


def load_keywords(source: Union[str, bytes, IO[bytes], None] = None) -> list[str]:
    """Keyword file: one lowercase token per line, '#' comments.

    With no source, the packaged default list (the well-known CDN operator
    names) is used.
    """
    if source is None:
        text = (
            resources.files("rpkiaudit")
            .joinpath("data/cdn_keywords.txt")
            .read_text("utf-8")
        )
    elif isinstance(source, str):
        text = source
    else:
        data = source if isinstance(source, bytes) else source.read()
        text = data.decode("utf-8")
    out = []
    for line in text.split("\n"):
        token = line.split("#", 1)[0].strip().lower()
        if token:
            out.append(token)
    return out


def parse_as_registry(
    source: Union[str, bytes, IO[bytes]], diag: Diagnostics | None = None
) -> list[AsRegistryEntry]:
    """Parse an AS assignment list, either "ASN  description" lines or
    "asn,description" CSV; the separator is sniffed per line."""
    diag = diag if diag is not None else Diagnostics()
    if isinstance(source, str):
        text = source
    else:
        data = source if isinstance(source, bytes) else source.read()
        text = data.decode("utf-8")
    entries: dict[int, AsRegistryEntry] = {}
    for line in text.split("\n"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        asn_field, description = _split_registry_line(line)
        if asn_field is None:
            diag.count("malformed_registry_lines")
            continue
        token = asn_field.strip()
        if token[:2].upper() == "AS":
            token = token[2:]
        try:
            asn = int(token)
        except ValueError:
            diag.count("malformed_registry_lines")
            continue
        if not 0 <= asn <= MAX_ASN:
            diag.count("malformed_registry_lines")
            continue
        if asn in entries:
            diag.count("duplicate_registry_asns")
            continue
        entries[asn] = AsRegistryEntry(asn, description.strip())
    return [entries[asn] for asn in sorted(entries)]


def _split_registry_line(line: str) -> tuple[str | None, str]:
    comma = line.find(",")
    space = len(line)
    for i, ch in enumerate(line):
        if ch.isspace():
            space = i
            break
    if 0 <= comma < space:
        row = next(csv.reader(io.StringIO(line)), None)
        if not row or len(row) < 2:
            return None, ""
        return row[0], ",".join(row[1:])
    if space == len(line):
        return None, ""
    return line[:space], line[space:]


def load_external_labels(
    source: Union[str, bytes, IO[bytes]], diag: Diagnostics | None = None
) -> dict[str, bool]:
    """External classification CSV: "domain,0|1" per line."""
    diag = diag if diag is not None else Diagnostics()
    if isinstance(source, str):
        text = source
    else:
        data = source if isinstance(source, bytes) else source.read()
        text = data.decode("utf-8")
    out: dict[str, bool] = {}
    for line in text.split("\n"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name_field, sep, flag = line.rpartition(",")
        name = normalize_name(name_field) if sep else None
        if not name or flag.strip() not in ("0", "1"):
            diag.count("malformed_external_lines")
            continue
        out[name] = flag.strip() == "1"
    return out
