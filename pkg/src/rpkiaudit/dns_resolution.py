"""Per-domain A/AAAA/CNAME resolution with fixture replay and live modes.

Fixture replay (JSON-lines of recorded answers) is the first-class path:
it is pure, deterministic and what the offline pipeline runs on.  Live
mode issues separate A and AAAA queries against a configured recursive
resolver and merges the answers.
"""

from __future__ import annotations

import enum
import ipaddress
import json
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Protocol, Union

from . import _dnswire
from .diagnostics import Diagnostics
from .domain_ingest import normalize_name
from .errors import ChainLoopError, FixtureMissError, InsufficientResolversError
from .rib_store import IPAddress

MAX_CNAME_HOPS = 16

DEFAULT_TIMEOUT = 5.0


class ResolutionStatus(enum.Enum):
    OK = "ok"
    NXDOMAIN = "nxdomain"
    SERVFAIL = "servfail"
    TIMEOUT = "timeout"
    EMPTY = "empty"


class Tristate(enum.Enum):
    UNKNOWN = "unknown"
    AGREE = "agree"
    DISAGREE = "disagree"


def addr_sort_key(addr: IPAddress) -> tuple[int, int]:
    return (addr.version, int(addr))


@dataclass(frozen=True, slots=True)
class ResolutionResult:
    domain: str
    resolver_id: str
    cname_chain: tuple[str, ...]
    addresses: frozenset[IPAddress]
    status: ResolutionStatus
    observed_at: int

    def sorted_addresses(self) -> list[IPAddress]:
        return sorted(self.addresses, key=addr_sort_key)


def check_chain(domain: str, chain: Iterable[str]) -> tuple[str, ...]:
    """Validate a CNAME chain: loop-free and within the hop cap."""
    chain = tuple(chain)
    if len(chain) > MAX_CNAME_HOPS:
        raise ChainLoopError(f"{domain}: chain exceeds {MAX_CNAME_HOPS} hops")
    seen = {domain}
    for name in chain:
        if name in seen:
            raise ChainLoopError(f"{domain}: CNAME chain repeats {name}")
        seen.add(name)
    return chain


class Resolver(Protocol):
    resolver_id: str

    def resolve(self, domain: str, timeout: float = DEFAULT_TIMEOUT) -> ResolutionResult:
        ...


def resolve_records(
    domain: str, resolver: "Resolver", timeout: float = DEFAULT_TIMEOUT
) -> ResolutionResult:
    """Resolve one domain through a resolver endpoint and vet the chain.

    Timeouts surface as status=timeout results (that is what fixtures
    record); a looping or over-long CNAME chain raises ChainLoopError so
    the caller can discard and count it.
    """
    if normalize_name(domain) != domain:
        raise ValueError(f"not a normalized DNS name: {domain!r}")
    result = resolver.resolve(domain, timeout)
    check_chain(domain, result.cname_chain)
    return result


# ---------------------------------------------------------------------------
# Fixture replay


class DnsFixture:
    """Recorded (domain, resolver) answers loaded from a JSON-lines file."""

    def __init__(self, diag: Diagnostics | None = None) -> None:
        self._entries: dict[tuple[str, str], ResolutionResult] = {}
        self._diag = diag if diag is not None else Diagnostics()

    @classmethod
    def load(
        cls,
        source: Union[str, Path, bytes, IO[bytes]],
        diag: Diagnostics | None = None,
    ) -> "DnsFixture":
        fixture = cls(diag)
        if isinstance(source, (str, Path)):
            data = Path(source).read_bytes()
        elif isinstance(source, bytes):
            data = source
        else:
            data = source.read()
        for line in data.decode("utf-8").split("\n"):
            line = line.strip()
            if not line:
                continue
            fixture._load_line(line)
        return fixture

    def _load_line(self, line: str) -> None:
        try:
            obj = json.loads(line)
            domain = normalize_name(obj["domain"])
            resolver = str(obj.get("resolver", "fixture"))
            if domain is None:
                raise ValueError(line)
            status = ResolutionStatus(str(obj.get("status", "ok")).lower())
            cnames = tuple(normalize_name(c) for c in obj.get("cnames", []))
            if any(c is None for c in cnames):
                raise ValueError(line)
            addresses = frozenset(
                ipaddress.ip_address(a)
                for a in list(obj.get("a", [])) + list(obj.get("aaaa", []))
            )
            ts = int(obj.get("ts", 0))
        except (ValueError, KeyError, TypeError):
            self._diag.count("malformed_fixture_lines")
            return
        if status is not ResolutionStatus.OK:
            if addresses:
                self._diag.count("fixture_status_conflicts")
            addresses = frozenset()
        elif not addresses:
            status = ResolutionStatus.EMPTY
        self._entries[(domain, resolver)] = ResolutionResult(
            domain, resolver, cnames, addresses, status, ts
        )

    def resolver_ids(self) -> list[str]:
        return sorted({resolver for _, resolver in self._entries})

    def get(self, domain: str, resolver_id: str) -> ResolutionResult:
        try:
            return self._entries[(domain, resolver_id)]
        except KeyError:
            raise FixtureMissError(f"no fixture entry for {domain} @ {resolver_id}")

    def resolver(self, resolver_id: str) -> "FixtureResolver":
        return FixtureResolver(self, resolver_id)


@dataclass(frozen=True, slots=True)
class FixtureResolver:
    fixture: DnsFixture
    resolver_id: str

    def resolve(self, domain: str, timeout: float = DEFAULT_TIMEOUT) -> ResolutionResult:
        return self.fixture.get(domain, self.resolver_id)


# ---------------------------------------------------------------------------
# Live resolution


@dataclass(frozen=True, slots=True)
class LiveResolver:
    resolver_id: str
    ip: str
    port: int = 53

    def resolve(self, domain: str, timeout: float = DEFAULT_TIMEOUT) -> ResolutionResult:
        rcodes: list[int] = []
        answers: list[tuple[str, int, object]] = []
        timeouts = 0
        for qtype in (_dnswire.QTYPE_A, _dnswire.QTYPE_AAAA):
            try:
                rcode, recs = _dnswire.query(self.ip, self.port, domain, qtype, timeout)
            except (OSError, _dnswire.WireError):
                timeouts += 1
                continue
            rcodes.append(rcode)
            answers.extend(recs)
        now = int(time.time())
        if timeouts == 2:
            return ResolutionResult(
                domain, self.resolver_id, (), frozenset(), ResolutionStatus.TIMEOUT, now
            )
        if all(rc == _dnswire.RCODE_NXDOMAIN for rc in rcodes):
            return ResolutionResult(
                domain, self.resolver_id, (), frozenset(), ResolutionStatus.NXDOMAIN, now
            )
        if all(rc not in (_dnswire.RCODE_NOERROR,) for rc in rcodes):
            return ResolutionResult(
                domain, self.resolver_id, (), frozenset(), ResolutionStatus.SERVFAIL, now
            )

        cname_map = {o: v for o, t, v in answers if t == _dnswire.QTYPE_CNAME}
        chain: list[str] = []
        cursor = domain
        while cursor in cname_map and len(chain) <= MAX_CNAME_HOPS:
            cursor = str(cname_map[cursor])
            chain.append(cursor)
        terminal = chain[-1] if chain else domain
        addresses = frozenset(
            v  # type: ignore[misc]
            for o, t, v in answers
            if t in (_dnswire.QTYPE_A, _dnswire.QTYPE_AAAA) and o == terminal
        )
        status = ResolutionStatus.OK if addresses else ResolutionStatus.EMPTY
        return ResolutionResult(
            domain, self.resolver_id, tuple(chain), addresses, status, now
        )


def parse_endpoint(text: str) -> LiveResolver:
    """Parse a "label=ip:port" endpoint entry (port optional, v6 in brackets)."""
    label, sep, rest = text.partition("=")
    if not sep or not label.strip() or not rest.strip():
        raise ValueError(f"expected label=ip[:port], got {text!r}")
    rest = rest.strip()
    if rest.startswith("["):
        host, _, tail = rest[1:].partition("]")
        port = int(tail[1:]) if tail.startswith(":") else 53
    elif rest.count(":") == 1:
        host, _, p = rest.partition(":")
        port = int(p)
    else:
        host, port = rest, 53
    ipaddress.ip_address(host)
    return LiveResolver(label.strip(), host, port)


# ---------------------------------------------------------------------------
# Special-purpose filtering


@dataclass(frozen=True)
class SpecialPurposeTable:
    v4_blocks: tuple[ipaddress.IPv4Network, ...]
    v6_blocks: tuple[ipaddress.IPv6Network, ...]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "SpecialPurposeTable":
        v4: list[ipaddress.IPv4Network] = []
        v6: list[ipaddress.IPv6Network] = []
        for line in lines:
            entry = line.split("#", 1)[0].strip()
            if not entry:
                continue
            network = ipaddress.ip_network(entry)
            (v4 if network.version == 4 else v6).append(network)  # type: ignore[arg-type]
        return cls(tuple(v4), tuple(v6))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SpecialPurposeTable":
        return cls.from_lines(Path(path).read_text("utf-8").split("\n"))

    @classmethod
    def default(cls) -> "SpecialPurposeTable":
        text = (
            resources.files("rpkiaudit")
            .joinpath("data/special_purpose.txt")
            .read_text("utf-8")
        )
        return cls.from_lines(text.split("\n"))

    def contains(self, addr: IPAddress) -> bool:
        blocks = self.v4_blocks if addr.version == 4 else self.v6_blocks
        return any(addr in block for block in blocks)


def filter_special_purpose(
    addresses: Iterable[IPAddress], table: SpecialPurposeTable
) -> tuple[frozenset[IPAddress], frozenset[IPAddress]]:
    """Split addresses into (kept, rejected) by registry-block membership."""
    kept: set[IPAddress] = set()
    rejected: set[IPAddress] = set()
    for addr in addresses:
        (rejected if table.contains(addr) else kept).add(addr)
    return frozenset(kept), frozenset(rejected)


def apply_filter(
    result: ResolutionResult,
    table: SpecialPurposeTable,
    diag: Diagnostics | None = None,
) -> ResolutionResult:
    """Return the result with special-purpose answers removed and counted."""
    kept, rejected = filter_special_purpose(result.addresses, table)
    if rejected and diag is not None:
        diag.count("special_purpose_rejected", len(rejected))
    if not rejected:
        return result
    return replace(result, addresses=kept)


# ---------------------------------------------------------------------------
# Cross-resolver consistency


@dataclass(slots=True)
class ConsistencyReport:
    domain: str
    agree_addresses: bool
    detail: dict[str, tuple[IPAddress, ...]]
    agree_prefix_level: Tristate = field(default=Tristate.UNKNOWN)


def cross_check(results: list[ResolutionResult]) -> ConsistencyReport:
    """Compare kept-address sets for one domain across resolvers.

    Prefix-level agreement stays Unknown here; it only becomes decidable
    once addresses have been mapped to prefixes.
    """
    domains = {r.domain for r in results}
    if len(domains) != 1:
        raise ValueError(f"cross_check needs results for one domain, got {domains}")
    ok = [r for r in results if r.status is ResolutionStatus.OK]
    if len(ok) < 2:
        raise InsufficientResolversError(
            f"{domains.pop()}: {len(ok)} Ok result(s), need at least 2"
        )
    sets = {frozenset(r.addresses) for r in ok}
    detail = {
        r.resolver_id: tuple(r.sorted_addresses()) for r in sorted(ok, key=lambda r: r.resolver_id)
    }
    return ConsistencyReport(domains.pop(), len(sets) == 1, detail)
