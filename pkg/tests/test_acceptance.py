"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines inline.
"""

import contextlib
import ipaddress
import random
import sys
import time
from fractions import Fraction

import numpy as np

import mrt_builder as mb
from e2e_support import ALL_ARTIFACTS, BIN_CSVS, EXPECTED_DIR, e2e_config
from rpkiaudit.analytics import CoverageClass, domain_coverage
from rpkiaudit.cdn_classifier import classify_by_chain
from rpkiaudit.cli import run_stage
from rpkiaudit.diagnostics import Diagnostics
from rpkiaudit.dns_resolution import ResolutionResult, ResolutionStatus
from rpkiaudit.rib_store import (
    PrefixOriginPair,
    RibEntry,
    build_trie,
    covering_pairs,
    parse_mrt,
)
from rpkiaudit.roa_validation import (
    RoaPayload,
    ValidationState,
    build_roa_index,
    validate,
)


@contextlib.contextmanager
def criterion(name):
    ok = False
    try:
        yield
        ok = True
    finally:
        print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}", file=sys.stderr)


# ---------------------------------------------------------------------------
# shared randomized generators (toy space: everything inside 10.0.0.0/8)


def random_roa(rng):
    plen = rng.randint(8, 24)
    net = (10 << 24) | (rng.getrandbits(24) & ~((1 << (32 - plen)) - 1) & 0xFFFFFF)
    return RoaPayload(
        rng.choice([0, 64496, 64497, 64498, 64499]),
        ipaddress.ip_network((net, plen)),
        rng.randint(plen, min(plen + 8, 32)),
    )


def random_pair(rng):
    plen = rng.randint(8, 28)
    net = (10 << 24) | (rng.getrandbits(24) & ~((1 << (32 - plen)) - 1) & 0xFFFFFF)
    return PrefixOriginPair(
        ipaddress.ip_network((net, plen)), rng.choice([64496, 64497, 64498, 64500])
    )


def oracle_validate(pair, roas):
    covering = [
        r
        for r in roas
        if r.prefix.version == pair.prefix.version and pair.prefix.subnet_of(r.prefix)
    ]
    if not covering:
        return ValidationState.NOT_FOUND
    for r in covering:
        if r.asn == pair.origin_asn and r.asn != 0 and pair.prefix.prefixlen <= r.max_length:
            return ValidationState.VALID
    return ValidationState.INVALID


def test_criterion_1_rfc6811_oracle_suite():
    with criterion("1 RFC 6811 oracle suite (10k instances, <10s)"):
        rng = random.Random(0x6811)
        started = time.perf_counter()
        mismatches = 0
        instances = 0
        for _ in range(250):
            roas = {random_roa(rng) for _ in range(rng.randint(1, 12))}
            index = build_roa_index(roas)
            for _ in range(40):
                pair = random_pair(rng)
                instances += 1
                if validate(pair, index) is not oracle_validate(pair, roas):
                    mismatches += 1
        elapsed = time.perf_counter() - started
        assert instances >= 10_000
        assert mismatches == 0
        assert elapsed < 10.0, f"oracle suite took {elapsed:.2f}s"


def test_criterion_2_monotonicity_suite():
    with criterion("2 monotonicity under ROA insertion (1k sequences)"):
        rng = random.Random(0x140C)
        violations = 0
        for _ in range(1000):
            pairs = [random_pair(rng) for _ in range(4)]
            roa_set = set()
            states = {p: validate(p, build_roa_index(roa_set)) for p in pairs}
            for _ in range(rng.randint(1, 8)):
                roa_set.add(random_roa(rng))
                index = build_roa_index(roa_set)
                for p in pairs:
                    before, after = states[p], validate(p, index)
                    if before is ValidationState.VALID and after is not ValidationState.VALID:
                        violations += 1
                    if before is not ValidationState.NOT_FOUND and after is ValidationState.NOT_FOUND:
                        violations += 1
                    states[p] = after
        assert violations == 0


def test_criterion_3_trie_oracle_suite():
    with criterion("3 trie vs linear scan (10k x 10k, mean <10us)"):
        rng = random.Random(0x7219)
        entries = []
        for _ in range(10_000):
            plen = rng.randint(6, 28)
            net = rng.getrandbits(32) & ~((1 << (32 - plen)) - 1)
            origin = rng.randint(1, 70_000)
            entries.append(
                RibEntry(ipaddress.ip_network((net, plen)), (65_000, origin), origin)
            )
        trie = build_trie(entries)

        addresses = [rng.getrandbits(32) for _ in range(5_000)]
        addresses += [
            int(e.prefix.network_address) | rng.getrandbits(32 - e.prefix.prefixlen)
            for e in rng.sample(entries, 5_000)
        ]
        ip_objects = [ipaddress.IPv4Address(a) for a in addresses]

        # vectorized independent linear scan
        nets = np.array([int(e.prefix.network_address) for e in entries], dtype=np.uint32)
        masks = np.array(
            [0xFFFFFFFF ^ ((1 << (32 - e.prefix.prefixlen)) - 1) for e in entries],
            dtype=np.uint32,
        )
        started = time.perf_counter()
        results = [covering_pairs(ip, trie) for ip in ip_objects]
        mean_lookup = (time.perf_counter() - started) / len(ip_objects)

        mismatches = 0
        for addr, found in zip(addresses, results):
            hits = np.nonzero((np.uint32(addr) & masks) == nets)[0]
            expected = {(entries[i].prefix, entries[i].origin) for i in hits}
            if {(p.prefix, p.origin_asn) for p in found} != expected:
                mismatches += 1
        assert mismatches == 0
        assert mean_lookup < 10e-6, f"mean lookup {mean_lookup * 1e6:.2f}us"


def test_criterion_4_mrt_conformance():
    with criterion("4 MRT TABLE_DUMP_V2 conformance fixture"):
        stream = (
            mb.peer_index_table()
            + mb.simple_rib("93.184.216.0/24", [3320, 15133])
            + mb.simple_rib("203.0.113.0/24", [64496, 4_200_000_001])
            + mb.simple_rib("198.51.100.0/24", [64496, 64497], as_size=2)
            + mb.simple_rib("2001:db8:42::/48", [6939, 64511])
            + mb.simple_rib("192.0.2.0/24", [100, {64500, 64501}])
            + mb.simple_rib("10.64.0.0/12", [65000, 65001], extended=True)
            + mb.mrt_record(mb.TABLE_DUMP_V2, mb.RIB_IPV4_UNICAST, b"\x00" * 64)[:30]
        )
        diag = Diagnostics()
        entries = parse_mrt(stream, diag)
        expected = [
            RibEntry(ipaddress.ip_network("93.184.216.0/24"), (3320, 15133), 15133),
            RibEntry(ipaddress.ip_network("203.0.113.0/24"), (64496, 4_200_000_001), 4_200_000_001),
            RibEntry(ipaddress.ip_network("198.51.100.0/24"), (64496, 64497), 64497),
            RibEntry(ipaddress.ip_network("2001:db8:42::/48"), (6939, 64511), 64511),
            RibEntry(ipaddress.ip_network("192.0.2.0/24"), (100, frozenset({64500, 64501})), None),
            RibEntry(ipaddress.ip_network("10.64.0.0/12"), (65000, 65001), 65001),
        ]
        assert entries == expected
        assert diag.get("mrt_skipped_records") == 1


def test_criterion_5_coverage_arithmetic():
    with criterion("5 coverage arithmetic (top-sites fixture, exact rationals)"):
        def states(valid, invalid, notfound):
            kinds = (
                [ValidationState.VALID] * valid
                + [ValidationState.INVALID] * invalid
                + [ValidationState.NOT_FOUND] * notfound
            )
            return [
                (PrefixOriginPair(ipaddress.ip_network(f"10.{i}.0.0/24"), 64500), s)
                for i, s in enumerate(kinds)
            ]

        full = domain_coverage("facebook.com", states(3, 0, 0))
        assert full.covered_fraction == Fraction(3, 3) == 1
        assert full.classification is CoverageClass.FULL

        partial = domain_coverage("huffingtonpost.com", states(1, 0, 2))
        assert partial.covered_fraction == Fraction(1, 3)
        assert partial.classification is CoverageClass.PARTIAL

        none = domain_coverage("huffingtonpost.com", states(0, 0, 3))
        assert none.covered_fraction == Fraction(0, 3) == 0
        assert none.classification is CoverageClass.NONE

        sixty = domain_coverage("foo.bar", states(2, 1, 2))
        assert sixty.covered_fraction == Fraction(3, 5)
        assert float(sixty.covered_fraction) == 0.6


def test_criterion_6_end_to_end_synthetic_audit(tmp_path):
    with criterion("6 end-to-end synthetic audit (byte-exact bins, <5s)"):
        out = tmp_path / "audit"
        started = time.perf_counter()
        assert run_stage("all", e2e_config(out)) == 0
        elapsed = time.perf_counter() - started
        for name in BIN_CSVS:
            produced = (out / name).read_bytes()
            committed = (EXPECTED_DIR / name).read_bytes()
            assert produced == committed, f"{name} differs from committed expectation"
        assert elapsed < 5.0, f"pipeline took {elapsed:.2f}s"


def test_criterion_7_cdn_heuristic_boundary():
    with criterion("7 CDN chain-length boundary 0/1/2/3 -> F/F/T/T"):
        def result(chain):
            return ResolutionResult(
                "site.example",
                "fixture",
                tuple(chain),
                frozenset({ipaddress.ip_address("203.0.113.1")}),
                ResolutionStatus.OK,
                0,
            )

        outcomes = [
            classify_by_chain(result([f"hop{i}.example" for i in range(n)])).by_chain
            for n in (0, 1, 2, 3)
        ]
        assert outcomes == [False, False, True, True]

        huffpo = ResolutionResult(
            "www.huffingtonpost.com",
            "fixture",
            ("www.huffingtonpost.com.edgesuite.net", "a495.g.akamai.net"),
            frozenset({ipaddress.ip_address("212.201.100.136")}),
            ResolutionStatus.OK,
            0,
        )
        assert classify_by_chain(huffpo).by_chain is True


def test_criterion_8_determinism(tmp_path):
    with criterion("8 determinism: consecutive runs byte-identical"):
        first = tmp_path / "one"
        second = tmp_path / "two"
        assert run_stage("all", e2e_config(first)) == 0
        assert run_stage("all", e2e_config(second)) == 0
        for name in ALL_ARTIFACTS:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name
