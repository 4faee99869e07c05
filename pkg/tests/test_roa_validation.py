import ipaddress
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpkiaudit.diagnostics import Diagnostics
from rpkiaudit.rib_store import PrefixOriginPair
from rpkiaudit.roa_validation import (
    RoaFormat,
    RoaPayload,
    ValidationState,
    build_roa_index,
    load_roas,
    validate,
)


def oracle_validate(pair, roas):
    """Exhaustive-scan reference of the three-state decision procedure.

    Covering test via ipaddress.subnet_of, a different mechanism from the
    trie walk under test.
    """
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


def roa(asn, prefix, max_length=None, ta="other"):
    network = ipaddress.ip_network(prefix)
    return RoaPayload(asn, network, max_length if max_length is not None else network.prefixlen, ta)


def pair(prefix, asn):
    return PrefixOriginPair(ipaddress.ip_network(prefix), asn)


# toy space: everything inside 10.0.0.0/8 with a handful of ASNs, so random
# instances actually collide
def random_roa_set(rng, size):
    out = set()
    for _ in range(size):
        plen = rng.randint(8, 24)
        net = (10 << 24) | (rng.getrandbits(24) & ~((1 << (32 - plen)) - 1) & 0xFFFFFF)
        prefix = ipaddress.ip_network((net, plen))
        max_length = rng.randint(plen, min(plen + 8, 32))
        out.add(RoaPayload(rng.choice([0, 64496, 64497, 64498, 64499]), prefix, max_length))
    return out


def random_pair(rng):
    plen = rng.randint(8, 28)
    net = (10 << 24) | (rng.getrandbits(24) & ~((1 << (32 - plen)) - 1) & 0xFFFFFF)
    return PrefixOriginPair(
        ipaddress.ip_network((net, plen)), rng.choice([64496, 64497, 64498, 64500])
    )


class TestValidate:
    def test_valid_within_maxlength(self):
        roas = {roa(64500, "10.0.0.0/16", 24)}
        p = pair("10.0.1.0/24", 64500)
        assert oracle_validate(p, roas) is ValidationState.VALID
        assert validate(p, build_roa_index(roas)) is ValidationState.VALID

    def test_invalid_exceeds_maxlength(self):
        roas = {roa(64500, "10.0.0.0/16", 24)}
        p = pair("10.0.1.0/25", 64500)
        assert oracle_validate(p, roas) is ValidationState.INVALID
        assert validate(p, build_roa_index(roas)) is ValidationState.INVALID

    def test_invalid_wrong_origin(self):
        roas = {roa(64500, "10.0.0.0/16", 24)}
        p = pair("10.0.1.0/24", 64501)
        assert oracle_validate(p, roas) is ValidationState.INVALID
        assert validate(p, build_roa_index(roas)) is ValidationState.INVALID

    def test_notfound_without_covering_roa(self):
        index = build_roa_index({roa(64500, "10.0.0.0/16", 24)})
        assert validate(pair("192.0.2.0/24", 64500), index) is ValidationState.NOT_FOUND

    def test_as0_only_covering_roa_is_invalid(self):
        index = build_roa_index({roa(0, "10.0.0.0/8", 32)})
        assert validate(pair("10.9.0.0/16", 0), index) is ValidationState.INVALID
        assert validate(pair("10.9.0.0/16", 64500), index) is ValidationState.INVALID

    def test_one_matching_roa_among_many_suffices(self):
        roas = {
            roa(64501, "10.0.0.0/8", 16),
            roa(64500, "10.0.0.0/16", 24),
            roa(0, "10.0.0.0/12", 24),
        }
        assert validate(pair("10.0.4.0/24", 64500), build_roa_index(roas)) is ValidationState.VALID

    def test_as_set_marker_origin_rejected(self):
        index = build_roa_index(set())
        broken = pair("10.0.0.0/24", 64500)
        object.__setattr__(broken, "origin_asn", None)
        with pytest.raises(TypeError):
            validate(broken, index)

    def test_exact_prefix_roa_covers_itself(self):
        index = build_roa_index({roa(64500, "10.0.0.0/24")})
        assert validate(pair("10.0.0.0/24", 64500), index) is ValidationState.VALID

    def test_three_state_totality_randomized(self):
        rng = random.Random(1)
        roas = random_roa_set(rng, 50)
        index = build_roa_index(roas)
        for _ in range(200):
            state = validate(random_pair(rng), index)
            assert state in (
                ValidationState.VALID,
                ValidationState.INVALID,
                ValidationState.NOT_FOUND,
            )

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(2)
        roas = random_roa_set(rng, 300)
        index = build_roa_index(roas)
        for _ in range(500):
            p = random_pair(rng)
            assert validate(p, index) is oracle_validate(p, roas)


@st.composite
def roa_strategy(draw):
    plen = draw(st.integers(8, 24))
    net = (10 << 24) | (draw(st.integers(0, 2**24 - 1)) & ~((1 << (32 - plen)) - 1) & 0xFFFFFF)
    max_length = draw(st.integers(plen, min(plen + 8, 32)))
    asn = draw(st.sampled_from([0, 64496, 64497, 64498]))
    return RoaPayload(asn, ipaddress.ip_network((net, plen)), max_length)


@st.composite
def pair_strategy(draw):
    plen = draw(st.integers(8, 28))
    net = (10 << 24) | (draw(st.integers(0, 2**24 - 1)) & ~((1 << (32 - plen)) - 1) & 0xFFFFFF)
    asn = draw(st.sampled_from([64496, 64497, 64499]))
    return PrefixOriginPair(ipaddress.ip_network((net, plen)), asn)


class TestMonotonicity:
    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(roa_strategy(), min_size=1, max_size=10),
        st.lists(pair_strategy(), min_size=1, max_size=5),
    )
    def test_roa_addition_never_unvalidates(self, roa_seq, pairs):
        current: set[RoaPayload] = set()
        previous = {p: validate(p, build_roa_index(current)) for p in pairs}
        for r in roa_seq:
            current.add(r)
            index = build_roa_index(current)
            for p in pairs:
                state = validate(p, index)
                before = previous[p]
                if before is ValidationState.VALID:
                    assert state is ValidationState.VALID
                assert not (
                    before in (ValidationState.VALID, ValidationState.INVALID)
                    and state is ValidationState.NOT_FOUND
                )
                previous[p] = state

    @settings(max_examples=100, deadline=None)
    @given(st.lists(roa_strategy(), max_size=12), pair_strategy())
    def test_index_matches_exhaustive_scan(self, roas, p):
        assert validate(p, build_roa_index(roas)) is oracle_validate(p, set(roas))


class TestLoadRoas:
    def test_csv_basic(self):
        out = load_roas(b"AS64500,10.0.0.0/16,24")
        assert out == {roa(64500, "10.0.0.0/16", 24)}

    def test_csv_bad_maxlength_rejected(self):
        diag = Diagnostics()
        assert load_roas(b"AS64500,10.0.0.0/16,8", diag=diag) == set()
        assert diag.get("malformed_roa_rows") == 1
        assert diag.get("empty_roa_set") == 1

    def test_empty_file_warns(self):
        diag = Diagnostics()
        assert load_roas(b"", diag=diag) == set()
        assert diag.get("empty_roa_set") == 1

    def test_csv_header_autodetected(self):
        out = load_roas(b"ASN,prefix,maxLength,TA\nAS64500,10.0.0.0/16,24,ripe")
        assert out == {roa(64500, "10.0.0.0/16", 24, "ripe")}

    def test_csv_numeric_asn_and_default_maxlength(self):
        out = load_roas(b"64500,10.0.0.0/16\n64500,10.0.0.0/16,")
        assert out == {roa(64500, "10.0.0.0/16", 16)}

    def test_csv_trust_anchor_normalized(self):
        out = load_roas(b"AS1,10.0.0.0/8,8,RIPE\nAS2,10.0.0.0/8,8,weird")
        anchors = {r.asn: r.trust_anchor for r in out}
        assert anchors == {1: "ripe", 2: "other"}

    def test_csv_duplicates_deduplicated(self):
        out = load_roas(b"AS64500,10.0.0.0/16,24\nAS64500,10.0.0.0/16,24")
        assert len(out) == 1

    def test_csv_host_bits_rejected(self):
        diag = Diagnostics()
        assert load_roas(b"AS64500,10.0.0.1/16,24", diag=diag) == set()
        assert diag.get("malformed_roa_rows") == 1

    def test_json_basic(self):
        doc = json.dumps(
            [
                {"asn": "AS64500", "prefix": "10.0.0.0/16", "maxLength": 24, "ta": "apnic"},
                {"asn": 64501, "prefix": "2001:db8::/32"},
            ]
        )
        out = load_roas(doc.encode(), RoaFormat.JSON)
        assert roa(64500, "10.0.0.0/16", 24, "apnic") in out
        assert roa(64501, "2001:db8::/32", 32) in out

    def test_json_malformed_rows_counted(self):
        diag = Diagnostics()
        doc = b'[{"asn": "ASX", "prefix": "10.0.0.0/8"}, {"prefix": "10.0.0.0/8"}]'
        assert load_roas(doc, RoaFormat.JSON, diag) == set()
        assert diag.get("malformed_roa_rows") == 2


class TestRoaIndex:
    def test_empty_index_all_queries_empty(self):
        index = build_roa_index(set())
        assert index.covering(ipaddress.ip_network("10.0.0.0/24")) == set()

    def test_same_prefix_different_asns_both_returned(self):
        roas = {roa(64500, "10.0.0.0/16", 24), roa(64501, "10.0.0.0/16", 24)}
        index = build_roa_index(roas)
        assert index.covering(ipaddress.ip_network("10.0.1.0/24")) == roas

    def test_covering_matches_scan_randomized(self):
        rng = random.Random(3)
        roas = random_roa_set(rng, 500)
        index = build_roa_index(roas)
        for _ in range(300):
            p = random_pair(rng)
            expected = {r for r in roas if p.prefix.subnet_of(r.prefix)}
            assert index.covering(p.prefix) == expected

    def test_more_specific_roa_does_not_cover_less_specific_query(self):
        index = build_roa_index({roa(64500, "10.0.0.0/24", 24)})
        assert index.covering(ipaddress.ip_network("10.0.0.0/16")) == set()


class TestRoaPayloadInvariants:
    def test_maxlength_below_prefixlen_rejected(self):
        with pytest.raises(ValueError):
            roa(64500, "10.0.0.0/16", 8)

    def test_maxlength_above_family_max_rejected(self):
        with pytest.raises(ValueError):
            roa(64500, "10.0.0.0/16", 33)
        with pytest.raises(ValueError):
            roa(64500, "2001:db8::/32", 129)

    def test_asn_range_enforced(self):
        with pytest.raises(ValueError):
            roa(2**32, "10.0.0.0/16", 24)
