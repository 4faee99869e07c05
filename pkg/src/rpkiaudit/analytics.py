"""Per-domain coverage, rank-binned statistics, variant overlap and reports.

All fractions are exact rationals; floats appear only when serializing
(6 decimal places).  A pair counts as covered iff its validation state is
anything other than not-found.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .cdn_classifier import CdnLabel
from .domain_ingest import RankBin, bin_for_rank
from .rib_store import IPNetwork, PrefixOriginPair
from .roa_validation import ValidationState

PairState = tuple[PrefixOriginPair, ValidationState]


class CoverageClass(enum.Enum):
    NONE = "none"
    PARTIAL = "partial"
    FULL = "full"
    NO_DATA = "nodata"


_CLASS_MARK = {
    CoverageClass.FULL: "✓",     # check mark
    CoverageClass.PARTIAL: "◖",  # half circle
    CoverageClass.NONE: "✗",     # cross
}


@dataclass(frozen=True)
class DomainCoverage:
    domain: str
    pairs: tuple[PairState, ...]
    covered_fraction: Fraction
    valid_fraction: Fraction
    invalid_fraction: Fraction
    notfound_fraction: Fraction
    classification: CoverageClass

    @property
    def total_pairs(self) -> int:
        return len(self.pairs)

    @property
    def covered_count(self) -> int:
        return sum(1 for _, s in self.pairs if s is not ValidationState.NOT_FOUND)


def domain_coverage(domain: str, states: Iterable[PairState]) -> DomainCoverage:
    """Fold per-pair validation states into one per-domain coverage record.

    States must already be deduplicated on pair; conflicting duplicates are
    rejected, identical ones collapsed.
    """
    by_pair: dict[PrefixOriginPair, ValidationState] = {}
    for pair, state in states:
        if by_pair.get(pair, state) is not state:
            raise ValueError(f"{domain}: pair {pair} has conflicting states")
        by_pair[pair] = state
    pairs = tuple(
        sorted(by_pair.items(), key=lambda item: item[0].sort_key())
    )
    n = len(pairs)
    if n == 0:
        return DomainCoverage(
            domain, (), Fraction(0), Fraction(0), Fraction(0), Fraction(1),
            CoverageClass.NO_DATA,
        )
    valid = sum(1 for _, s in pairs if s is ValidationState.VALID)
    invalid = sum(1 for _, s in pairs if s is ValidationState.INVALID)
    notfound = n - valid - invalid
    covered = Fraction(valid + invalid, n)
    if covered == 1:
        cls = CoverageClass.FULL
    elif covered == 0:
        cls = CoverageClass.NONE
    else:
        cls = CoverageClass.PARTIAL
    return DomainCoverage(
        domain, pairs, covered,
        Fraction(valid, n), Fraction(invalid, n), Fraction(notfound, n), cls,
    )


@dataclass(frozen=True, slots=True)
class OverlapStat:
    domain: str
    overlap: Optional[Fraction]  # None = no data on either variant


def prefix_overlap(
    domain: str,
    www_prefixes: Iterable[IPNetwork],
    base_prefixes: Iterable[IPNetwork],
) -> OverlapStat:
    """Jaccard similarity of the two variants' prefix sets."""
    www = set(www_prefixes)
    base = set(base_prefixes)
    if not www and not base:
        return OverlapStat(domain, None)
    return OverlapStat(domain, Fraction(len(www & base), len(www | base)))


@dataclass(frozen=True)
class BinStat:
    bin: RankBin
    mean_covered: Optional[Fraction]
    mean_valid: Optional[Fraction]
    mean_invalid: Optional[Fraction]
    mean_notfound: Optional[Fraction]
    cdn_fraction: Optional[Fraction]
    domain_count: int
    data_count: int


def _label_map(labels: Union[Iterable[CdnLabel], Mapping[str, bool]]) -> Mapping[str, bool]:
    if isinstance(labels, Mapping):
        return labels
    return {label.domain: label.by_chain for label in labels}


def bin_aggregate(
    coverages: Iterable[tuple[int, DomainCoverage]],
    labels: Union[Iterable[CdnLabel], Mapping[str, bool]],
    bins: Sequence[RankBin],
) -> list[BinStat]:
    """Arithmetic bin means of the per-domain fractions.

    NoData domains are excluded from the means but counted in the bin; the
    cdn fraction is the share of binned domains whose chain label is true
    (unlabeled domains count as not CDN).
    """
    by_chain = _label_map(labels)
    bin_list = list(bins)
    members: dict[int, list[tuple[DomainCoverage, bool]]] = {
        b.index: [] for b in bin_list
    }
    for rank, cov in coverages:
        rank_bin = bin_for_rank(bin_list, rank)
        members[rank_bin.index].append((cov, by_chain.get(cov.domain, False)))

    stats = []
    for rank_bin in bin_list:
        rows = members[rank_bin.index]
        with_data = [c for c, _ in rows if c.classification is not CoverageClass.NO_DATA]
        cdn_count = sum(1 for _, is_cdn in rows if is_cdn)
        n_data = len(with_data)
        if n_data:
            mean = lambda xs: sum(xs, Fraction(0)) / n_data  # noqa: E731
            stats.append(
                BinStat(
                    rank_bin,
                    mean([c.covered_fraction for c in with_data]),
                    mean([c.valid_fraction for c in with_data]),
                    mean([c.invalid_fraction for c in with_data]),
                    mean([c.notfound_fraction for c in with_data]),
                    Fraction(cdn_count, len(rows)),
                    len(rows),
                    n_data,
                )
            )
        else:
            cdn = Fraction(cdn_count, len(rows)) if rows else None
            stats.append(BinStat(rank_bin, None, None, None, None, cdn, len(rows), 0))
    return stats


def cdn_conditional_rates(
    coverages: Iterable[tuple[int, DomainCoverage]],
    labels: Union[Iterable[CdnLabel], Mapping[str, bool]],
    bins: Sequence[RankBin],
) -> tuple[list[BinStat], list[BinStat]]:
    """(CDN-only, all-domains) bin series under the chain label."""
    by_chain = _label_map(labels)
    coverages = list(coverages)
    cdn_only = [(r, c) for r, c in coverages if by_chain.get(c.domain, False)]
    return (
        bin_aggregate(cdn_only, by_chain, bins),
        bin_aggregate(coverages, by_chain, bins),
    )


@dataclass(frozen=True)
class ReportRow:
    rank: int
    domain: str
    www: Optional[DomainCoverage]
    base: Optional[DomainCoverage]

    @staticmethod
    def _cell(cov: Optional[DomainCoverage]) -> str:
        if cov is None or cov.classification is CoverageClass.NO_DATA:
            return "n/a"
        mark = _CLASS_MARK[cov.classification]
        return f"{mark}({cov.covered_count}/{cov.total_pairs})"

    @property
    def www_cell(self) -> str:
        return self._cell(self.www)

    @property
    def base_cell(self) -> str:
        return self._cell(self.base)


def coverage_report(
    variants: Iterable[tuple[int, str, Optional[DomainCoverage], Optional[DomainCoverage]]],
    top_n: int = 10,
) -> list[ReportRow]:
    """Lowest-ranked domains with Partial or Full coverage on either variant.

    Input rows are (rank, base name, www coverage, base coverage); a missing
    or unresolved variant renders as "n/a".
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    interesting = (CoverageClass.PARTIAL, CoverageClass.FULL)
    rows = [
        ReportRow(rank, name, www, base)
        for rank, name, www, base in variants
        if (www is not None and www.classification in interesting)
        or (base is not None and base.classification in interesting)
    ]
    rows.sort(key=lambda r: r.rank)
    return rows[:top_n]


@dataclass(frozen=True)
class OverallRates:
    domains: int
    domains_with_data: int
    total_pairs: int
    covered_pairs: int
    domain_weighted_covered: Optional[Fraction]
    pair_weighted_covered: Optional[Fraction]


def overall_rates(coverages: Iterable[DomainCoverage]) -> OverallRates:
    """Mean coverage both per-domain (each domain weighs 1) and per-pair."""
    covs = list(coverages)
    with_data = [c for c in covs if c.classification is not CoverageClass.NO_DATA]
    total_pairs = sum(c.total_pairs for c in with_data)
    covered_pairs = sum(c.covered_count for c in with_data)
    domain_weighted = (
        sum((c.covered_fraction for c in with_data), Fraction(0)) / len(with_data)
        if with_data
        else None
    )
    pair_weighted = Fraction(covered_pairs, total_pairs) if total_pairs else None
    return OverallRates(
        len(covs), len(with_data), total_pairs, covered_pairs,
        domain_weighted, pair_weighted,
    )


# ---------------------------------------------------------------------------
# Serialization (floats only here, 6 decimal places)


def fraction_to_float(value: Optional[Fraction]) -> Optional[float]:
    return None if value is None else round(float(value), 6)


def format_fraction(value: Optional[Fraction]) -> str:
    return "" if value is None else f"{float(value):.6f}"
