"""Staged, resumable pipeline driver.

Each stage reads the previous stage's on-disk artifacts and writes its own,
so expensive inputs (DNS campaigns, RIB parses) are cached between runs.
Artifacts are canonically sorted: identical inputs give identical bytes.

Exit codes: 0 success, 1 usage error, 2 missing input or missing stage
dependency, 3 data error (inputs parsed but nothing usable).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import ipaddress
import json
import logging
import os
import sys
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

from . import analytics, cdn_classifier, dns_resolution, domain_ingest, rib_store, roa_validation
from .analytics import CoverageClass, DomainCoverage, format_fraction
from .diagnostics import Diagnostics
from .dns_resolution import DnsFixture, ResolutionStatus, SpecialPurposeTable
from .domain_ingest import ListFormat, Variant
from .errors import (
    AuditError,
    BadMagicError,
    ChainLoopError,
    DataError,
    DuplicateRankError,
    EmptyInputError,
    FixtureMissError,
    InsufficientResolversError,
    MissingInputError,
    StageDependencyMissingError,
    UsageError,
)
from .rib_store import PrefixOriginPair
from .roa_validation import RoaFormat, ValidationState

log = logging.getLogger("rpkiaudit")

STAGES = ("resolve", "map", "validate", "classify", "analyze", "report")

CONFIG_ENV_VAR = "RPKIAUDIT_CONFIG"

_CONFIG_KEYS = {
    "domain_list": "domain_list_path",
    "domain_list_format": "domain_list_format",
    "dns_fixture": "fixture_dns_path",
    "resolvers": "resolvers",
    "primary_resolver": "primary_resolver",
    "special_purpose_table": "special_purpose_table_path",
    "ribs": "rib_paths",
    "roas": "roa_path",
    "roa_format": "roa_format",
    "keywords": "keyword_path",
    "as_registry": "as_registry_path",
    "external_labels": "external_labels_path",
    "bin_size": "bin_size",
    "top_n": "top_n",
    "timeout": "timeout",
    "max_inflight": "max_inflight",
    "resolver_qps": "resolver_qps",
    "output_dir": "output_dir",
}


@dataclass
class PipelineConfig:
    domain_list_path: Optional[str] = None
    domain_list_format: str = "csv_rank_domain"
    fixture_dns_path: Optional[str] = None
    resolvers: list[str] = field(default_factory=list)
    primary_resolver: Optional[str] = None
    special_purpose_table_path: Optional[str] = None
    rib_paths: list[str] = field(default_factory=list)
    roa_path: Optional[str] = None
    roa_format: Optional[str] = None
    keyword_path: Optional[str] = None
    as_registry_path: Optional[str] = None
    external_labels_path: Optional[str] = None
    bin_size: int = 10000
    top_n: int = 10
    timeout: float = 5.0
    max_inflight: int = 16
    resolver_qps: float = 0.0
    output_dir: str = "out"

    @classmethod
    def from_file(cls, path: str) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text("utf-8"))
        except FileNotFoundError:
            raise MissingInputError(path, "config file")
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path}: {exc}")
        if not isinstance(doc, dict):
            raise UsageError(f"config {path}: expected a JSON object")
        cfg = cls()
        for key, value in doc.items():
            attr = _CONFIG_KEYS.get(key)
            if attr is None:
                raise UsageError(f"config {path}: unknown key {key!r}")
            setattr(cfg, attr, value)
        return cfg

    def validated(self) -> "PipelineConfig":
        if isinstance(self.rib_paths, str):
            self.rib_paths = [self.rib_paths]
        if isinstance(self.resolvers, str):
            self.resolvers = [self.resolvers]
        if self.bin_size < 1:
            raise UsageError("bin_size must be >= 1")
        if self.top_n < 1:
            raise UsageError("top_n must be >= 1")
        return self

    def out(self, name: str) -> Path:
        return Path(self.output_dir) / name


# ---------------------------------------------------------------------------
# artifact I/O helpers


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    lines = [json.dumps(row, sort_keys=True, separators=(",", ":")) for row in rows]
    _write_text(path, "".join(line + "\n" for line in lines))


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    for line in path.read_text("utf-8").split("\n"):
        line = line.strip()
        if line:
            rows.append(json.loads(line))
    return rows


def _write_diag(cfg: PipelineConfig, stage: str, diag: Diagnostics) -> None:
    _write_text(cfg.out(f"{stage}_diagnostics.json"), diag.to_json())


def _require_file(path: Optional[str], what: str) -> Path:
    if not path:
        raise MissingInputError(f"<{what}>", what)
    p = Path(path)
    if not p.exists():
        raise MissingInputError(str(p), what)
    return p


def _require_artifact(cfg: PipelineConfig, name: str, stage: str) -> Path:
    path = cfg.out(name)
    if not path.exists():
        raise StageDependencyMissingError(stage, str(path))
    return path


# ---------------------------------------------------------------------------
# resolve


class _RateLimiter:
    """Serializes queries to one resolver at a fixed minimum interval."""

    def __init__(self, qps: float):
        self._interval = 1.0 / qps if qps > 0 else 0.0
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        if not self._interval:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(self._next, now)
            self._next = slot + self._interval
        if slot > now:
            time.sleep(slot - now)


def _load_special_table(cfg: PipelineConfig) -> SpecialPurposeTable:
    if cfg.special_purpose_table_path:
        return SpecialPurposeTable.load(
            _require_file(cfg.special_purpose_table_path, "special-purpose table")
        )
    return SpecialPurposeTable.default()


def _result_row(rank: int, variant: Variant, res) -> dict:
    return {
        "rank": rank,
        "domain": res.domain,
        "variant": variant.value,
        "resolver": res.resolver_id,
        "cnames": list(res.cname_chain),
        "addresses": [str(a) for a in res.sorted_addresses()],
        "status": res.status.value,
        "ts": res.observed_at,
    }


def stage_resolve(cfg: PipelineConfig) -> None:
    diag = Diagnostics()
    list_path = _require_file(cfg.domain_list_path, "domain list")
    try:
        fmt = ListFormat(cfg.domain_list_format)
    except ValueError:
        raise UsageError(f"unknown domain list format {cfg.domain_list_format!r}")
    records = domain_ingest.load_domain_list(list_path.read_bytes(), fmt, diag)
    table = _load_special_table(cfg)

    if cfg.fixture_dns_path:
        fixture = DnsFixture.load(_require_file(cfg.fixture_dns_path, "DNS fixture"), diag)
        labels = fixture.resolver_ids()
        if not labels:
            raise DataError(f"DNS fixture {cfg.fixture_dns_path} has no usable entries")
        resolvers = [fixture.resolver(label) for label in labels]
    elif cfg.resolvers:
        try:
            resolvers = [dns_resolution.parse_endpoint(e) for e in cfg.resolvers]
        except ValueError as exc:
            raise UsageError(str(exc))
        labels = [r.resolver_id for r in resolvers]
    else:
        raise UsageError("resolve needs a DNS fixture or at least one resolver endpoint")
    primary = cfg.primary_resolver or labels[0]
    if primary not in labels:
        raise UsageError(f"primary resolver {primary!r} not among {labels}")

    tasks = [
        (record.rank, rec.variant, rec.name)
        for record in records
        for rec in domain_ingest.expand_variants(record)
    ]

    def resolve_task(task):
        rank, variant, name = task
        out = []
        for resolver in resolvers:
            limiter.wait()
            try:
                res = dns_resolution.resolve_records(name, resolver, cfg.timeout)
            except FixtureMissError:
                out.append(("fixture_misses", None))
                continue
            except ChainLoopError:
                out.append(("chain_loops", None))
                continue
            out.append((None, res))
        return rank, variant, out

    limiter = _RateLimiter(cfg.resolver_qps)
    rows: list[dict] = []
    collected: list[tuple[int, Variant, list]] = []
    if cfg.fixture_dns_path:
        collected = [resolve_task(t) for t in tasks]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, cfg.max_inflight)) as pool:
            collected = list(pool.map(resolve_task, tasks))

    for rank, variant, outcomes in collected:
        results = []
        for err_key, res in outcomes:
            if err_key:
                diag.count(err_key)
                continue
            results.append(dns_resolution.apply_filter(res, table, diag))
        ok = [r for r in results if r.status is ResolutionStatus.OK]
        if len(ok) >= 2:
            report = dns_resolution.cross_check(ok)
            diag.count(
                "cross_check_agree" if report.agree_addresses else "cross_check_disagree"
            )
        rows.extend(_result_row(rank, variant, r) for r in results)

    if not rows:
        raise DataError("resolve produced zero resolution rows")
    rows.sort(key=lambda r: (r["rank"], r["variant"], r["resolver"], r["domain"]))
    _write_jsonl(cfg.out("resolved.jsonl"), rows)
    _write_text(
        cfg.out("resolve_meta.json"),
        json.dumps({"primary_resolver": primary, "resolvers": labels}, sort_keys=True)
        + "\n",
    )
    _write_diag(cfg, "resolve", diag)
    log.info("resolve: %d rows from %d domains", len(rows), len(records))


# ---------------------------------------------------------------------------
# map (addresses -> covering prefix/origin pairs)


def _load_rib_entries(cfg: PipelineConfig, diag: Diagnostics) -> list[rib_store.RibEntry]:
    if not cfg.rib_paths:
        raise MissingInputError("<rib_paths>", "RIB source")
    entries: list[rib_store.RibEntry] = []
    for path in cfg.rib_paths:
        data = _require_file(path, "RIB dump").read_bytes()
        try:
            entries.extend(rib_store.parse_mrt(data, diag))
        except BadMagicError:
            entries.extend(rib_store.parse_text_rib(data, diag))
    return entries


def stage_map(cfg: PipelineConfig) -> None:
    diag = Diagnostics()
    resolved_path = _require_artifact(cfg, "resolved.jsonl", "resolve")
    meta = json.loads(_require_artifact(cfg, "resolve_meta.json", "resolve").read_text("utf-8"))
    primary = meta["primary_resolver"]

    entries = _load_rib_entries(cfg, diag)
    trie = rib_store.build_trie(entries, diag)
    if len(trie) == 0 and trie.as_set_count == 0:
        raise DataError("RIB sources contained zero usable entries")

    rows = []
    for row in _read_jsonl(resolved_path):
        if row["resolver"] != primary:
            continue
        pairs: set[PrefixOriginPair] = set()
        unreachable = []
        for addr_text in row["addresses"]:
            covering = rib_store.covering_pairs(addr_text, trie)
            if covering:
                pairs |= covering
            else:
                unreachable.append(addr_text)
                diag.count("unreachable_addresses")
        rows.append(
            {
                "rank": row["rank"],
                "domain": row["domain"],
                "variant": row["variant"],
                "pairs": [
                    {"prefix": str(p.prefix), "asn": p.origin_asn}
                    for p in sorted(pairs, key=lambda p: p.sort_key())
                ],
                "unreachable": sorted(unreachable),
            }
        )
    rows.sort(key=lambda r: (r["rank"], r["variant"], r["domain"]))
    _write_jsonl(cfg.out("pairs.jsonl"), rows)
    _write_diag(cfg, "map", diag)
    log.info("map: %d rows against %d prefix-origin pairs", len(rows), len(trie))


# ---------------------------------------------------------------------------
# validate


def _roa_format(cfg: PipelineConfig, path: Path) -> RoaFormat:
    if cfg.roa_format:
        try:
            return RoaFormat(cfg.roa_format)
        except ValueError:
            raise UsageError(f"unknown ROA format {cfg.roa_format!r}")
    return RoaFormat.JSON if path.suffix.lower() == ".json" else RoaFormat.CSV


def stage_validate(cfg: PipelineConfig) -> None:
    diag = Diagnostics()
    pairs_path = _require_artifact(cfg, "pairs.jsonl", "map")
    roa_path = _require_file(cfg.roa_path, "ROA export")
    roas = roa_validation.load_roas(roa_path.read_bytes(), _roa_format(cfg, roa_path), diag)
    index = roa_validation.build_roa_index(roas)

    rows = []
    for row in _read_jsonl(pairs_path):
        states = []
        for item in row["pairs"]:
            pair = PrefixOriginPair(ipaddress.ip_network(item["prefix"]), item["asn"])
            states.append((pair, roa_validation.validate(pair, index)))
        coverage = analytics.domain_coverage(row["domain"], states)
        rows.append(
            {
                "rank": row["rank"],
                "domain": row["domain"],
                "variant": row["variant"],
                "pairs": [
                    {"prefix": str(p.prefix), "asn": p.origin_asn, "state": s.value}
                    for p, s in coverage.pairs
                ],
                "covered": analytics.fraction_to_float(coverage.covered_fraction),
                "class": coverage.classification.value,
            }
        )
    rows.sort(key=lambda r: (r["rank"], r["variant"], r["domain"]))
    _write_jsonl(cfg.out("validated.jsonl"), rows)
    _write_diag(cfg, "validate", diag)
    log.info("validate: %d rows against %d ROAs", len(rows), len(roas))


# ---------------------------------------------------------------------------
# classify


def stage_classify(cfg: PipelineConfig) -> None:
    diag = Diagnostics()
    resolved_path = _require_artifact(cfg, "resolved.jsonl", "resolve")
    pairs_path = _require_artifact(cfg, "pairs.jsonl", "map")
    meta = json.loads(_require_artifact(cfg, "resolve_meta.json", "resolve").read_text("utf-8"))
    primary = meta["primary_resolver"]

    registry_path = _require_file(cfg.as_registry_path, "AS registry")
    registry = cdn_classifier.parse_as_registry(registry_path.read_bytes(), diag)
    keyword_source = None
    if cfg.keyword_path:
        keyword_source = _require_file(cfg.keyword_path, "keyword file").read_bytes()
    keywords = cdn_classifier.load_keywords(keyword_source)
    cdn_asns = cdn_classifier.spot_keywords(keywords, registry)

    external: dict[str, bool] = {}
    if cfg.external_labels_path:
        external = cdn_classifier.load_external_labels(
            _require_file(cfg.external_labels_path, "external labels").read_bytes(), diag
        )

    pairs_by_key: dict[tuple[int, str], list[PrefixOriginPair]] = {}
    for row in _read_jsonl(pairs_path):
        pairs_by_key[(row["rank"], row["domain"])] = [
            PrefixOriginPair(ipaddress.ip_network(p["prefix"]), p["asn"])
            for p in row["pairs"]
        ]

    labels = []
    rows = []
    for row in _read_jsonl(resolved_path):
        if row["resolver"] != primary or row["status"] != ResolutionStatus.OK.value:
            continue
        chain_length = len(row["cnames"])
        label = cdn_classifier.CdnLabel(
            row["domain"],
            chain_length,
            chain_length >= cdn_classifier.CHAIN_THRESHOLD,
            by_asn=cdn_classifier.classify_by_asn(
                pairs_by_key.get((row["rank"], row["domain"]), []), cdn_asns
            ),
        )
        ext = external.get(label.domain)
        if ext is None and label.domain.startswith("www."):
            ext = external.get(label.domain[4:])
        label.external = ext
        labels.append(label)
        rows.append(
            {
                "rank": row["rank"],
                "domain": label.domain,
                "variant": row["variant"],
                "chain_length": label.chain_length,
                "by_chain": label.by_chain,
                "by_asn": label.by_asn,
                "external": label.external,
            }
        )

    rows.sort(key=lambda r: (r["rank"], r["variant"], r["domain"]))
    _write_jsonl(cfg.out("cdn_labels.jsonl"), rows)
    if external and labels:
        report = cdn_classifier.compare_external(labels, external)
        _write_text(
            cfg.out("agreement.json"),
            json.dumps(
                {
                    "coverage": analytics.fraction_to_float(report.coverage),
                    "agree": analytics.fraction_to_float(report.agree),
                    "confusion": {
                        f"{h}{e}": report.confusion[(h, e)]
                        for h in (0, 1)
                        for e in (0, 1)
                    },
                },
                sort_keys=True,
                indent=2,
            )
            + "\n",
        )
    _write_diag(cfg, "classify", diag)
    log.info("classify: %d labels, %d CDN ASes spotted", len(rows), len(cdn_asns))


# ---------------------------------------------------------------------------
# analyze


def _coverage_from_row(row: dict) -> DomainCoverage:
    states = [
        (
            PrefixOriginPair(ipaddress.ip_network(p["prefix"]), p["asn"]),
            ValidationState(p["state"]),
        )
        for p in row["pairs"]
    ]
    return analytics.domain_coverage(row["domain"], states)


def _bin_csv(stats: list[analytics.BinStat]) -> str:
    lines = ["bin_lo,bin_hi,n,mean_covered,mean_valid,mean_invalid,mean_notfound,cdn_fraction"]
    for s in stats:
        lines.append(
            ",".join(
                [
                    str(s.bin.lo),
                    str(s.bin.hi),
                    str(s.domain_count),
                    format_fraction(s.mean_covered),
                    format_fraction(s.mean_valid),
                    format_fraction(s.mean_invalid),
                    format_fraction(s.mean_notfound),
                    format_fraction(s.cdn_fraction),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _rates_obj(rates: analytics.OverallRates) -> dict:
    return {
        "domains": rates.domains,
        "domains_with_data": rates.domains_with_data,
        "total_pairs": rates.total_pairs,
        "covered_pairs": rates.covered_pairs,
        "domain_weighted_covered": analytics.fraction_to_float(rates.domain_weighted_covered),
        "pair_weighted_covered": analytics.fraction_to_float(rates.pair_weighted_covered),
    }


def stage_analyze(cfg: PipelineConfig) -> None:
    diag = Diagnostics()
    validated_path = _require_artifact(cfg, "validated.jsonl", "validate")
    labels_path = _require_artifact(cfg, "cdn_labels.jsonl", "classify")

    validated = _read_jsonl(validated_path)
    if not validated:
        raise DataError("validated.jsonl holds zero rows")
    label_rows = _read_jsonl(labels_path)
    by_chain = {row["domain"]: bool(row["by_chain"]) for row in label_rows}

    coverages: dict[str, list[tuple[int, DomainCoverage]]] = {"base": [], "www": []}
    prefixes: dict[tuple[int, str], set] = {}
    base_names: dict[int, str] = {}
    for row in validated:
        cov = _coverage_from_row(row)
        coverages[row["variant"]].append((row["rank"], cov))
        prefixes[(row["rank"], row["variant"])] = {p.prefix for p, _ in cov.pairs}
        if row["variant"] == "base":
            base_names[row["rank"]] = row["domain"]

    max_rank = max(rank for rows in coverages.values() for rank, _ in rows)
    bins = domain_ingest.make_bins(max_rank, cfg.bin_size)

    summary: dict[str, dict] = {}
    for variant in ("base", "www"):
        series = coverages[variant]
        cdn_series, all_series = analytics.cdn_conditional_rates(series, by_chain, bins)
        _write_text(cfg.out(f"bins_{variant}.csv"), _bin_csv(all_series))
        _write_text(cfg.out(f"cdn_bins_{variant}.csv"), _bin_csv(cdn_series))
        summary[variant] = _rates_obj(analytics.overall_rates([c for _, c in series]))

    overlap_lines = ["rank,domain,overlap"]
    mean_parts: list[Fraction] = []
    for rank in sorted(base_names):
        name = base_names[rank]
        stat = analytics.prefix_overlap(
            name,
            prefixes.get((rank, "www"), set()),
            prefixes.get((rank, "base"), set()),
        )
        overlap_lines.append(f"{rank},{name},{format_fraction(stat.overlap)}")
        if stat.overlap is not None:
            mean_parts.append(stat.overlap)
    _write_text(cfg.out("overlap.csv"), "\n".join(overlap_lines) + "\n")

    summary["overlap_mean"] = analytics.fraction_to_float(
        sum(mean_parts, Fraction(0)) / len(mean_parts) if mean_parts else None
    )
    _write_text(cfg.out("summary.json"), json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _write_diag(cfg, "analyze", diag)
    log.info("analyze: %d bins over %d ranks", len(bins), max_rank)


# ---------------------------------------------------------------------------
# report


def stage_report(cfg: PipelineConfig) -> None:
    validated_path = _require_artifact(cfg, "validated.jsonl", "validate")
    per_rank: dict[int, dict[str, DomainCoverage]] = {}
    names: dict[int, str] = {}
    for row in _read_jsonl(validated_path):
        cov = _coverage_from_row(row)
        per_rank.setdefault(row["rank"], {})[row["variant"]] = cov
        if row["variant"] == "base":
            names[row["rank"]] = row["domain"]
        else:
            names.setdefault(
                row["rank"],
                row["domain"][4:] if row["domain"].startswith("www.") else row["domain"],
            )

    inputs = [
        (rank, names[rank], per_rank[rank].get("www"), per_rank[rank].get("base"))
        for rank in sorted(per_rank)
    ]
    rows = analytics.coverage_report(inputs, cfg.top_n)

    width_name = max([len(r.domain) for r in rows], default=6)
    width_www = max([len(r.www_cell) for r in rows], default=3)
    text_lines = [
        f"{'rank':>6}  {'domain':<{width_name}}  {'www':<{width_www}}  w/o www"
    ]
    for r in rows:
        text_lines.append(
            f"{r.rank:>6}  {r.domain:<{width_name}}  {r.www_cell:<{width_www}}  {r.base_cell}"
        )
    _write_text(cfg.out("report.txt"), "\n".join(text_lines) + "\n")

    csv_lines = ["rank,domain,www_class,www_covered,www_total,base_class,base_covered,base_total"]
    for r in rows:
        def cells(cov: Optional[DomainCoverage]) -> list[str]:
            if cov is None or cov.classification is CoverageClass.NO_DATA:
                return ["n/a", "", ""]
            return [cov.classification.value, str(cov.covered_count), str(cov.total_pairs)]

        csv_lines.append(",".join([str(r.rank), r.domain] + cells(r.www) + cells(r.base)))
    _write_text(cfg.out("report.csv"), "\n".join(csv_lines) + "\n")
    log.info("report: %d rows", len(rows))


# ---------------------------------------------------------------------------
# driver


_STAGE_FUNCS = {
    "resolve": stage_resolve,
    "map": stage_map,
    "validate": stage_validate,
    "classify": stage_classify,
    "analyze": stage_analyze,
    "report": stage_report,
}


def run_stage(stage: str, config: PipelineConfig) -> int:
    """Run one stage (or "all"); returns 0, raising AuditError subclasses on failure."""
    config = config.validated()
    if stage == "all":
        for name in STAGES:
            _STAGE_FUNCS[name](config)
        return 0
    func = _STAGE_FUNCS.get(stage)
    if func is None:
        raise UsageError(f"unknown stage {stage!r}")
    func(config)
    return 0


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="rpkiaudit",
        description="Audit RPKI origin protection of a ranked website list.",
    )
    parser.add_argument("stage", choices=STAGES + ("all",), help="pipeline stage to run")
    parser.add_argument("--config", help=f"JSON config file (or ${CONFIG_ENV_VAR})")
    parser.add_argument("--output-dir", help="artifact directory")
    parser.add_argument("--domain-list", help="ranked domain list path")
    parser.add_argument(
        "--domain-list-format",
        choices=[f.value for f in ListFormat],
        help="domain list format",
    )
    parser.add_argument("--fixture-dns", help="DNS fixture JSONL path (offline mode)")
    parser.add_argument(
        "--resolver",
        action="append",
        dest="resolvers",
        metavar="LABEL=IP[:PORT]",
        help="live resolver endpoint (repeatable)",
    )
    parser.add_argument("--primary-resolver", help="resolver label used for mapping")
    parser.add_argument("--special-purpose-table", help="override packaged IANA table")
    parser.add_argument(
        "--rib", action="append", dest="ribs", help="RIB dump path, MRT or text (repeatable)"
    )
    parser.add_argument("--roas", help="validated ROA export (csv or json)")
    parser.add_argument("--roa-format", choices=[f.value for f in RoaFormat])
    parser.add_argument("--keywords", help="CDN keyword file")
    parser.add_argument("--as-registry", help="AS registry dump")
    parser.add_argument("--external-labels", help="external CDN classification csv")
    parser.add_argument("--bin-size", type=int, help="rank bin size (default 10000)")
    parser.add_argument("--top-n", type=int, help="report row count (default 10)")
    parser.add_argument("--timeout", type=float, help="DNS timeout seconds")
    return parser


_FLAG_TO_FIELD = {
    "output_dir": "output_dir",
    "domain_list": "domain_list_path",
    "domain_list_format": "domain_list_format",
    "fixture_dns": "fixture_dns_path",
    "resolvers": "resolvers",
    "primary_resolver": "primary_resolver",
    "special_purpose_table": "special_purpose_table_path",
    "ribs": "rib_paths",
    "roas": "roa_path",
    "roa_format": "roa_format",
    "keywords": "keyword_path",
    "as_registry": "as_registry_path",
    "external_labels": "external_labels_path",
    "bin_size": "bin_size",
    "top_n": "top_n",
    "timeout": "timeout",
}


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
        cfg = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
        for flag, attr in _FLAG_TO_FIELD.items():
            value = getattr(args, flag, None)
            if value is not None:
                setattr(cfg, attr, value)
        return run_stage(args.stage, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MissingInputError, StageDependencyMissingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        DataError,
        EmptyInputError,
        DuplicateRankError,
        BadMagicError,
        InsufficientResolversError,
        AuditError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
