"""Generation-quality metrics: BLEU, ROUGE-L, and parser-accepted validity.

Tokenization is XML-aware and case-preserving. BLEU is BLEU-4 with uniform
weights, brevity penalty, and add-half smoothing on zero n-gram counts;
candidates shorter than 4 tokens use orders up to their length.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .bt_model import FailureCategory, NodeWhitelist, parse_document


def tokenize_xml(text: str) -> list[str]:
    for ch in ("<", ">", "/", "=", '"'):
        text = text.replace(ch, f" {ch} ")
    return text.split()


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


@dataclass
class BleuDetail:
    score: float
    precisions: list[float]
    brevity_penalty: float
    degenerate: bool = False


def bleu_detail(candidate: list[str], reference: list[str], max_order: int = 4) -> BleuDetail:
    c, r = len(candidate), len(reference)
    if c == 0 and r == 0:
        return BleuDetail(0.0, [], 1.0, degenerate=True)
    if c == 0 or r == 0:
        return BleuDetail(0.0, [], 0.0, degenerate=True)

    orders = min(max_order, c)
    precisions = []
    for n in range(1, orders + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        total = c - n + 1
        matched = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        if matched == 0:
            precisions.append(1.0 / (2.0 * total))
        else:
            precisions.append(matched / total)

    log_mean = sum(math.log(p) for p in precisions) / len(precisions)
    bp = min(1.0, math.exp(1.0 - r / c))
    return BleuDetail(bp * math.exp(log_mean), precisions, bp)


def bleu(candidate: list[str], reference: list[str]) -> float:
    return bleu_detail(candidate, reference).score


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> float:
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2 * precision * recall / (precision + recall)


@dataclass
class EvalRecord:
    example_id: str
    instruction: str
    reference_xml: str
    candidate_xml: str = ""
    shots: int = 0
    model_label: str = "default"


@dataclass
class RecordScores:
    bleu: float
    rouge_l: float
    syntactic_valid: bool
    failure_category: Optional[FailureCategory] = None


def score_record(record: EvalRecord, whitelist: Optional[NodeWhitelist] = None) -> RecordScores:
    report = parse_document(record.candidate_xml, whitelist)
    cand = tokenize_xml(record.candidate_xml)
    ref = tokenize_xml(record.reference_xml)
    return RecordScores(
        bleu=bleu(cand, ref),
        rouge_l=rouge_l(cand, ref),
        syntactic_valid=report.accepted,
        failure_category=None if report.accepted else report.category,
    )


@dataclass
class MetricsReport:
    model_label: str
    shots: int
    mean_bleu: float
    mean_rouge_l: float
    validity_pct: float  # 0..100, full precision; rounded only at render time
    failure_counts: dict[str, int] = field(default_factory=dict)
    record_count: int = 0


def aggregate(scored: list[tuple[EvalRecord, RecordScores]]) -> list[MetricsReport]:
    """Group scored records by (model_label, shots) and average."""
    if not scored:
        raise ValueError("no records to aggregate")
    groups: dict[tuple[str, int], list[RecordScores]] = {}
    for record, scores in scored:
        groups.setdefault((record.model_label, record.shots), []).append(scores)
    reports = []
    for (label, shots), entries in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        n = len(entries)
        valid = sum(1 for e in entries if e.syntactic_valid)
        failures: dict[str, int] = {}
        for e in entries:
            if e.failure_category is not None:
                failures[e.failure_category.value] = failures.get(e.failure_category.value, 0) + 1
        reports.append(MetricsReport(
            model_label=label,
            shots=shots,
            mean_bleu=sum(e.bleu for e in entries) / n,
            mean_rouge_l=sum(e.rouge_l for e in entries) / n,
            validity_pct=100.0 * valid / n,
            failure_counts=failures,
            record_count=n,
        ))
    return reports


class CorpusError(ValueError):
    pass


def load_corpus(path, whitelist: Optional[NodeWhitelist] = None) -> list[EvalRecord]:
    """Load a JSON-lines corpus; references must be parser-Accepted."""
    records = []
    bad_ids = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            for req in ("id", "instruction", "reference_xml"):
                if req not in obj:
                    raise CorpusError(f"line {lineno}: missing field {req!r}")
            record = EvalRecord(
                example_id=str(obj["id"]),
                instruction=obj["instruction"],
                reference_xml=obj["reference_xml"],
                candidate_xml=obj.get("candidate_xml", ""),
                shots=int(obj.get("shots", 0)),
                model_label=str(obj.get("model_label", "default")),
            )
            if not parse_document(record.reference_xml, whitelist).accepted:
                bad_ids.append(record.example_id)
            records.append(record)
    if bad_ids:
        raise CorpusError(f"invalid reference XML for ids: {', '.join(bad_ids)}")
    return records


def load_report_fixture(path) -> list[MetricsReport]:
    """Load pre-aggregated report rows (e.g. published summary tables)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return [
        MetricsReport(
            model_label=row["model_label"],
            shots=int(row["shots"]),
            mean_bleu=float(row["mean_bleu"]),
            mean_rouge_l=float(row["mean_rouge_l"]),
            validity_pct=float(row["validity_pct"]),
            failure_counts=row.get("failure_counts", {}),
            record_count=int(row.get("record_count", 0)),
        )
        for row in doc["rows"]
    ]


_SHOT_NAMES = {0: "Zero-shot", 1: "One-shot", 2: "Two-shot"}
_METRIC_KEYS = ("BLEU", "ROUGE-L", "Syntax")


def _grid(reports: list[MetricsReport]) -> tuple[list[str], list[list[str]]]:
    """Comparison grid: one row per (setting, metric), one column per model."""
    labels: list[str] = []
    for rep in reports:
        if rep.model_label not in labels:
            labels.append(rep.model_label)
    by_key = {(r.shots, r.model_label): r for r in reports}
    shot_values = sorted({r.shots for r in reports})

    def cell(rep: Optional[MetricsReport], metric: str) -> str:
        if rep is None:
            return "-"
        if metric == "BLEU":
            return f"{rep.mean_bleu:.3f}"
        if metric == "ROUGE-L":
            return f"{rep.mean_rouge_l:.3f}"
        return f"{round(rep.validity_pct)}%"

    header = ["Setting", "Metric"] + labels
    rows = []
    for shots in shot_values:
        for metric in _METRIC_KEYS:
            row = [_SHOT_NAMES.get(shots, f"{shots}-shot"), metric]
            for label in labels:
                row.append(cell(by_key.get((shots, label)), metric))
            rows.append(row)
    return header, rows


def render_report(reports: list[MetricsReport], fmt: str = "table") -> str:
    if fmt == "json":
        return json.dumps(
            [
                {
                    "model_label": r.model_label,
                    "shots": r.shots,
                    "mean_bleu": r.mean_bleu,
                    "mean_rouge_l": r.mean_rouge_l,
                    "validity_pct": r.validity_pct,
                    "failure_counts": r.failure_counts,
                    "record_count": r.record_count,
                }
                for r in reports
            ],
            indent=2,
        )
    header, rows = _grid(reports)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
