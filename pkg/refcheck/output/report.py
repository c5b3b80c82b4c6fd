"""
Batch reports: text, JSON and CSV rendering, the JSON schema, corrected
BibTeX export and saving to the data store
"""

import os
import json
import logging
from enum import Enum
from datetime import datetime, timezone
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ..bibtex.bibtex_writer import CitationKeyRegistry, generate_bibtex
from ..models import Report, Verdict, VerificationResult
from ..refcheck_utils import (
    make_timestamped_dataframe, save_csv_to_datastore, save_json_file_to_datastore
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    'index', 'verdict', 'confidence', 'exists', 'issues', 'suspect_authors',
    'title', 'doi', 'sources_consulted', 'apa', 'input', 'error'
]


class ReportFormat(Enum):
    TEXT = "text"
    JSON = "json"
    CSV = "csv"


class PenaltyEntry(BaseModel):
    code: str
    penalty: int


class ConfidenceEntry(BaseModel):
    value: float = Field(ge=0, le=100, description="Final confidence, 0-100")
    pre_penalty: float = Field(description="Confidence before bonus and penalties")
    bonus: int = Field(ge=0, description="Multi-source confirmation bonus")
    penalties: List[PenaltyEntry]


class IssueEntry(BaseModel):
    code: str = Field(description="TitleMismatch, AuthorMismatch, JournalDiscrepancy, "
                                  "YearMismatch, FakeAuthor or NotFound")
    detail: str
    penalty: int


class CorrectedEntry(BaseModel):
    source: str
    title: str
    authors: List[str] = []
    venue: Optional[str] = None
    year: Optional[int] = None
    doi: Optional[str] = None
    volume: Optional[str] = None
    number: Optional[str] = None
    pages: Optional[str] = None
    record_type: Optional[str] = None
    publisher: Optional[str] = None


class ResultEntry(BaseModel):
    index: int = Field(ge=1, description="Position of the reference in the input, from 1")
    input: str
    exists: bool
    verdict: Verdict
    confidence: ConfidenceEntry
    issues: List[IssueEntry]
    confirmed_authors: List[str]
    suspect_authors: List[str]
    corrected: Optional[CorrectedEntry] = None
    expected: Dict[str, str] = Field(description="Fields as supplied in the user's BibTeX entry")
    apa: str
    bibtex: str
    sources_consulted: List[str]
    warnings: List[str]
    error: Optional[str] = None


class SummaryEntry(BaseModel):
    verified: int = Field(ge=0)
    partial: int = Field(ge=0)
    not_found: int = Field(ge=0)
    errors: int = Field(ge=0)


class ReportDocument(BaseModel):
    """JSON report as written by `refcheck --format json`"""
    tool_version: str
    generated_at: str = Field(description="UTC, YYYY-MM-DDTHH:MM:SSZ")
    summary: SummaryEntry
    warnings: List[str] = Field(default_factory=list, description="Input entries that were skipped")
    results: List[ResultEntry]


def report_json_schema() -> dict:
    return ReportDocument.model_json_schema()


def report_timestamp() -> datetime:
    """
    Now in UTC, or SOURCE_DATE_EPOCH when set so that repeated runs
    produce identical reports
    """
    epoch = os.getenv('SOURCE_DATE_EPOCH')
    if epoch:
        try:
            return datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        except ValueError:
            logger.warning(f"Ignoring invalid SOURCE_DATE_EPOCH {epoch!r}")
    return datetime.now(timezone.utc)


def _first_line(text: str, width: int = 70) -> str:
    line = ' '.join((text or '').split())
    return line if len(line) <= width else line[:width - 3] + '...'


def status_line(index: int, total: int, result: VerificationResult) -> str:
    """One-line progress entry, e.g. "[2/5] ✅ VERIFIED  92.5%  Deep learning" """
    if result.error is not None:
        return f"[{index}/{total}] ❌ ERROR  {_first_line(result.input)}"
    title = result.corrected.title if result.corrected else result.input
    return (
        f"[{index}/{total}] {result.verdict.label}  "
        f"{result.confidence.value:.1f}%  {_first_line(title)}"
    )


def _text_block(index: int, result: VerificationResult) -> str:
    lines = [f"[{index}] {_first_line(result.input)}"]

    if result.error is not None:
        lines.append(f"    ❌ ERROR: {result.error}")
        return '\n'.join(lines)

    lines.append(f"    {result.verdict.label}  confidence {result.confidence.value:.1f}%")
    for issue in result.issues:
        lines.append(f"    ⚠️ {issue.code.value} ({issue.penalty}): {issue.detail}")
    if result.suspect_authors:
        lines.append(f"    Potential fabricated authors: {', '.join(sorted(result.suspect_authors))}")
    if result.apa:
        lines.append(f"    APA: {result.apa}")
    if result.sources_consulted:
        lines.append(f"    Sources: {', '.join(s.value for s in result.sources_consulted)}")
    for warning in result.warnings:
        lines.append(f"    Warning: {warning}")

    return '\n'.join(lines)


def _render_text(report: Report) -> str:
    blocks = [_text_block(i, r) for i, r in enumerate(report.results, start=1)]
    if report.warnings:
        blocks.append('\n'.join(f"Skipped input {warning}" for warning in report.warnings))
    summary = report.summary
    blocks.append(
        f"Summary: {summary.verified} verified, {summary.partial} partial, "
        f"{summary.not_found} not found, {summary.errors} errors "
        f"({summary.total} total)"
    )
    return '\n\n'.join(blocks) + '\n'


def _render_json(report: Report) -> str:
    document = report.to_dict()
    ReportDocument.model_validate(document)
    return json.dumps(document, indent=2, ensure_ascii=False) + '\n'


def report_rows(report: Report) -> list:
    rows = []
    for index, result in enumerate(report.results, start=1):
        corrected = result.corrected
        rows.append({
            'index': index,
            'verdict': result.verdict.value,
            'confidence': round(result.confidence.value, 2),
            'exists': result.exists,
            'issues': ';'.join(issue.code.value for issue in result.issues),
            'suspect_authors': ';'.join(sorted(result.suspect_authors)),
            'title': corrected.title if corrected else '',
            'doi': (corrected.doi or '') if corrected else '',
            'sources_consulted': ';'.join(s.value for s in result.sources_consulted),
            'apa': result.apa,
            'input': result.input,
            'error': result.error or ''
        })
    return rows


def _render_csv(report: Report) -> str:
    dataframe = pd.DataFrame(report_rows(report), columns=CSV_COLUMNS)
    return dataframe.to_csv(index=False, lineterminator='\n')


RENDERERS = {
    ReportFormat.TEXT: _render_text,
    ReportFormat.JSON: _render_json,
    ReportFormat.CSV: _render_csv
}


def render_report(report: Report, fmt='text') -> str:
    """
    Render a report

    Parameters
    ----------
    report : Report
        results in input order.
    fmt : str or ReportFormat
        "text", "json" or "csv".

    Returns
    -------
    str
        the rendered report. The same report always renders to the same
        string.

    """
    return RENDERERS[ReportFormat(fmt)](report)


def export_bibtex(report: Report) -> str:
    """
    Corrected BibTeX of every found reference in input order, keys made
    unique across the batch. Empty string when nothing was found.
    """
    registry = CitationKeyRegistry()
    entries = []
    for result in report.results:
        if result.verdict == Verdict.NOT_FOUND or result.corrected is None:
            continue
        entries.append(generate_bibtex(result.corrected, registry.assign(result.corrected)))

    if not entries:
        return ''
    return '\n\n'.join(entries) + '\n'


def save_report(report: Report, data_store_dir: str = None) -> tuple:
    """
    Store the JSON report under a timestamped name and append its rows
    to the running CSV archive

    Returns
    -------
    tuple
        (json path, csv path).

    """
    stamp = report.generated_at.strftime('%Y%m%d_%H%M%S')
    json_path = save_json_file_to_datastore(
        f"refcheck_report_{stamp}.json", report.to_dict(), data_store_dir
    )
    csv_path = save_csv_to_datastore(
        "refcheck_reports.csv", make_timestamped_dataframe(report_rows(report)), data_store_dir
    )
    logger.info(f"Report saved to {json_path} and {csv_path}")
    return json_path, csv_path
