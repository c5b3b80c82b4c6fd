"""
Data models for reference verification
Parsed references, source records, evaluations, results and reports
"""

from datetime import datetime, timezone
from typing import Optional, Dict, Any, List, NamedTuple
from enum import Enum
from dataclasses import dataclass, field

from . import __version__


class SourceId(Enum):
    CROSSREF = "CrossRef"
    SEMANTIC_SCHOLAR = "SemanticScholar"
    OPENALEX = "OpenAlex"

    @property
    def rank(self) -> int:
        # Tie-break and merge precedence: CrossRef > Semantic Scholar > OpenAlex
        return {
            SourceId.CROSSREF: 1,
            SourceId.SEMANTIC_SCHOLAR: 2,
            SourceId.OPENALEX: 3
        }[self]


class InputKind(Enum):
    BIBTEX = "bibtex"
    FREE_TEXT_SINGLE = "free_text_single"
    FREE_TEXT_LIST = "free_text_list"


class IssueCode(Enum):
    TITLE_MISMATCH = "TitleMismatch"
    AUTHOR_MISMATCH = "AuthorMismatch"
    JOURNAL_DISCREPANCY = "JournalDiscrepancy"
    YEAR_MISMATCH = "YearMismatch"
    FAKE_AUTHOR = "FakeAuthor"
    NOT_FOUND = "NotFound"


class Verdict(Enum):
    VERIFIED = "VERIFIED"
    PARTIAL_MATCH = "PARTIAL_MATCH"
    NOT_FOUND = "NOT_FOUND"

    @property
    def label(self) -> str:
        return {
            Verdict.VERIFIED: "✅ VERIFIED",
            Verdict.PARTIAL_MATCH: "⚠️ PARTIAL MATCH",
            Verdict.NOT_FOUND: "❌ NOT FOUND"
        }[self]


class Author(NamedTuple):
    family: str
    given: Optional[str] = None

    def __str__(self) -> str:
        if self.given:
            return f"{self.family}, {self.given}"
        return self.family


def _drop_none(doc: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in doc.items() if v is not None}


@dataclass
class Reference:
    """One citation as supplied by the user"""
    raw_text: str
    entry_type: Optional[str] = None
    key: Optional[str] = None
    title: Optional[str] = None
    authors: Optional[List[str]] = None
    journal_or_venue: Optional[str] = None
    year: Optional[int] = None
    doi: Optional[str] = None
    volume: Optional[str] = None
    number: Optional[str] = None
    pages: Optional[str] = None
    publisher: Optional[str] = None
    expected_metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.raw_text or not self.raw_text.strip():
            raise ValueError("raw_text must be non-empty")
        if self.year is not None and not 1000 <= self.year <= 2999:
            raise ValueError(f"year out of range: {self.year}")
        if self.entry_type is not None and not (self.title or self.authors):
            raise ValueError("structured reference needs a title or authors")

    @property
    def is_structured(self) -> bool:
        return self.entry_type is not None

    def to_dict(self) -> Dict[str, Any]:
        return _drop_none({
            'raw_text': self.raw_text,
            'entry_type': self.entry_type,
            'key': self.key,
            'title': self.title,
            'authors': self.authors,
            'journal_or_venue': self.journal_or_venue,
            'year': self.year,
            'doi': self.doi,
            'volume': self.volume,
            'number': self.number,
            'pages': self.pages,
            'publisher': self.publisher
        })


@dataclass
class CandidateRecord:
    """A bibliographic record returned by one source"""
    source: SourceId
    title: str
    authors: List[Author] = field(default_factory=list)
    venue: Optional[str] = None
    year: Optional[int] = None
    doi: Optional[str] = None
    volume: Optional[str] = None
    number: Optional[str] = None
    pages: Optional[str] = None
    record_type: Optional[str] = None
    publisher: Optional[str] = None

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise ValueError("candidate record needs a title")

    @property
    def source_rank(self) -> int:
        return self.source.rank

    @property
    def author_strings(self) -> List[str]:
        return [str(a) for a in self.authors]

    def to_dict(self) -> Dict[str, Any]:
        return _drop_none({
            'source': self.source.value,
            'title': self.title,
            'authors': self.author_strings,
            'venue': self.venue,
            'year': self.year,
            'doi': self.doi,
            'volume': self.volume,
            'number': self.number,
            'pages': self.pages,
            'record_type': self.record_type,
            'publisher': self.publisher
        })


@dataclass
class Issue:
    code: IssueCode
    detail: str
    penalty: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'code': self.code.value,
            'detail': self.detail,
            'penalty': self.penalty
        }


@dataclass
class MatchEvaluation:
    s_title: float
    s_author: float
    s_journal: float
    s_year: float
    matched_authors: List[str] = field(default_factory=list)
    fake_author_tokens: List[str] = field(default_factory=list)
    issues: List[Issue] = field(default_factory=list)

    @property
    def scores(self) -> List[float]:
        return [self.s_title, self.s_author, self.s_journal, self.s_year]


@dataclass
class Confidence:
    value: float
    pre_penalty: float
    bonus_applied: int = 0
    penalties_applied: List[Issue] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': round(self.value, 2),
            'pre_penalty': round(self.pre_penalty, 2),
            'bonus': self.bonus_applied,
            'penalties': [
                {'code': i.code.value, 'penalty': i.penalty}
                for i in self.penalties_applied
            ]
        }


@dataclass
class ParseWarning:
    """A BibTeX block that could not be turned into a Reference"""
    index: int
    message: str
    key: Optional[str] = None
    snippet: Optional[str] = None

    def __str__(self) -> str:
        where = f"entry {self.index}"
        if self.key:
            where += f" ({self.key})"
        return f"{where}: {self.message}"


@dataclass
class VerificationResult:
    input: str
    exists: bool
    verdict: Verdict
    confidence: Confidence
    reference: Optional[Reference] = None
    issues: List[Issue] = field(default_factory=list)
    corrected: Optional[CandidateRecord] = None
    apa: str = ""
    bibtex: str = ""
    confirmed_authors: set = field(default_factory=set)
    suspect_authors: set = field(default_factory=set)
    sources_consulted: List[SourceId] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    elapsed: float = 0.0
    error: Optional[str] = None
    # True when every source call for this reference failed
    unreachable: bool = False

    def to_dict(self) -> Dict[str, Any]:
        expected = {}
        if self.reference is not None:
            expected = dict(sorted(self.reference.expected_metadata.items()))
        return {
            'input': self.input,
            'exists': self.exists,
            'verdict': self.verdict.value,
            'confidence': self.confidence.to_dict(),
            'issues': [i.to_dict() for i in self.issues],
            'confirmed_authors': sorted(self.confirmed_authors),
            'suspect_authors': sorted(self.suspect_authors),
            'corrected': self.corrected.to_dict() if self.corrected else None,
            'expected': expected,
            'apa': self.apa,
            'bibtex': self.bibtex,
            'sources_consulted': [s.value for s in self.sources_consulted],
            'warnings': list(self.warnings),
            'error': self.error
        }


@dataclass
class BatchSummary:
    verified: int = 0
    partial: int = 0
    not_found: int = 0
    errors: int = 0

    def add(self, result: VerificationResult):
        if result.error is not None:
            self.errors += 1
        elif result.verdict == Verdict.VERIFIED:
            self.verified += 1
        elif result.verdict == Verdict.PARTIAL_MATCH:
            self.partial += 1
        else:
            self.not_found += 1

    @property
    def total(self) -> int:
        return self.verified + self.partial + self.not_found + self.errors

    def to_dict(self) -> Dict[str, int]:
        return {
            'verified': self.verified,
            'partial': self.partial,
            'not_found': self.not_found,
            'errors': self.errors
        }


@dataclass
class Report:
    results: List[VerificationResult]
    summary: BatchSummary = None
    generated_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    tool_version: str = __version__
    # input-level problems, such as BibTeX entries that were skipped
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.summary is None:
            self.summary = BatchSummary()
            for result in self.results:
                self.summary.add(result)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tool_version': self.tool_version,
            'generated_at': self.generated_at.strftime('%Y-%m-%dT%H:%M:%SZ'),
            'summary': self.summary.to_dict(),
            'warnings': list(self.warnings),
            'results': [
                dict(index=i, **r.to_dict())
                for i, r in enumerate(self.results, start=1)
            ]
        }
