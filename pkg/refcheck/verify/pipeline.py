"""
End-to-end verification of one reference and of batches

CrossRef is queried first; Semantic Scholar and then OpenAlex stand in
when it finds nothing. A weak or flawed best match triggers the fallback
phase: the other sources are asked too, their authors cross-validated
and their metadata merged into the corrected record.
"""

import time
import logging
import threading
from functools import partial

from ..bibtex.bibtex_parser import detect_input_kind, parse_bibtex, parse_free_text
from ..bibtex.bibtex_writer import CitationKeyRegistry, generate_bibtex, generate_citation_key
from ..errors import EmptyInput, NoRecords, RefcheckError, SourceError
from ..models import (
    BatchSummary, Confidence, InputKind, Issue, IssueCode, Reference,
    SourceId, Verdict, VerificationResult
)
from ..output.apa import format_apa
from ..refcheck_utils import ConfigManager, execute_threading, normalize_doi
from ..similarity import normalize, similarity
from ..sources.rate_limiter import RateLimiter
from ..sources.search import build_query
from ..sources.search_crossref import CrossRefSearch
from ..sources.search_openalex import OpenAlexSearch
from ..sources.search_semantic_scholar import SemanticScholarSearch
from .matching import (
    candidate_family_names, evaluate_candidate, evaluate_candidates,
    fake_author_issue, matches_known
)
from .scoring import (
    base_confidence, classify, final_confidence, multi_source_bonus,
    needs_fallback, penalty_for
)

logger = logging.getLogger(__name__)

SEARCHES = {
    SourceId.CROSSREF: CrossRefSearch,
    SourceId.SEMANTIC_SCHOLAR: SemanticScholarSearch,
    SourceId.OPENALEX: OpenAlexSearch
}

FALLBACK_SOURCES = (SourceId.SEMANTIC_SCHOLAR, SourceId.OPENALEX)

# a fallback record only counts as the same work above this title similarity
SAME_WORK_TITLE = 80


def cross_validate_authors(cr, ss, oa):
    """
    Confirm authors that every contributing source agrees on

    Parameters
    ----------
    cr, ss, oa : iterable or None
        normalized family names from each source's best-matching record,
        None or empty for a source that contributed no record.

    Returns
    -------
    tuple
        (confirmed, suspect) sets. Both are empty unless at least two
        sources contributed.

    """
    contributing = [set(names) for names in (cr, ss, oa) if names]
    if len(contributing) < 2:
        return set(), set()

    confirmed = set.intersection(*contributing)
    suspect = set.union(*contributing) - confirmed

    return confirmed, suspect


def merge_metadata(cr=None, ss=None, oa=None, confirmed=None, warnings=None):
    """
    Merge the best records of each source into one corrected record

    Fields are taken with precedence CrossRef > Semantic Scholar >
    OpenAlex, skipping sources where the field is missing. The author
    list comes from the first source whose family names cover every
    confirmed author. Disagreeing DOIs add a message to `warnings` and
    the highest-precedence DOI is kept.
    """
    records = [record for record in (cr, ss, oa) if record is not None]
    if not records:
        raise NoRecords("No source record to merge")

    def pick(attribute):
        for record in records:
            value = getattr(record, attribute)
            if value:
                return value
        return None

    dois = []
    for record in records:
        doi = normalize_doi(record.doi)
        if doi and doi not in dois:
            dois.append(doi)
    if len(dois) > 1 and warnings is not None:
        warnings.append(f"DOI disagreement between sources ({', '.join(dois)}), kept {dois[0]}")

    authors = None
    if confirmed:
        for record in records:
            if set(confirmed) <= set(candidate_family_names(record)):
                authors = record.authors
                break
    if not authors:
        authors = next((r.authors for r in records if r.authors), records[0].authors)

    primary = records[0]
    return primary.__class__(
        source=primary.source,
        title=primary.title,
        authors=list(authors),
        venue=pick('venue'),
        year=pick('year'),
        doi=dois[0] if dois else None,
        volume=pick('volume'),
        number=pick('number'),
        pages=pick('pages'),
        record_type=pick('record_type'),
        publisher=pick('publisher')
    )


def _same_work(record, best) -> bool:
    if record.doi and best.doi and normalize_doi(record.doi) == normalize_doi(best.doi):
        return True
    return similarity(normalize(record.title), normalize(best.title)) >= SAME_WORK_TITLE


class _Lookup:
    """
    Source calls made while verifying one reference: cached responses,
    consultation order and the warnings of failed calls
    """

    def __init__(self):
        self.cache = {}
        self.errors = {}
        self.consulted = []
        self.warnings = []
        self.calls = 0
        self.failures = 0
        self._lock = threading.Lock()

    @property
    def unreachable(self) -> bool:
        return self.calls > 0 and self.failures == self.calls


class ReferenceVerifier:
    """
    Verifies references against the three sources

    Parameters
    ----------
    transports : Transport or dict
        one transport shared by all sources, or a mapping SourceId ->
        transport.
    config : ConfigManager, optional
        settings, defaults when omitted.
    rate_limiter : RateLimiter, optional
        shared limiter, disabled when omitted.
    clock : callable
        monotonic clock used for `elapsed`.
    sleep : callable
        used between retries.

    """

    def __init__(self, transports, config: ConfigManager = None, rate_limiter=None,
                 clock=time.monotonic, sleep=time.sleep):
        self.config = config or ConfigManager()
        self.rate_limiter = rate_limiter or RateLimiter(enabled=False)
        self.clock = clock
        self.log = logging.getLogger(self.__class__.__name__)

        if not isinstance(transports, dict):
            transports = {source: transports for source in SEARCHES}

        self.searches = {
            source: search_class(transports[source], self.config, self.rate_limiter, sleep)
            for source, search_class in SEARCHES.items()
        }

    def parse(self, raw):
        """
        Reference and parse warnings for a raw input. Only the first entry
        of a multi-entry BibTeX string is kept.
        """
        if isinstance(raw, Reference):
            return raw, []
        if raw is None or not raw.strip():
            raise EmptyInput("Input is empty")

        if detect_input_kind(raw) == InputKind.BIBTEX:
            references, parse_warnings = parse_bibtex(raw)
            warnings = [str(w) for w in parse_warnings]
            if len(references) > 1:
                warnings.append(f"{len(references)} entries in input, only the first was verified")
            return references[0], warnings

        return parse_free_text(raw), []

    def verify_reference(self, raw, key_registry: CitationKeyRegistry = None) -> VerificationResult:
        reference, warnings = self.parse(raw)
        result = self.verify(reference, key_registry)
        result.warnings = warnings + result.warnings
        if isinstance(raw, str):
            result.input = raw.strip()
        return result

    def _search(self, lookup: _Lookup, source: SourceId, query: str) -> list:
        key = (source, query)
        with lookup._lock:
            if key in lookup.cache:
                return lookup.cache[key]

        try:
            records = self.searches[source].search(query)
            failure = None
        except SourceError as e:
            records = []
            failure = f"{source.value}: {e}"

        with lookup._lock:
            lookup.calls += 1
            if failure:
                lookup.failures += 1
            lookup.cache[key] = records
            if failure:
                lookup.errors[key] = failure

        return records

    def _record(self, lookup: _Lookup, source: SourceId, query: str):
        if source in lookup.consulted:
            return
        lookup.consulted.append(source)
        failure = lookup.errors.get((source, query))
        if failure:
            self.log.warning(f"❌ {failure}")
            lookup.warnings.append(failure)

    def _consult(self, lookup: _Lookup, source: SourceId, query: str) -> list:
        records = self._search(lookup, source, query)
        self._record(lookup, source, query)
        return records

    def _fallback(self, lookup: _Lookup, query: str) -> dict:
        pending = [s for s in FALLBACK_SOURCES if (s, query) not in lookup.cache]

        if self.config.concurrent_fallback and len(pending) > 1:
            execute_threading([partial(self._search, lookup, s, query) for s in pending])
        else:
            for source in pending:
                self._search(lookup, source, query)

        found = {}
        for source in FALLBACK_SOURCES:
            found[source] = self._consult(lookup, source, query)
        return found

    def verify(self, reference: Reference, key_registry: CitationKeyRegistry = None) -> VerificationResult:
        """
        Verify one parsed reference

        Parameters
        ----------
        reference : Reference
            the citation under test.
        key_registry : CitationKeyRegistry, optional
            shared across a batch so citation keys stay unique.

        Returns
        -------
        VerificationResult

        """
        start = self.clock()
        lookup = _Lookup()
        query = build_query(reference)

        candidates = []
        for source in SEARCHES:
            candidates = self._consult(lookup, source, query)
            if candidates:
                break

        if not candidates:
            result = self._not_found(reference, lookup)
            result.elapsed = self.clock() - start
            self.log.info(f"{result.verdict.label} {_describe(reference)}")
            return result

        best, evaluation = evaluate_candidates(reference, candidates)
        structured = reference.is_structured
        base = base_confidence(evaluation, structured)
        issues = evaluation.issues

        corrected = best
        confirmed, suspect = set(), set()
        bonus = 0

        if needs_fallback(base, issues):
            self.log.debug(f"Fallback for {_describe(reference)}: base {base:.1f}, {len(issues)} issues")
            found = self._fallback(lookup, query)

            contributing = {best.source: best}
            for source, records in found.items():
                if source in contributing or not records:
                    continue
                record, _ = evaluate_candidates(reference, records)
                if _same_work(record, best):
                    contributing[source] = record

            names = {s: candidate_family_names(r) for s, r in contributing.items()}
            confirmed, suspect = cross_validate_authors(
                names.get(SourceId.CROSSREF),
                names.get(SourceId.SEMANTIC_SCHOLAR),
                names.get(SourceId.OPENALEX)
            )
            bonus = multi_source_bonus(confirmed)

            corrected = merge_metadata(
                contributing.get(SourceId.CROSSREF),
                contributing.get(SourceId.SEMANTIC_SCHOLAR),
                contributing.get(SourceId.OPENALEX),
                confirmed=confirmed,
                warnings=lookup.warnings
            )
            evaluation = evaluate_candidate(reference, corrected)
            base = base_confidence(evaluation, structured)
            issues = self._escalate_fake_authors(evaluation, names)

        suspect = (suspect | {normalize(t) for t in evaluation.fake_author_tokens}) - confirmed
        confidence = final_confidence(base, issues, bonus)
        verdict = classify(confidence.value, True)

        apa = bibtex = ''
        if verdict != Verdict.NOT_FOUND:
            key = key_registry.assign(corrected) if key_registry else generate_citation_key(corrected)
            apa = format_apa(corrected)
            bibtex = generate_bibtex(corrected, key)

        result = VerificationResult(
            input=reference.raw_text,
            exists=confidence.value > 50,
            verdict=verdict,
            confidence=confidence,
            reference=reference,
            issues=issues,
            corrected=corrected,
            apa=apa,
            bibtex=bibtex,
            confirmed_authors=confirmed,
            suspect_authors=suspect,
            sources_consulted=list(lookup.consulted),
            warnings=list(lookup.warnings),
            elapsed=self.clock() - start,
            unreachable=lookup.unreachable
        )

        self.log.info(f"{verdict.label} {confidence.value:.1f}% {_describe(reference)}")
        return result

    @staticmethod
    def _escalate_fake_authors(evaluation, names: dict) -> list:
        """
        Re-weigh FakeAuthor issues by the number of contributing sources
        whose author list lacks the token
        """
        tokens = iter(evaluation.fake_author_tokens)
        issues = []
        for issue in evaluation.issues:
            if issue.code != IssueCode.FAKE_AUTHOR:
                issues.append(issue)
                continue
            token = next(tokens)
            flagged_by = sum(
                1 for family_names in names.values()
                if not matches_known(normalize(token), family_names)
            )
            issues.append(fake_author_issue(token, flagged_by))
        return issues

    def _not_found(self, reference: Reference, lookup: _Lookup) -> VerificationResult:
        issue = Issue(
            IssueCode.NOT_FOUND,
            "No matching record in any source",
            penalty_for(IssueCode.NOT_FOUND)
        )
        return VerificationResult(
            input=reference.raw_text,
            exists=False,
            verdict=Verdict.NOT_FOUND,
            confidence=final_confidence(0.0, [issue]),
            reference=reference,
            issues=[issue],
            sources_consulted=list(lookup.consulted),
            warnings=list(lookup.warnings),
            unreachable=lookup.unreachable
        )


def _describe(reference: Reference) -> str:
    text = reference.title or reference.raw_text
    return text if len(text) <= 60 else text[:57] + '...'


def error_result(raw, error: Exception) -> VerificationResult:
    """Result standing in for an input that could not be verified"""
    text = raw.raw_text if isinstance(raw, Reference) else str(raw or '').strip()
    return VerificationResult(
        input=text,
        exists=False,
        verdict=Verdict.NOT_FOUND,
        confidence=Confidence(0.0, 0.0),
        warnings=[f"{error.__class__.__name__}: {error}"],
        error=str(error)
    )


def verify_reference(raw, transports, config: ConfigManager = None) -> VerificationResult:
    """
    Verify a single citation (BibTeX entry, free text or Reference)
    """
    return ReferenceVerifier(transports, config).verify_reference(raw)


def verify_batch(inputs: list, transports, config: ConfigManager = None, emit=None,
                 rate_limiter=None, clock=time.monotonic, sleep=time.sleep):
    """
    Verify references one after the other with rate limiting engaged

    Parameters
    ----------
    inputs : list
        raw strings or Reference objects, processed in order.
    transports : Transport or dict
        see ReferenceVerifier.
    config : ConfigManager, optional
        settings; rate_limit_ms spaces requests to the same source.
    emit : callable, optional
        called as emit(index, result) as soon as each reference is done,
        index starting at 1.

    Returns
    -------
    BatchSummary

    """
    if not inputs:
        raise EmptyInput("No references to verify")

    config = config or ConfigManager()
    if rate_limiter is None:
        rate_limiter = RateLimiter(config.rate_limit_ms, clock=clock, sleep=sleep)

    verifier = ReferenceVerifier(transports, config, rate_limiter, clock=clock, sleep=sleep)
    registry = CitationKeyRegistry()
    summary = BatchSummary()

    for index, raw in enumerate(inputs, start=1):
        try:
            result = verifier.verify_reference(raw, registry)
        except (RefcheckError, ValueError) as e:
            logger.error(f"❌ Reference {index} could not be verified: {e}")
            result = error_result(raw, e)

        summary.add(result)
        if emit is not None:
            emit(index, result)

    logger.info(
        f"Batch done: {summary.verified} verified, {summary.partial} partial, "
        f"{summary.not_found} not found, {summary.errors} errors"
    )
    return summary
