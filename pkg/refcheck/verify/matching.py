"""
Candidate evaluation: field similarities, author verification,
fabricated-author detection and issue detection
"""

import re
import logging

from ..errors import EmptyCandidateSet
from ..models import Issue, IssueCode, MatchEvaluation
from ..refcheck_utils import split_name
from ..similarity import normalize, similarity
from .scoring import base_confidence, penalty_for

logger = logging.getLogger(__name__)

TITLE_THRESHOLD = 80
AUTHOR_THRESHOLD = 90
JOURNAL_THRESHOLD = 80

MONTHS = {
    'january', 'february', 'march', 'april', 'may', 'june', 'july',
    'august', 'september', 'october', 'november', 'december',
    'jan', 'feb', 'mar', 'apr', 'jun', 'jul', 'aug', 'sep', 'sept',
    'oct', 'nov', 'dec'
}

BOILERPLATE = {
    'in', 'the', 'proceedings', 'journal', 'press', 'university', 'vol',
    'no', 'ed', 'eds', 'et', 'al',
    'conference', 'symposium', 'workshop', 'international', 'annual',
    'transactions', 'advances', 'arxiv', 'preprint', 'retrieved',
    'available', 'accessed', 'online', 'edition', 'editor', 'editors',
    'volume', 'pages', 'doi', 'https', 'http', 'www', 'org'
} | MONTHS

CAPITALIZED = re.compile(r'[^\W\d_]+')
TITLE_WORD = re.compile(r'\w+')

# shorter candidate strings only count when the token equals or contains them
MIN_CONTAINED = 4


def family_name(author: str) -> str:
    return split_name(author)[0]


def extract_family_names(authors: list) -> list:
    names = [normalize(family_name(author)) for author in authors or []]
    return [name for name in names if name]


def candidate_family_names(candidate) -> list:
    names = [normalize(author.family) for author in candidate.authors]
    return [name for name in names if name]


def author_similarity(query_text: str, family_names: list):
    """
    Share of family names found inside the normalized query

    Returns
    -------
    tuple
        (score in [0, 100], list of matched family names).

    """
    if not family_names:
        return 100.0, []

    haystack = normalize(query_text)
    matched = [name for name in family_names if name in haystack]

    return 100.0 * len(matched) / len(family_names), matched


def year_similarity(query_year, candidate_year) -> float:
    if query_year is None or candidate_year is None:
        return 100.0
    gap = abs(query_year - candidate_year)
    if gap == 0:
        return 100.0
    if gap == 1:
        return 50.0
    return 0.0


def venue_similarity(query_venue, candidate_venue) -> float:
    if not query_venue or not candidate_venue:
        return 100.0
    return similarity(normalize(query_venue), normalize(candidate_venue))


def _author_region(query) -> str:
    if query.is_structured:
        return ' '.join(family_name(author) for author in query.authors or [])
    return query.raw_text


def _author_text(query) -> str:
    # a BibTeX entry is searched in its author field only, never its key or venue
    if query.is_structured and query.authors:
        return ' '.join(query.authors)
    return query.raw_text


def matches_known(token: str, known: list) -> bool:
    for text in known:
        if token in text:
            return True
        if len(text) >= MIN_CONTAINED and text in token:
            return True
    return False


def detect_fake_authors(query, candidate) -> list:
    """
    Capitalized tokens of the query's author region that the candidate
    cannot account for

    Parameters
    ----------
    query : Reference
        the citation under test.
    candidate : CandidateRecord
        best match under evaluation.

    Returns
    -------
    list
        tokens in order of first appearance, without duplicates.

    """
    known = [normalize(word) for word in TITLE_WORD.findall(candidate.title)]
    if candidate.venue:
        known.append(normalize(candidate.venue))
    if candidate.year:
        known.append(str(candidate.year))
    for author in candidate.authors:
        known.append(normalize(author.family))
        # given names of real authors are not fabrications either
        known.extend(normalize(part) for part in (author.given or '').split())
    known = [text for text in known if text]

    tokens = []
    seen = set()
    for token in CAPITALIZED.findall(_author_region(query)):
        if len(token) < 3 or not token[0].isupper():
            continue
        normalized = normalize(token)
        if normalized in seen or normalized in BOILERPLATE:
            continue
        seen.add(normalized)
        if not matches_known(normalized, known):
            tokens.append(token)

    return tokens


def evaluate_candidate(query, candidate) -> MatchEvaluation:
    query_title = query.title or query.raw_text
    s_title = similarity(normalize(query_title), normalize(candidate.title))

    s_author, matched = author_similarity(
        _author_text(query), candidate_family_names(candidate)
    )

    evaluation = MatchEvaluation(
        s_title=s_title,
        s_author=s_author,
        s_journal=venue_similarity(query.journal_or_venue, candidate.venue),
        s_year=year_similarity(query.year, candidate.year),
        matched_authors=matched,
        fake_author_tokens=detect_fake_authors(query, candidate)
    )
    evaluation.issues = detect_issues(query, candidate, evaluation)

    return evaluation


def evaluate_candidates(query, candidates: list):
    """
    Score every candidate and pick the best one

    Best = highest pre-penalty confidence, then higher title similarity,
    then source rank, then the remaining field scores, then position in
    the list. The winning scores never depend on candidate order.
    """
    if not candidates:
        raise EmptyCandidateSet("No candidates to evaluate")

    ranked = []
    for position, candidate in enumerate(candidates):
        evaluation = evaluate_candidate(query, candidate)
        confidence = base_confidence(evaluation, query.is_structured)
        ranked.append((
            (-confidence, -evaluation.s_title, candidate.source_rank,
             tuple(-score for score in evaluation.scores), position),
            candidate,
            evaluation
        ))

    ranked.sort(key=lambda item: item[0])
    _, best, best_eval = ranked[0]

    logger.debug(
        f"Best of {len(candidates)} candidates from {best.source.value}: "
        f"title {best_eval.s_title:.1f}, author {best_eval.s_author:.1f}"
    )

    return best, best_eval


def detect_issues(query, best, evaluation: MatchEvaluation) -> list:
    issues = []

    if evaluation.s_title < TITLE_THRESHOLD:
        issues.append(Issue(
            IssueCode.TITLE_MISMATCH,
            f"Title similarity {evaluation.s_title:.1f}% is below {TITLE_THRESHOLD}%",
            penalty_for(IssueCode.TITLE_MISMATCH)
        ))

    if evaluation.s_author < AUTHOR_THRESHOLD:
        issues.append(Issue(
            IssueCode.AUTHOR_MISMATCH,
            f"Only {evaluation.s_author:.0f}% of the source's authors appear in the citation",
            penalty_for(IssueCode.AUTHOR_MISMATCH)
        ))

    if query.journal_or_venue and best.venue and evaluation.s_journal < JOURNAL_THRESHOLD:
        issues.append(Issue(
            IssueCode.JOURNAL_DISCREPANCY,
            f"Venue '{query.journal_or_venue}' differs from '{best.venue}'",
            penalty_for(IssueCode.JOURNAL_DISCREPANCY, s_journal=evaluation.s_journal)
        ))

    if query.year is not None and best.year is not None and evaluation.s_year < 100:
        gap = abs(query.year - best.year)
        issues.append(Issue(
            IssueCode.YEAR_MISMATCH,
            f"Year {query.year} differs from {best.year}",
            penalty_for(IssueCode.YEAR_MISMATCH, year_gap=gap)
        ))

    for token in evaluation.fake_author_tokens:
        issues.append(fake_author_issue(token))

    return issues


def fake_author_issue(token: str, flagged_by: int = 0) -> Issue:
    return Issue(
        IssueCode.FAKE_AUTHOR,
        f"Author '{token}' not found in the source record",
        penalty_for(IssueCode.FAKE_AUTHOR, flagged_by=flagged_by)
    )
