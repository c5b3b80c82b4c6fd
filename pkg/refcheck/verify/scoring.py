"""
Confidence scoring, penalty schedule, multi-source bonus and verdicts
"""

from ..models import Confidence, IssueCode, Verdict

HIGH_MATCH = 80
TITLE_TRIGGER = 80
AUTHOR_TRIGGER = 90
MULTI_SOURCE_BONUS = 10

VERIFIED_ABOVE = 80
EXISTS_ABOVE = 50
FALLBACK_BELOW = 70


def _clamp(value: float) -> float:
    return max(0.0, min(100.0, value))


def base_confidence(evaluation, structured: bool) -> float:
    """
    Pre-penalty confidence of one evaluation

    Parameters
    ----------
    evaluation : MatchEvaluation
        field similarities of the candidate.
    structured : bool
        whether the query came from a BibTeX entry.

    Returns
    -------
    float
        the four-way average for structured queries matching at least 80
        on every field, s_title - 0.5 * (100 - s_author) for a good title
        with weak authors, the four-way average otherwise.

    """
    scores = evaluation.scores
    average = sum(scores) / 4

    if structured and min(scores) >= HIGH_MATCH:
        return average

    if evaluation.s_title > TITLE_TRIGGER and evaluation.s_author < AUTHOR_TRIGGER:
        return evaluation.s_title - 0.5 * (100 - evaluation.s_author)

    return average


def penalty_for(code: IssueCode, s_journal: float = 100, year_gap: int = None,
                flagged_by: int = 0) -> int:
    """
    Penalty of a single issue
    """
    if code in (IssueCode.TITLE_MISMATCH, IssueCode.AUTHOR_MISMATCH, IssueCode.NOT_FOUND):
        return -20
    if code == IssueCode.JOURNAL_DISCREPANCY:
        return -20 if s_journal < 50 else -10
    if code == IssueCode.YEAR_MISMATCH:
        return -10 if year_gap == 1 else -15
    if code == IssueCode.FAKE_AUTHOR:
        return -20 if flagged_by >= 2 else -10
    raise ValueError(f"Unknown issue code {code}")


def apply_penalties(base: float, issues: list) -> float:
    return _clamp(base + sum(issue.penalty for issue in issues))


def multi_source_bonus(confirmed_authors) -> int:
    return MULTI_SOURCE_BONUS if len(confirmed_authors or ()) >= 2 else 0


def final_confidence(base: float, issues: list, bonus: int = 0) -> Confidence:
    return Confidence(
        value=_clamp(base + bonus + sum(issue.penalty for issue in issues)),
        pre_penalty=base,
        bonus_applied=bonus,
        penalties_applied=list(issues)
    )


def classify(confidence: float, candidates_found: bool) -> Verdict:
    if not candidates_found or confidence <= EXISTS_ABOVE:
        return Verdict.NOT_FOUND
    if confidence > VERIFIED_ABOVE:
        return Verdict.VERIFIED
    return Verdict.PARTIAL_MATCH


def needs_fallback(base: float, issues: list) -> bool:
    return base < FALLBACK_BELOW or bool(issues)
