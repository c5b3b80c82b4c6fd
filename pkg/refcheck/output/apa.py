"""
APA 7th edition reference-list entries

    Family, I. I., & Family, I. I. (Year). Title. Venue, Volume(Issue),
        Pages. https://doi.org/DOI
"""

import re

from ..errors import MissingTitle
from ..latex_filter import filter_latex
from ..models import CandidateRecord

MAX_LISTED_AUTHORS = 20
ELLIPSIS = '. . .'

INITIAL_SEPARATOR = re.compile(r'[\s.]+')
PAGE_DASHES = re.compile(r'\s*(?:-{1,3}|–|—)\s*')
CLOSING_PUNCTUATION = ('.', '?', '!')


def _plain(text) -> str:
    if text is None:
        return ''
    text = filter_latex(str(text))
    return ' '.join(text.replace('{', '').replace('}', '').split())


def initials(given: str) -> str:
    """
    "John Ronald" -> "J. R.", "Jean-Pierre" -> "J.-P."
    """
    groups = []
    for part in INITIAL_SEPARATOR.split(_plain(given)):
        letters = [piece[0].upper() + '.' for piece in part.split('-') if piece]
        if letters:
            groups.append('-'.join(letters))
    return ' '.join(groups)


def format_author(author) -> str:
    family = _plain(author.family)
    given = initials(author.given) if author.given else ''
    return f"{family}, {given}" if given else family


def format_authors(authors: list) -> str:
    names = [name for name in (format_author(a) for a in authors) if name]
    if not names:
        return ''
    if len(names) == 1:
        return names[0]
    if len(names) == 2:
        return f"{names[0]}, & {names[1]}"
    if len(names) <= MAX_LISTED_AUTHORS:
        return ', '.join(names[:-1]) + f", & {names[-1]}"

    # first 19, an ellipsis, then the final author
    listed = names[:MAX_LISTED_AUTHORS - 1]
    return ', '.join(listed) + f", {ELLIPSIS} {names[-1]}"


def _sentence(text: str) -> str:
    text = text.strip()
    return text if text.endswith(CLOSING_PUNCTUATION) else text + '.'


def _source_element(record: CandidateRecord) -> str:
    venue = _plain(record.venue)
    if not venue and record.record_type == 'book':
        venue = _plain(record.publisher)
    if not venue:
        return ''

    element = venue
    if record.volume:
        element += f", {_plain(record.volume)}"
        if record.number:
            element += f"({_plain(record.number)})"
    if record.pages:
        element += f", {PAGE_DASHES.sub('–', _plain(record.pages))}"

    return _sentence(element)


def format_apa(record: CandidateRecord) -> str:
    """
    Format a record as an APA 7 reference-list entry

    Parameters
    ----------
    record : CandidateRecord
        corrected metadata. The title is used as received, no re-casing.

    Returns
    -------
    str
        the citation, absent elements left out together with their
        punctuation.

    """
    title = _plain(record.title) if record is not None else ''
    if not title:
        raise MissingTitle("Cannot format a citation without a title")

    year = f"({record.year})" if record.year else "(n.d.)"
    authors = format_authors(record.authors)

    if authors:
        parts = [f"{_sentence(authors)} {year}.", _sentence(title)]
    else:
        # no author: the title moves into the author position
        parts = [f"{_sentence(title)} {year}."]

    parts.append(_source_element(record))

    if record.doi:
        parts.append(f"https://doi.org/{record.doi}")

    return ' '.join(part for part in parts if part)
