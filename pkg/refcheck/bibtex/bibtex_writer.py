"""
Citation keys and BibTeX serialization of corrected records
"""

import re
import string
import itertools

from unidecode import unidecode

from ..errors import MissingTitle
from ..models import CandidateRecord

STOPWORDS = {'the', 'a', 'an', 'on', 'of', 'for', 'and', 'with', 'from'}

ENTRY_TYPES = {
    'journal-article': 'article',
    'proceedings-article': 'inproceedings',
    'book': 'book'
}

VENUE_FIELD = {
    'article': 'journal',
    'inproceedings': 'booktitle',
    'book': 'publisher',
    'misc': 'howpublished'
}

WORD = re.compile(r'[a-z0-9]+')
DASHES = re.compile(r'\s*(?:-{1,3}|–|—)\s*')


def _ascii_alnum(text: str) -> str:
    return ''.join(WORD.findall(unidecode(text or '').lower()))


def generate_citation_key(record: CandidateRecord) -> str:
    """
    Build a key of the form <family><year><first significant title word>,
    e.g. hendricks2020crossref. Author-less records start with "unknown".
    """
    family = ''
    if record.authors:
        family = _ascii_alnum(record.authors[0].family)

    year = str(record.year) if record.year else ''

    word = ''
    for token in WORD.findall(unidecode(record.title or '').lower()):
        if len(token) > 3 and token not in STOPWORDS:
            word = token
            break

    return (family or 'unknown') + year + word


def _suffixes():
    for length in itertools.count(1):
        for letters in itertools.product(string.ascii_lowercase, repeat=length):
            yield ''.join(letters)


class CitationKeyRegistry:
    """
    Hands out batch-unique keys. The first record with a given key keeps
    it, later ones get "a", "b", ... appended in processing order.
    """

    def __init__(self):
        self.used = set()

    def assign(self, record: CandidateRecord) -> str:
        base = generate_citation_key(record)
        key = base
        if key in self.used:
            for suffix in _suffixes():
                key = base + suffix
                if key not in self.used:
                    break
        self.used.add(key)
        return key


def entry_type_for(record: CandidateRecord) -> str:
    if record.record_type in ENTRY_TYPES:
        return ENTRY_TYPES[record.record_type]
    if record.record_type is None and record.venue:
        return 'article'
    return 'misc'


def _value(text) -> str:
    # braces are the value delimiters, stray ones would break re-parsing
    return ' '.join(str(text).replace('{', '').replace('}', '').split())


def generate_bibtex(record: CandidateRecord, key: str) -> str:
    """
    Serialize a record as one BibTeX entry

    Parameters
    ----------
    record : CandidateRecord
        corrected metadata.
    key : str
        citation key.

    Returns
    -------
    str
        entry text without a trailing newline.

    """
    if record is None or not record.title or not record.title.strip():
        raise MissingTitle("Cannot write a BibTeX entry without a title")

    entry_type = entry_type_for(record)

    fields = [('title', record.title)]
    if record.authors:
        fields.append(('author', ' and '.join(str(a) for a in record.authors)))
    if record.venue:
        fields.append((VENUE_FIELD[entry_type], record.venue))
    if record.year:
        fields.append(('year', record.year))
    if record.volume:
        fields.append(('volume', record.volume))
    if record.number:
        fields.append(('number', record.number))
    if record.pages:
        fields.append(('pages', DASHES.sub('-', record.pages)))
    if record.doi:
        fields.append(('doi', record.doi))

    lines = [f"  {name} = {{{_value(value)}}}" for name, value in fields]

    return f"@{entry_type}{{{key},\n" + ",\n".join(lines) + "\n}"
