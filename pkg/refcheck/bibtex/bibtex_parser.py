"""
Input detection and parsing of BibTeX and free-text citations
"""

import re
import bisect
import logging

from bibtexparser.bparser import BibTexParser
import bibtexparser

from ..errors import EmptyInput, NoValidEntries
from ..latex_filter import filter_latex
from ..models import InputKind, ParseWarning, Reference
from ..refcheck_utils import normalize_doi

logger = logging.getLogger(__name__)

ENTRY_HEADER = re.compile(r'@\s*([A-Za-z]+)\s*([{(])')
LINE_ENTRY_HEADER = re.compile(r'^[ \t]*(@)\s*[A-Za-z]+\s*[{(]', re.MULTILINE)
ENTRY_KEY = re.compile(r'[{(]\s*([^,\s{}()]+)\s*,')
AUTHOR_SEPARATOR = re.compile(r'\s+and\s+')
FOUR_DIGITS = re.compile(r'\d{4}')
WHITESPACE = re.compile(r'\s+')

SKIPPED_TYPES = {'comment'}
UNSUPPORTED_TYPES = {'string', 'preamble'}

VENUE_FIELDS = ('journal', 'booktitle', 'howpublished')


def detect_input_kind(text: str) -> InputKind:
    """
    Decide whether the input is BibTeX, a list of citations (one per
    line) or a single free-text citation
    """
    if text is None or not text.strip():
        raise EmptyInput("Input is empty")

    if LINE_ENTRY_HEADER.search(text):
        return InputKind.BIBTEX

    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) >= 2:
        return InputKind.FREE_TEXT_LIST

    return InputKind.FREE_TEXT_SINGLE


def split_authors(value: str) -> list:
    """
    Split a BibTeX author field on " and ", dropping the "others"
    placeholder
    """
    if not value:
        return []
    names = [name.strip() for name in AUTHOR_SEPARATOR.split(value)]
    return [name for name in names if name and name.lower() != 'others']


def parse_bibtex(text: str):
    """
    Parse every @type{key, ...} block of a BibTeX string

    Parameters
    ----------
    text : str
        BibTeX source.

    Returns
    -------
    tuple
        (list of Reference in input order, list of ParseWarning).

    Raises
    ------
    NoValidEntries
        when not a single block could be turned into a Reference.

    """
    if text is None or not text.strip():
        raise EmptyInput("Input is empty")

    references = []
    warnings = []

    for index, (entry_type, block) in enumerate(_split_blocks(text), start=1):
        key_match = ENTRY_KEY.search(block or '')
        key = key_match.group(1) if key_match else None

        if entry_type in SKIPPED_TYPES:
            continue
        if block is None:
            warnings.append(ParseWarning(index, "unbalanced braces, entry skipped", key=key))
            continue
        if entry_type in UNSUPPORTED_TYPES:
            warnings.append(ParseWarning(index, f"@{entry_type} is not supported", key=key))
            continue

        try:
            reference = _parse_block(block)
        except Exception as e:
            logger.debug(f"BibTeX block {index} rejected: {e}")
            reference = None

        if reference is None:
            warnings.append(ParseWarning(
                index, "could not parse entry", key=key, snippet=block[:80]
            ))
            continue

        references.append(reference)

    for warning in warnings:
        logger.warning(f"BibTeX {warning}")

    if not references:
        raise NoValidEntries("No valid BibTeX entries found")

    return references, warnings


def _split_blocks(text: str):
    """
    Yield (entry_type, block_text) for every entry header. block_text is
    None when the entry never closes before the next entry that starts a
    line (or the end of input).
    """
    line_headers = [m.start(1) for m in LINE_ENTRY_HEADER.finditer(text)]
    position = 0

    for header in ENTRY_HEADER.finditer(text):
        if header.start() < position:
            continue

        nxt = bisect.bisect_right(line_headers, header.start())
        limit = line_headers[nxt] if nxt < len(line_headers) else len(text)

        end = _block_end(text, header.end() - 1, limit)
        entry_type = header.group(1).lower()
        if end is None:
            yield entry_type, None
            continue

        position = end
        yield entry_type, text[header.start():end]


def _block_end(text: str, opener: int, limit: int):
    closing = ')' if text[opener] == '(' else None
    depth = 0
    for i in range(opener, limit):
        ch = text[i]
        if ch == '{':
            depth += 1
        elif ch == '}':
            depth -= 1
            if closing is None and depth == 0:
                return i + 1
            if depth < 0:
                return None
        elif ch == closing and depth == 0 and i > opener:
            return i + 1
    return None


def _clean(value: str):
    if value is None:
        return None
    value = filter_latex(value).replace('{', '').replace('}', '')
    value = WHITESPACE.sub(' ', value).strip()
    return value or None


def _parse_block(block: str):
    parser = BibTexParser(
        common_strings=True,
        ignore_nonstandard_types=False
    )
    database = bibtexparser.loads(block, parser=parser)
    if not database.entries:
        return None

    entry = database.entries[0]
    fields = {
        name.lower(): _clean(value) for name, value in entry.items()
        if name not in ('ENTRYTYPE', 'ID') and isinstance(value, str)
    }
    fields = {name: value for name, value in fields.items() if value}

    entry_type = entry.get('ENTRYTYPE', 'misc').lower()
    authors = split_authors(fields.get('author')) or None
    title = fields.get('title')
    if not (title or authors):
        return None

    venue = next((fields[f] for f in VENUE_FIELDS if fields.get(f)), None)
    if venue is None and entry_type == 'book':
        venue = fields.get('publisher')

    year = None
    year_match = FOUR_DIGITS.search(fields.get('year', ''))
    if year_match and 1000 <= int(year_match.group()) <= 2999:
        year = int(year_match.group())

    return Reference(
        raw_text=filter_latex(block) or block,
        entry_type=entry_type,
        key=entry.get('ID') or None,
        title=title,
        authors=authors,
        journal_or_venue=venue,
        year=year,
        doi=normalize_doi(fields.get('doi')),
        volume=fields.get('volume'),
        number=fields.get('number'),
        pages=fields.get('pages'),
        publisher=fields.get('publisher'),
        expected_metadata=fields
    )


# Free-text citations

YEAR_IN_PARENS = re.compile(r'\(([12]\d{3})[a-z]?(?:,[^)]*)?\)')
YEAR_ANYWHERE = re.compile(r'(?<!\d)([12]\d{3})[a-z]?(?!\d)')
DOI_IN_TEXT = re.compile(r'\b10\.\d{4,9}/[^\s"<>]+')
AUTHOR_YEAR_TITLE = re.compile(
    r'^(?P<authors>.+?)\s*\((?P<year>[12]\d{3})[a-z]?(?:,[^)]*)?\)\.?\s*(?P<rest>.+)$'
)
QUOTED_TITLE = re.compile(r'[“"](?P<title>[^”"]{4,}?)[,.]?[”"]')
SENTENCE = re.compile(r'(.+?)([.?!])(?:\s+|$)')
VENUE_PREFIX = re.compile(r'^(?:in:?\s+)', re.IGNORECASE)
NOT_A_VENUE = re.compile(r'^(?:retrieved|available|https?|doi|www|pp|vol)\b', re.IGNORECASE)


def _venue_from(text: str):
    text = VENUE_PREFIX.sub('', text.strip().lstrip(',. '))
    venue = re.split(r'[,.(]', text, maxsplit=1)[0].strip()
    if not venue or not re.search(r'[^\W\d_]', venue) or NOT_A_VENUE.match(venue):
        return None
    return venue


def _year_from(text: str):
    parenthesized = YEAR_IN_PARENS.search(text)
    if parenthesized:
        return int(parenthesized.group(1))
    years = [int(m.group(1)) for m in YEAR_ANYWHERE.finditer(text)]
    # page numbers also look like years, modern ones are the likelier guess
    modern = [y for y in years if 1900 <= y <= 2099]
    if modern:
        return modern[0]
    return years[0] if years else None


def parse_free_text(text: str) -> Reference:
    """
    Turn one free-text citation into a Reference, pulling out the title,
    year, venue and DOI when the citation style makes them recognizable
    (author-year styles and quoted titles). Anything not recognized stays
    absent and matching falls back to the raw text.
    """
    if text is None or not text.strip():
        raise EmptyInput("Input is empty")

    raw = filter_latex(text)
    title = venue = None
    year = None

    doi_match = DOI_IN_TEXT.search(raw)
    doi = normalize_doi(doi_match.group()) if doi_match else None

    quoted = QUOTED_TITLE.search(raw)
    author_year = AUTHOR_YEAR_TITLE.match(raw)

    if quoted:
        title = quoted.group('title')
        venue = _venue_from(raw[quoted.end():])
    elif author_year:
        year = int(author_year.group('year'))
        rest = author_year.group('rest')
        sentence = SENTENCE.match(rest)
        if sentence:
            title = sentence.group(1)
            if sentence.group(2) in '?!':
                title += sentence.group(2)
            venue = _venue_from(rest[sentence.end():])
        else:
            title = rest

    if year is None:
        year = _year_from(raw)

    if title is not None:
        title = title.strip().rstrip('.').strip() or None

    return Reference(
        raw_text=raw or text.strip(),
        title=title,
        journal_or_venue=venue,
        year=year,
        doi=doi
    )
