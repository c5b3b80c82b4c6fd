import re

from ..models import Author, CandidateRecord, SourceId
from ..refcheck_utils import normalize_doi
from .search import (
    SearchSource, clean_text, first, list_field, mapping, object_field, objects
)

MARKUP = re.compile(r'<[^>]+>')


class CrossRefSearch(SearchSource):
    """
    CrossRef works search, the primary source
    """

    source = SourceId.CROSSREF
    endpoint_key = 'crossref'

    def _params(self, query: str) -> dict:
        params = {'query.bibliographic': query, 'rows': self.config.rows}
        if self.config.contact_email:
            params['mailto'] = self.config.contact_email
        return params

    def _items(self, payload) -> list:
        return list_field(object_field(payload, 'message'), 'items')

    def _process_item(self, item: dict):
        title = clean_text(MARKUP.sub('', first(item.get('title')) or ''))
        if not title:
            return None

        authors = []
        for author in objects(item.get('author')):
            family = clean_text(author.get('family')) or clean_text(author.get('name'))
            if family:
                authors.append(Author(family, clean_text(author.get('given'))))

        return CandidateRecord(
            source=self.source,
            title=title,
            authors=authors,
            venue=clean_text(first(item.get('container-title'))),
            year=_earliest_year(item),
            doi=normalize_doi(item.get('DOI')),
            volume=clean_text(item.get('volume')),
            number=clean_text(item.get('issue')),
            pages=clean_text(item.get('page')),
            record_type=clean_text(item.get('type')),
            publisher=clean_text(item.get('publisher'))
        )


def _earliest_year(item: dict):
    years = []
    for field in ('published-print', 'published-online'):
        parts = mapping(item.get(field)).get('date-parts') or []
        if parts and parts[0] and parts[0][0]:
            years.append(int(parts[0][0]))
    if not years:
        parts = mapping(item.get('issued')).get('date-parts') or []
        if parts and parts[0] and parts[0][0]:
            years.append(int(parts[0][0]))
    return min(years) if years else None


def search_crossref(q: str, transport, config=None, rate_limiter=None) -> list:
    return CrossRefSearch(transport, config, rate_limiter).search(q)
