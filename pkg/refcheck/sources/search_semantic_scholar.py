from ..models import Author, CandidateRecord, SourceId
from ..refcheck_utils import normalize_doi, split_name
from .search import SearchSource, clean_text, list_field, mapping, objects

FIELDS = 'title,authors,venue,year,externalIds,journal,publicationTypes'

PUBLICATION_TYPES = {
    'JournalArticle': 'journal-article',
    'Conference': 'proceedings-article',
    'Book': 'book'
}


class SemanticScholarSearch(SearchSource):
    """
    Semantic Scholar Graph API paper search, the first fallback
    """

    source = SourceId.SEMANTIC_SCHOLAR
    endpoint_key = 'semantic_scholar'

    def _params(self, query: str) -> dict:
        return {'query': query, 'limit': self.config.rows, 'fields': FIELDS}

    def _items(self, payload) -> list:
        return list_field(payload, 'data')

    def _process_item(self, item: dict):
        title = clean_text(item.get('title'))
        if not title:
            return None

        authors = []
        for author in objects(item.get('authors')):
            name = clean_text(author.get('name'))
            if name:
                authors.append(Author(*split_name(name)))

        journal = mapping(item.get('journal'))
        external_ids = mapping(item.get('externalIds'))

        record_type = None
        for publication_type in item.get('publicationTypes') or []:
            if publication_type in PUBLICATION_TYPES:
                record_type = PUBLICATION_TYPES[publication_type]
                break

        return CandidateRecord(
            source=self.source,
            title=title,
            authors=authors,
            venue=clean_text(item.get('venue')) or clean_text(journal.get('name')),
            year=int(item['year']) if item.get('year') else None,
            doi=normalize_doi(external_ids.get('DOI')),
            volume=clean_text(journal.get('volume')),
            pages=clean_text(journal.get('pages')),
            record_type=record_type
        )


def search_semantic_scholar(q: str, transport, config=None, rate_limiter=None) -> list:
    return SemanticScholarSearch(transport, config, rate_limiter).search(q)
