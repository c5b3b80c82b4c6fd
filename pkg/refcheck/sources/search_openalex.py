from ..models import Author, CandidateRecord, SourceId
from ..refcheck_utils import normalize_doi, split_name
from .search import SearchSource, clean_text, list_field, mapping, objects

WORK_TYPES = {
    'article': 'journal-article',
    'book': 'book'
}


class OpenAlexSearch(SearchSource):
    """
    OpenAlex works search, the second fallback
    """

    source = SourceId.OPENALEX
    endpoint_key = 'openalex'

    def _params(self, query: str) -> dict:
        params = {'search': query, 'per-page': self.config.rows}
        if self.config.contact_email:
            params['mailto'] = self.config.contact_email
        return params

    def _items(self, payload) -> list:
        return list_field(payload, 'results')

    def _process_item(self, item: dict):
        title = clean_text(item.get('display_name')) or clean_text(item.get('title'))
        if not title:
            return None

        authors = []
        for authorship in objects(item.get('authorships')):
            name = clean_text(mapping(authorship.get('author')).get('display_name'))
            if name:
                authors.append(Author(*split_name(name)))

        biblio = mapping(item.get('biblio'))
        first_page = clean_text(biblio.get('first_page'))
        last_page = clean_text(biblio.get('last_page'))
        pages = first_page
        if first_page and last_page and last_page != first_page:
            pages = f"{first_page}-{last_page}"

        year = item.get('publication_year')

        return CandidateRecord(
            source=self.source,
            title=title,
            authors=authors,
            venue=_venue(item),
            year=int(year) if year else None,
            doi=normalize_doi(item.get('doi')),
            volume=clean_text(biblio.get('volume')),
            number=clean_text(biblio.get('issue')),
            pages=pages,
            record_type=item.get('type_crossref') or WORK_TYPES.get(item.get('type'))
        )


def _venue(item: dict):
    location = mapping(item.get('primary_location'))
    venue = clean_text(mapping(location.get('source')).get('display_name'))
    if venue:
        return venue
    # older responses carry host_venue instead of primary_location
    return clean_text(mapping(item.get('host_venue')).get('display_name'))


def search_openalex(q: str, transport, config=None, rate_limiter=None) -> list:
    return OpenAlexSearch(transport, config, rate_limiter).search(q)
