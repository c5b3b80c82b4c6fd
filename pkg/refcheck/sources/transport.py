"""
Transports: how search requests reach a source

HttpTransport talks to the live APIs through requests. FixtureTransport
replays recorded responses from a directory so that the whole pipeline
runs offline and deterministically; FixtureRecorder writes such a
directory from live traffic.
"""

import os
import re
import glob
import hashlib
import logging
import threading
from typing import Dict, NamedTuple, Protocol
from urllib.parse import urlparse, parse_qs

import yaml
import requests
from requests.adapters import HTTPAdapter

from ..errors import NetworkError
from ..models import SourceId

logger = logging.getLogger(__name__)

# request parameter holding the search query, per source
QUERY_PARAMETER = {
    SourceId.CROSSREF: 'query.bibliographic',
    SourceId.SEMANTIC_SCHOLAR: 'query',
    SourceId.OPENALEX: 'search'
}

SOURCE_KEYS = {
    'crossref': SourceId.CROSSREF,
    'semantic_scholar': SourceId.SEMANTIC_SCHOLAR,
    'openalex': SourceId.OPENALEX
}

HOST_HINTS = {
    'crossref': SourceId.CROSSREF,
    'semanticscholar': SourceId.SEMANTIC_SCHOLAR,
    'openalex': SourceId.OPENALEX
}

EMPTY_BODIES = {
    SourceId.CROSSREF: b'{"status": "ok", "message": {"total-results": 0, "items": []}}',
    SourceId.SEMANTIC_SCHOLAR: b'{"total": 0, "offset": 0, "data": []}',
    SourceId.OPENALEX: b'{"meta": {"count": 0}, "results": []}'
}


class TransportResponse(NamedTuple):
    status: int
    body: bytes
    headers: Dict[str, str] = {}


class Transport(Protocol):

    def execute(self, url: str, headers: dict, timeout: float) -> TransportResponse:
        ...


def source_for_url(url: str):
    host = urlparse(url).netloc.lower()
    for hint, source in HOST_HINTS.items():
        if hint in host:
            return source
    return None


def query_of(url: str, source) -> str:
    params = parse_qs(urlparse(url).query)
    values = params.get(QUERY_PARAMETER.get(source, ''), [''])
    return values[0]


def _fold(text: str) -> str:
    return ' '.join((text or '').split()).casefold()


class HttpTransport:
    """
    Live HTTP through a pooled requests.Session, one session per thread
    """

    def __init__(self, pool_size: int = 4):
        self.pool_size = pool_size
        self._local = threading.local()

    def _session(self) -> requests.Session:
        session = getattr(self._local, 'session', None)
        if session is None:
            session = requests.Session()
            adapter = HTTPAdapter(pool_connections=self.pool_size, pool_maxsize=self.pool_size)
            session.mount("https://", adapter)
            session.mount("http://", adapter)
            self._local.session = session
        return session

    def execute(self, url: str, headers: dict, timeout: float) -> TransportResponse:
        try:
            response = self._session().get(url, headers=headers, timeout=timeout)
        except requests.exceptions.Timeout:
            raise NetworkError(f"timed out after {timeout}s")
        except requests.exceptions.RequestException as e:
            raise NetworkError(f"request failed: {e.__class__.__name__}")

        return TransportResponse(
            response.status_code, response.content, dict(response.headers)
        )


class Fixture(NamedTuple):
    name: str
    source: SourceId
    query: str
    status: int
    url_pattern: object
    body_path: str


class FixtureTransport:
    """
    Offline playback of recorded responses

    Every `<name>.json` body in the directory comes with a
    `<name>.meta.yaml` sidecar naming the source, the query it answers
    and the HTTP status. A fixture answers a request when its `query`
    occurs in the request's query (case-insensitive, whitespace
    collapsed) or is "*"; `url_pattern`, a regular expression over the
    full URL, wins over `query`. The longest matching query wins ties.
    Unmatched requests get an empty result set.
    """

    def __init__(self, directory: str):
        if not os.path.isdir(directory):
            raise NetworkError(f"fixture directory {directory} does not exist")
        self.directory = directory
        self.fixtures = self._load(directory)
        self.log = logging.getLogger(self.__class__.__name__)
        self.requests = []
        self._lock = threading.Lock()

    @staticmethod
    def _load(directory: str) -> list:
        fixtures = []
        for meta_path in sorted(glob.glob(os.path.join(directory, '*.meta.yaml'))):
            with open(meta_path, 'r', encoding='utf-8') as f:
                meta = yaml.safe_load(f) or {}
            name = os.path.basename(meta_path)[:-len('.meta.yaml')]
            pattern = meta.get('url_pattern')
            fixtures.append(Fixture(
                name=name,
                source=SOURCE_KEYS[meta['source']],
                query=str(meta.get('query', '*')),
                status=int(meta.get('status', 200)),
                url_pattern=re.compile(pattern) if pattern else None,
                body_path=os.path.join(directory, name + '.json')
            ))
        return fixtures

    def lookup(self, url: str):
        source = source_for_url(url)
        query = _fold(query_of(url, source))

        by_pattern = [f for f in self.fixtures if f.url_pattern and f.url_pattern.search(url)]
        if by_pattern:
            return by_pattern[0]

        best = None
        for fixture in self.fixtures:
            if fixture.source != source or fixture.url_pattern:
                continue
            wanted = _fold(fixture.query)
            if wanted != '*' and wanted not in query:
                continue
            rank = -1 if wanted == '*' else len(wanted)
            if best is None or rank > best[0]:
                best = (rank, fixture)

        return best[1] if best else None

    def execute(self, url: str, headers: dict, timeout: float) -> TransportResponse:
        with self._lock:
            self.requests.append(url)

        fixture = self.lookup(url)
        if fixture is None:
            source = source_for_url(url)
            self.log.debug(f"No fixture for {url}, replaying an empty result")
            return TransportResponse(200, EMPTY_BODIES.get(source, b'{}'), {})

        body = b''
        if os.path.exists(fixture.body_path):
            with open(fixture.body_path, 'rb') as f:
                body = f.read()

        self.log.debug(f"Replaying fixture {fixture.name} for {url}")
        return TransportResponse(fixture.status, body, {})


class FixtureRecorder:
    """
    Wraps a live transport and stores every response it sees in the
    fixture format read by FixtureTransport
    """

    def __init__(self, transport, directory: str):
        self.transport = transport
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.log = logging.getLogger(self.__class__.__name__)

    def execute(self, url: str, headers: dict, timeout: float) -> TransportResponse:
        response = self.transport.execute(url, headers, timeout)

        source = source_for_url(url)
        source_key = next(k for k, v in SOURCE_KEYS.items() if v == source)
        digest = hashlib.sha1(url.encode('utf-8')).hexdigest()[:10]
        name = f"{source_key}_{digest}"

        with open(os.path.join(self.directory, name + '.json'), 'wb') as f:
            f.write(response.body)
        with open(os.path.join(self.directory, name + '.meta.yaml'), 'w', encoding='utf-8') as f:
            yaml.safe_dump({
                'source': source_key,
                'query': query_of(url, source),
                'status': response.status
            }, f, sort_keys=False, allow_unicode=True)

        self.log.info(f"Recorded {name} ({response.status})")
        return response
