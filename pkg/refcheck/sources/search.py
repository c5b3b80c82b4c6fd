import json
import time
import logging
from urllib.parse import urlencode

from .. import __version__
from ..errors import EmptyInput, MalformedResponse, NetworkError, RateLimited
from ..refcheck_utils import ConfigManager, split_name

MAX_QUERY_LENGTH = 300
MAX_RETRY_AFTER = 10.0
TRANSIENT_STATUS = {500, 502, 503, 504}


def build_query(ref) -> str:
    """
    Search string for a reference

    Structured references use title, author family names and year;
    free text is sent as typed, cut at a word boundary after 300
    characters.
    """
    if ref.is_structured and (ref.title or ref.authors):
        parts = []
        if ref.title:
            parts.append(ref.title)
        parts.extend(split_name(author)[0] for author in ref.authors or [])
        if ref.year:
            parts.append(str(ref.year))
        return ' '.join(' '.join(parts).split())

    return truncate_query(ref.raw_text)


def truncate_query(text: str, limit: int = MAX_QUERY_LENGTH) -> str:
    text = ' '.join(text.split())
    if len(text) <= limit:
        return text
    cut = text[:limit]
    if text[limit] != ' ' and ' ' in cut:
        cut = cut.rsplit(' ', 1)[0]
    return cut.strip()


class SearchSource:
    """
    Base class for a bibliographic search API

    Subclasses define the source id, the endpoint key in the config and
    how to build the request URL and map the response body. This class
    owns rate limiting, retries, status handling and JSON decoding.
    """

    source = None
    endpoint_key = None

    def __init__(self, transport, config: ConfigManager = None,
                 rate_limiter=None, sleep=time.sleep):
        self.transport = transport
        self.config = config or ConfigManager()
        self.rate_limiter = rate_limiter
        self.sleep = sleep
        self.log = logging.getLogger(self.__class__.__name__)

    @property
    def endpoint(self) -> str:
        return self.config.endpoints[self.endpoint_key]

    @property
    def headers(self) -> dict:
        agent = f"refcheck/{__version__}"
        if self.config.contact_email:
            agent += f" (mailto:{self.config.contact_email})"
        return {'User-Agent': agent, 'Accept': 'application/json'}

    def search(self, query: str) -> list:
        """
        Top candidate records for a query

        Parameters
        ----------
        query : str
            search string from build_query.

        Returns
        -------
        list
            at most config.rows CandidateRecord objects, source order.

        """
        if not query or not query.strip():
            raise EmptyInput("Search query is empty")

        payload = self._get_payload(self._make_query(query))
        if not isinstance(payload, dict):
            raise MalformedResponse("response body is not a JSON object")

        records = []
        for item in self._items(payload):
            if not isinstance(item, dict):
                self.log.debug(f"Skipping non-object {self.source.value} record")
                continue
            try:
                record = self._process_item(item)
            except (AttributeError, KeyError, IndexError, TypeError, ValueError) as e:
                self.log.debug(f"Skipping unusable {self.source.value} record: {e}")
                continue
            if record is not None:
                records.append(record)

        return records[:self.config.rows]

    def _make_query(self, query: str) -> str:
        params = self._params(query)
        return f"{self.endpoint}?{urlencode(params)}"

    def _params(self, query: str) -> dict:
        raise NotImplementedError

    def _items(self, payload) -> list:
        raise NotImplementedError

    def _process_item(self, item: dict):
        raise NotImplementedError

    def _get_payload(self, url: str):
        attempts = self.config.retries + 1
        error = None

        for attempt in range(attempts):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire(self.source)

            try:
                response = self.transport.execute(url, self.headers, self.config.timeout_seconds)
            except NetworkError as e:
                error = e
                self._sleep_retry(None, attempt, attempts)
                continue

            if response.status == 429:
                retry_after = _retry_after(response.headers)
                error = RateLimited("rate limited (HTTP 429)", retry_after)
                self._sleep_retry(retry_after, attempt, attempts)
                continue

            if response.status in TRANSIENT_STATUS:
                error = NetworkError(f"HTTP {response.status}")
                self._sleep_retry(None, attempt, attempts)
                continue

            if response.status != 200:
                raise NetworkError(f"HTTP {response.status}")

            try:
                return json.loads(response.body.decode('utf-8'))
            except (UnicodeDecodeError, ValueError):
                raise MalformedResponse("response body is not valid JSON")

        raise error

    def _sleep_retry(self, retry_after, attempt: int, attempts: int):
        if attempt + 1 >= attempts:
            return
        delay = self.config.retry_backoff_seconds
        if retry_after is not None:
            delay = min(retry_after, MAX_RETRY_AFTER)
        self.log.warning(f"{self.source.value} request failed, retrying in {delay:g}s")
        self.sleep(delay)


def _retry_after(headers: dict):
    for name, value in (headers or {}).items():
        if name.lower() == 'retry-after':
            try:
                return max(float(value), 0.0)
            except (TypeError, ValueError):
                return None
    return None


def first(values):
    """First element of a list-valued field, or None"""
    if isinstance(values, list):
        return values[0] if values else None
    return values


def clean_text(value):
    if value is None:
        return None
    value = ' '.join(str(value).split())
    return value or None


def object_field(container: dict, name: str) -> dict:
    """
    A JSON object nested under name, {} when absent; any other shape
    means the response is not what the source documents
    """
    value = container.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise MalformedResponse(f"'{name}' is not a JSON object")
    return value


def list_field(container: dict, name: str) -> list:
    value = container.get(name)
    if value is None:
        return []
    if not isinstance(value, list):
        raise MalformedResponse(f"'{name}' is not a list")
    return value


def objects(values) -> list:
    """Only the dict entries of a list-valued field"""
    if not isinstance(values, list):
        return []
    return [value for value in values if isinstance(value, dict)]


def mapping(value) -> dict:
    return value if isinstance(value, dict) else {}
