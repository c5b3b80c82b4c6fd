"""
Tests for the source layer: response mapping, retries and status
handling, fixture playback and recording, live HTTP and rate limiting
"""

import os

import pytest
import requests
import responses
import yaml

from conftest import EDGE_FIXTURES_DIR, FIXTURES_DIR, FakeClock
from refcheck import __version__
from refcheck.errors import EmptyInput, MalformedResponse, NetworkError, RateLimited
from refcheck.models import Author, Reference, SourceId
from refcheck.sources.rate_limiter import RateLimiter
from refcheck.sources.search import build_query, truncate_query
from refcheck.sources.search_crossref import CrossRefSearch, search_crossref
from refcheck.sources.search_openalex import OpenAlexSearch, search_openalex
from refcheck.sources.search_semantic_scholar import SemanticScholarSearch
from refcheck.sources.transport import (
    FixtureRecorder, FixtureTransport, HttpTransport, TransportResponse
)

CROSSREF_EMPTY = b'{"status": "ok", "message": {"items": []}}'
CROSSREF_ONE = (
    b'{"status": "ok", "message": {"items": [{"title": ["Deep learning"], '
    b'"author": [{"given": "Yann", "family": "LeCun"}], "DOI": "10.1038/NATURE14539", '
    b'"issued": {"date-parts": [[2015, 5, 27]]}, "container-title": ["Nature"]}]}}'
)


class ScriptedTransport:
    """Answers requests from a fixed list of responses or exceptions"""

    def __init__(self, *script):
        self.script = list(script)
        self.calls = []

    def execute(self, url, headers, timeout):
        self.calls.append((url, headers, timeout))
        step = self.script.pop(0)
        if isinstance(step, Exception):
            raise step
        return step


class SleepRecorder:

    def __init__(self):
        self.delays = []

    def __call__(self, seconds):
        self.delays.append(seconds)


# Queries

def test_build_query_structured():
    reference = Reference(
        raw_text="@article{...}",
        entry_type='article',
        title="Deep  learning",
        authors=["LeCun, Yann", "Yoshua Bengio"],
        year=2015
    )
    assert build_query(reference) == "Deep learning LeCun Bengio 2015"


def test_build_query_free_text_is_truncated_at_a_word():
    reference = Reference(raw_text="word " * 100)
    query = build_query(reference)

    assert len(query) <= 300
    assert query.endswith("word")
    assert truncate_query("short  text") == "short text"
    assert truncate_query("x" * 301) == "x" * 300


# Mapping

def test_crossref_mapping(config, fixture_transport):
    records = CrossRefSearch(fixture_transport, config).search("Attention is All you Need Vaswani 2017")

    assert len(records) == 3
    top = records[0]
    assert top.source == SourceId.CROSSREF
    assert top.title == "Attention is All you Need"
    assert len(top.authors) == 8
    assert top.authors[6] == Author("Kaiser", "Łukasz")
    assert top.venue == "Advances in Neural Information Processing Systems"
    assert top.year == 2017
    assert top.doi == "10.48550/arxiv.1706.03762"
    assert top.pages == "5998-6008"
    assert top.volume == "30"
    assert top.record_type == "proceedings-article"
    assert top.publisher == "Curran Associates, Inc."
    # published-online is the earliest date of the second record
    assert records[1].year == 2021
    assert records[2].doi is None


def test_semantic_scholar_mapping(config, fixture_transport):
    records = SemanticScholarSearch(fixture_transport, config).search("attention is all you need")

    assert len(records) == 1
    record = records[0]
    assert record.source == SourceId.SEMANTIC_SCHOLAR
    assert record.authors[1] == Author("Shazeer", "Noam M.")
    assert record.venue == "Neural Information Processing Systems"
    assert record.doi == "10.48550/arxiv.1706.03762"
    assert record.record_type == "journal-article"


def test_openalex_mapping(config, fixture_transport):
    records = OpenAlexSearch(fixture_transport, config).search("attention is all you need")

    record = records[0]
    assert record.source == SourceId.OPENALEX
    assert record.doi == "10.48550/arxiv.1706.03762"
    assert record.venue == "arXiv (Cornell University)"
    assert record.record_type == "posted-content"
    assert record.authors[6] == Author("Kaiser", "Łukasz")
    assert record.pages is None


def test_openalex_host_venue_and_pages(config, fixture_transport):
    record = search_openalex("deep residual learning for image recognition", fixture_transport, config)[0]

    assert record.venue == "2016 IEEE Conference on Computer Vision and Pattern Recognition (CVPR)"
    assert record.pages == "770-778"
    assert record.record_type == "proceedings-article"


def test_rows_limits_results(config, fixture_transport):
    config.set_rows(1)
    assert len(search_crossref("attention is all you need", fixture_transport, config)) == 1


def test_request_url_and_polite_headers(config):
    config.set_contact_email("me@example.org")
    transport = ScriptedTransport(TransportResponse(200, CROSSREF_EMPTY))

    assert CrossRefSearch(transport, config).search("Deep learning") == []

    url, headers, timeout = transport.calls[0]
    assert url.startswith("https://api.crossref.org/works?")
    assert "query.bibliographic=Deep+learning" in url
    assert "rows=3" in url
    assert "mailto=me%40example.org" in url
    assert headers['User-Agent'] == f"refcheck/{__version__} (mailto:me@example.org)"
    assert timeout == config.timeout_seconds


# Status handling

def test_empty_query_is_rejected(config):
    with pytest.raises(EmptyInput):
        CrossRefSearch(ScriptedTransport(), config).search("   ")


def test_network_error_is_retried(config):
    config.set_retry_backoff_seconds(0.5)
    sleep = SleepRecorder()
    transport = ScriptedTransport(NetworkError("connection reset"), TransportResponse(200, CROSSREF_ONE))

    records = CrossRefSearch(transport, config, sleep=sleep).search("Deep learning")

    assert [r.doi for r in records] == ["10.1038/nature14539"]
    assert records[0].year == 2015
    assert sleep.delays == [0.5]
    assert len(transport.calls) == 2


def test_retry_after_is_honoured_up_to_ten_seconds(config):
    sleep = SleepRecorder()
    transport = ScriptedTransport(
        TransportResponse(429, b'', {'Retry-After': '30'}),
        TransportResponse(200, CROSSREF_EMPTY)
    )

    assert CrossRefSearch(transport, config, sleep=sleep).search("Deep learning") == []
    assert sleep.delays == [10.0]


def test_rate_limited_after_last_attempt(config):
    config.set_retries(0)
    transport = ScriptedTransport(TransportResponse(429, b'', {'retry-after': '2'}))

    with pytest.raises(RateLimited) as excinfo:
        CrossRefSearch(transport, config).search("Deep learning")
    assert excinfo.value.retry_after == 2.0


def test_transient_status_exhausts_retries(config):
    sleep = SleepRecorder()
    transport = ScriptedTransport(TransportResponse(503, b''), TransportResponse(503, b''))

    with pytest.raises(NetworkError, match="HTTP 503"):
        SemanticScholarSearch(transport, config, sleep=sleep).search("anything")
    assert len(transport.calls) == 2
    assert sleep.delays == [0.0]


def test_client_error_is_not_retried(config):
    transport = ScriptedTransport(TransportResponse(404, b''))

    with pytest.raises(NetworkError, match="HTTP 404"):
        OpenAlexSearch(transport, config).search("anything")
    assert len(transport.calls) == 1


@pytest.mark.parametrize("body", [b"<html>Service page</html>", b"\xff\xfe", b"[1, 2]"])
def test_malformed_bodies(config, body):
    with pytest.raises(MalformedResponse):
        CrossRefSearch(ScriptedTransport(TransportResponse(200, body)), config).search("anything")


@pytest.mark.parametrize("search, body", [
    (CrossRefSearch, b'{"message": ["x"]}'),
    (CrossRefSearch, b'{"message": {"items": "x"}}'),
    (SemanticScholarSearch, b'{"data": {"paperId": "1"}}'),
    (OpenAlexSearch, b'{"results": "none"}'),
])
def test_bodies_with_the_wrong_shape(config, search, body):
    with pytest.raises(MalformedResponse):
        search(ScriptedTransport(TransportResponse(200, body)), config).search("anything")


def test_unusable_records_are_skipped(config):
    body = (
        b'{"message": {"items": ["x", 7, {"title": ["Deep learning"], '
        b'"author": ["Doe", {"family": "LeCun"}], "issued": [2015]}]}}'
    )
    records = CrossRefSearch(ScriptedTransport(TransportResponse(200, body)), config).search("q")

    assert len(records) == 1
    assert records[0].authors == [Author("LeCun", None)]
    assert records[0].year is None


def test_nested_fields_with_the_wrong_shape_are_ignored(config):
    s2_body = (
        b'{"data": [{"title": "Deep learning", "authors": ["LeCun"], "journal": "Nature", '
        b'"externalIds": [], "year": 2015}]}'
    )
    record, = SemanticScholarSearch(ScriptedTransport(TransportResponse(200, s2_body)), config).search("q")
    assert (record.authors, record.venue, record.doi, record.year) == ([], None, None, 2015)

    oa_body = (
        b'{"results": [{"display_name": "Deep learning", "authorships": [{"author": "LeCun"}, "x"], '
        b'"biblio": null, "primary_location": "Nature", "publication_year": 2015}]}'
    )
    record, = OpenAlexSearch(ScriptedTransport(TransportResponse(200, oa_body)), config).search("q")
    assert (record.authors, record.venue, record.pages, record.year) == ([], None, None, 2015)


def test_every_attempt_takes_a_rate_limit_permit(config):
    clock = FakeClock()
    limiter = RateLimiter(800, clock=clock, sleep=clock.sleep)
    transport = ScriptedTransport(NetworkError("reset"), TransportResponse(200, CROSSREF_EMPTY))

    CrossRefSearch(transport, config, rate_limiter=limiter, sleep=SleepRecorder()).search("q")

    assert clock.sleeps == [pytest.approx(0.8)]


# Fixtures

def test_fixture_transport_unmatched_request_is_empty(fixture_transport, config):
    assert CrossRefSearch(fixture_transport, config).search("nothing recorded for this") == []
    assert len(fixture_transport.requests) == 1


def test_fixture_transport_url_pattern(config):
    transport = FixtureTransport(EDGE_FIXTURES_DIR)
    records = OpenAlexSearch(transport, config).search("pattern sample")

    # the second recorded work has no title and is skipped
    assert len(records) == 1
    assert records[0].title == "Pattern matched record"
    assert records[0].authors == [Author("Lovelace", "Ada")]
    assert records[0].pages == "7"
    assert records[0].record_type == "book"
    assert records[0].venue == "Analytical Engine Notes"


def test_fixture_transport_status_and_malformed(config):
    transport = FixtureTransport(EDGE_FIXTURES_DIR)
    config.set_retries(0)

    with pytest.raises(MalformedResponse):
        CrossRefSearch(transport, config).search("a malformed sample citation")
    with pytest.raises(NetworkError, match="HTTP 503"):
        SemanticScholarSearch(transport, config).search("whatever")


def test_fixture_transport_missing_directory(tmp_path):
    with pytest.raises(NetworkError):
        FixtureTransport(str(tmp_path / "missing"))


def test_fixture_recorder_round_trip(tmp_path, config):
    """📼 A recorded response replays through FixtureTransport"""
    directory = str(tmp_path / "recorded")
    recorder = FixtureRecorder(ScriptedTransport(TransportResponse(200, CROSSREF_ONE)), directory)

    recorded = CrossRefSearch(recorder, config).search("Deep learning LeCun")

    metas = [name for name in os.listdir(directory) if name.endswith('.meta.yaml')]
    assert len(metas) == 1
    with open(os.path.join(directory, metas[0]), encoding='utf-8') as f:
        meta = yaml.safe_load(f)
    assert meta == {'source': 'crossref', 'query': 'Deep learning LeCun', 'status': 200}

    replayed = CrossRefSearch(FixtureTransport(directory), config).search("Deep learning LeCun")
    assert replayed == recorded


# Live HTTP

@responses.activate
def test_http_transport_success(config):
    responses.add(responses.GET, "https://api.crossref.org/works", body=CROSSREF_ONE, status=200)

    records = CrossRefSearch(HttpTransport(), config).search("Deep learning")

    assert records[0].title == "Deep learning"
    assert len(responses.calls) == 1
    assert "query.bibliographic=Deep+learning" in responses.calls[0].request.url
    assert responses.calls[0].request.headers['User-Agent'] == f"refcheck/{__version__}"


@responses.activate
def test_http_transport_status_passthrough():
    responses.add(responses.GET, "https://api.openalex.org/works", body=b'', status=503,
                  headers={'Retry-After': '1'})

    response = HttpTransport().execute("https://api.openalex.org/works?search=x", {}, 5.0)

    assert response.status == 503
    assert response.headers['Retry-After'] == '1'


@responses.activate
def test_http_transport_connection_failure(config):
    config.set_retries(0)
    # nothing registered: responses refuses the connection
    with pytest.raises(NetworkError, match="request failed"):
        CrossRefSearch(HttpTransport(), config).search("Deep learning")


@responses.activate
def test_http_transport_timeout():
    responses.add(responses.GET, "https://api.crossref.org/works", body=requests.exceptions.Timeout())

    with pytest.raises(NetworkError, match="timed out"):
        HttpTransport().execute("https://api.crossref.org/works?rows=1", {}, 2.5)


# Rate limiting

def test_rate_limiter_spaces_requests_per_source():
    clock = FakeClock()
    limiter = RateLimiter(800, clock=clock, sleep=clock.sleep)

    first = limiter.acquire(SourceId.CROSSREF)
    limiter.acquire(SourceId.OPENALEX)
    second = limiter.acquire(SourceId.CROSSREF)

    assert clock.sleeps == [pytest.approx(0.8)]
    assert second - first == pytest.approx(0.8)


def test_rate_limiter_does_not_wait_when_enough_time_passed():
    clock = FakeClock()
    limiter = RateLimiter(800, clock=clock, sleep=clock.sleep)

    limiter.acquire(SourceId.SEMANTIC_SCHOLAR)
    clock.now += 1.0
    limiter.acquire(SourceId.SEMANTIC_SCHOLAR)

    assert clock.sleeps == []


def test_rate_limiter_disabled():
    clock = FakeClock()
    for limiter in (RateLimiter(0, clock=clock, sleep=clock.sleep),
                    RateLimiter(800, enabled=False, clock=clock, sleep=clock.sleep)):
        for _ in range(5):
            limiter(SourceId.CROSSREF)
    assert clock.sleeps == []
