"""
End-to-end verification against the offline fixture corpus

Five real references must come out VERIFIED and five fabricated ones
must not, with the confidence values worked out by hand from the
recorded responses.
"""

import time

import pytest

from conftest import (
    CORPUS, CROSSREF_PAPER, DEEP_LEARNING, EDGE_FIXTURES_DIR, EXTRA_AUTHOR,
    FABRICATO, FIXTURES_DIR, HOLOGRAPHIC, INPUTS_DIR, LSTM_BIB, RESNET_BIB,
    ATTENTION_BIB, BORROWED_TITLE, UNREACHABLE_FIXTURES_DIR, CR, S2, OA
)
from refcheck.bibtex.bibtex_parser import parse_free_text
from refcheck.errors import EmptyInput, NoRecords
from refcheck.models import Author, CandidateRecord, IssueCode, Verdict
from refcheck.sources.transport import FixtureTransport, TransportResponse
from refcheck.verify.pipeline import (
    ReferenceVerifier, cross_validate_authors, merge_metadata, verify_batch,
    verify_reference
)


def _verify(raw, config, directory=FIXTURES_DIR):
    return ReferenceVerifier(FixtureTransport(directory), config).verify_reference(raw)


# The corpus

@pytest.mark.parametrize("name, raw, verdict, confidence, sources", CORPUS, ids=[c[0] for c in CORPUS])
def test_corpus_verdicts(config, name, raw, verdict, confidence, sources):
    transport = FixtureTransport(FIXTURES_DIR)
    result = ReferenceVerifier(transport, config).verify_reference(raw)

    assert result.verdict == Verdict(verdict)
    assert result.confidence.value == pytest.approx(confidence)
    assert result.sources_consulted == sources
    assert result.exists == (result.confidence.value > 50)
    assert result.error is None
    assert not result.unreachable
    # every source is asked at most once per reference
    assert len(transport.requests) == len(sources)

    if result.verdict == Verdict.NOT_FOUND:
        assert result.apa == ''
        assert result.bibtex == ''
    else:
        assert result.apa and result.bibtex.startswith('@')
    if result.confidence.bonus_applied:
        assert len(result.confirmed_authors) >= 2
        assert sources == [CR, S2, OA]


def test_verified_bibtex_entry(config):
    result = _verify(ATTENTION_BIB, config)

    assert result.corrected.doi == "10.48550/arxiv.1706.03762"
    assert result.issues == []
    assert result.confidence.bonus_applied == 0
    assert result.reference.expected_metadata['booktitle'] == 'Advances in Neural Information Processing Systems'
    assert result.bibtex.startswith("@inproceedings{vaswani2017attention,")


def test_verified_free_text_apa(config):
    result = _verify(DEEP_LEARNING, config)

    assert result.apa == (
        "LeCun, Y., Bengio, Y., & Hinton, G. (2015). Deep learning. Nature, "
        "521(7553), 436–444. https://doi.org/10.1038/nature14539"
    )
    assert result.input == DEEP_LEARNING


def test_semantic_scholar_stands_in_when_crossref_is_empty(config):
    result = _verify(LSTM_BIB, config)

    assert result.corrected.source == S2
    assert result.corrected.doi == "10.1162/neco.1997.9.8.1735"
    assert result.corrected.pages == "1735-1780"


def test_year_off_by_one_is_corrected_with_bonus(config):
    """📅 Wrong year: penalized, cross-validated by all three sources, still verified"""
    result = _verify(CROSSREF_PAPER, config)

    assert [(i.code, i.penalty) for i in result.issues] == [(IssueCode.YEAR_MISMATCH, -10)]
    assert result.confidence.pre_penalty == 87.5
    assert result.confidence.bonus_applied == 10
    assert result.confirmed_authors == {'hendricks', 'tkaczyk', 'lin', 'feeney'}
    assert result.suspect_authors == set()
    assert result.corrected.year == 2020
    assert result.apa == (
        "Hendricks, G., Tkaczyk, D., Lin, J., & Feeney, P. (2020). Crossref: The "
        "sustainable source of community-owned scholarly metadata. Quantitative "
        "Science Studies, 1(1), 414–427. https://doi.org/10.1162/qss_a_00022"
    )
    assert "hendricks2020crossref" in result.bibtex


def test_extra_author_is_flagged(config):
    """🕵️ A fabricated co-author on a real paper"""
    result = _verify(EXTRA_AUTHOR, config)

    assert result.verdict == Verdict.VERIFIED
    assert [(i.code, i.penalty) for i in result.issues] == [(IssueCode.FAKE_AUTHOR, -20)]
    assert result.confirmed_authors == {'lecun', 'bengio', 'hinton'}
    assert result.suspect_authors == {'marchetti'}
    assert result.confidence.bonus_applied == 10


def test_borrowed_title_with_invented_authors(config):
    result = _verify(BORROWED_TITLE, config)

    codes = {issue.code for issue in result.issues}
    assert {IssueCode.AUTHOR_MISMATCH, IssueCode.JOURNAL_DISCREPANCY, IssueCode.FAKE_AUTHOR} <= codes
    assert {'smithson', 'kowalczyk'} <= result.suspect_authors
    assert result.confidence.value == 0.0


def test_unrelated_candidate_is_not_found(config):
    result = _verify(HOLOGRAPHIC, config)

    assert result.verdict == Verdict.NOT_FOUND
    assert {'zorblatt', 'fenwick'} <= result.suspect_authors
    assert result.corrected is not None


def test_nothing_found_anywhere(config):
    result = _verify(FABRICATO, config)

    assert [(i.code, i.penalty) for i in result.issues] == [(IssueCode.NOT_FOUND, -20)]
    assert result.corrected is None
    assert result.confidence.pre_penalty == 0.0


def test_results_are_deterministic(config):
    for _, raw, *_ in CORPUS:
        assert _verify(raw, config).to_dict() == _verify(raw, config).to_dict()


def test_sequential_and_concurrent_fallback_agree(config):
    concurrent = _verify(EXTRA_AUTHOR, config).to_dict()
    config.set_concurrent_fallback(False)
    sequential = _verify(EXTRA_AUTHOR, config).to_dict()

    assert concurrent == sequential


# Source failures

def test_failed_sources_become_warnings(config):
    config.set_retries(0)
    result = _verify("A malformed sample citation (2020).", config, EDGE_FIXTURES_DIR)

    assert result.verdict == Verdict.NOT_FOUND
    assert result.sources_consulted == [CR, S2, OA]
    assert result.warnings == [
        "CrossRef: response body is not valid JSON",
        "SemanticScholar: HTTP 503",
    ]
    assert not result.unreachable


def test_all_sources_down(config):
    config.set_retries(0)
    result = _verify(DEEP_LEARNING, config, UNREACHABLE_FIXTURES_DIR)

    assert result.unreachable
    assert result.verdict == Verdict.NOT_FOUND
    assert len(result.warnings) == 3


def test_per_source_transports(config):
    config.set_retries(0)
    working = FixtureTransport(FIXTURES_DIR)
    transports = {CR: FixtureTransport(UNREACHABLE_FIXTURES_DIR), S2: working, OA: working}

    result = verify_reference(LSTM_BIB, transports, config)

    assert result.verdict == Verdict.VERIFIED
    assert result.warnings == ["CrossRef: HTTP 503"]
    assert not result.unreachable


class MisshapenTransport:
    """Valid JSON that is not shaped like a search response"""

    def execute(self, url, headers, timeout):
        return TransportResponse(200, b'{"message": ["x"]}', {})


def test_misshapen_response_becomes_a_warning(config):
    working = FixtureTransport(FIXTURES_DIR)
    transports = {CR: MisshapenTransport(), S2: working, OA: working}

    result = verify_reference(LSTM_BIB, transports, config)

    assert result.verdict == Verdict.VERIFIED
    assert result.warnings == ["CrossRef: 'message' is not a JSON object"]


# Input handling

def test_multi_entry_bibtex_verifies_first_entry(config):
    with open(f"{INPUTS_DIR}/references.bib", encoding='utf-8') as f:
        text = f.read()

    result = _verify(text, config)

    assert result.reference.key == 'vaswani2017attention'
    assert "3 entries in input, only the first was verified" in result.warnings


def test_reference_objects_are_accepted(config):
    reference = parse_free_text(DEEP_LEARNING)
    result = _verify(reference, config)

    assert result.verdict == Verdict.VERIFIED
    assert result.reference is reference


# Batches

def test_batch_emits_in_order(config):
    emitted = []
    summary = verify_batch(
        [DEEP_LEARNING, FABRICATO, CROSSREF_PAPER],
        FixtureTransport(FIXTURES_DIR), config,
        emit=lambda index, result: emitted.append((index, result))
    )

    assert [index for index, _ in emitted] == [1, 2, 3]
    assert [r.verdict for _, r in emitted] == [Verdict.VERIFIED, Verdict.NOT_FOUND, Verdict.VERIFIED]
    assert summary.to_dict() == {'verified': 2, 'partial': 0, 'not_found': 1, 'errors': 0}
    assert summary.total == 3


def test_batch_keys_are_unique(config):
    emitted = []
    verify_batch([DEEP_LEARNING, DEEP_LEARNING], FixtureTransport(FIXTURES_DIR), config,
                 emit=lambda index, result: emitted.append(result))

    assert emitted[0].bibtex.startswith("@article{lecun2015deep,")
    assert emitted[1].bibtex.startswith("@article{lecun2015deepa,")


def test_batch_turns_bad_inputs_into_error_results(config):
    emitted = []
    summary = verify_batch(["   ", DEEP_LEARNING], FixtureTransport(FIXTURES_DIR), config,
                           emit=lambda index, result: emitted.append(result))

    assert summary.errors == 1
    assert summary.verified == 1
    assert emitted[0].error == "Input is empty"
    assert emitted[0].warnings == ["EmptyInput: Input is empty"]
    assert emitted[0].verdict == Verdict.NOT_FOUND


def test_empty_batch_is_rejected(config):
    with pytest.raises(EmptyInput):
        verify_batch([], FixtureTransport(FIXTURES_DIR), config)


def test_batch_spacing_with_fake_clock(config, fake_clock):
    config.set_rate_limit_ms(800)
    verify_batch([ATTENTION_BIB, DEEP_LEARNING, RESNET_BIB], FixtureTransport(FIXTURES_DIR), config,
                 clock=fake_clock, sleep=fake_clock.sleep)

    # CrossRef alone answers all three, so only the second and third wait
    assert fake_clock.sleeps == [pytest.approx(0.8), pytest.approx(0.8)]


class TimedTransport:
    """Notes when each request reaches a source"""

    def __init__(self, transport):
        self.transport = transport
        self.started = []

    def execute(self, url, headers, timeout):
        self.started.append((time.monotonic(), url.split('?')[0]))
        return self.transport.execute(url, headers, timeout)


def test_batch_spacing_on_the_real_clock(config):
    """⏱️ Three references, requests to the same source at least 800 ms apart"""
    config.set_rate_limit_ms(800)
    transport = TimedTransport(FixtureTransport(FIXTURES_DIR))

    start = time.monotonic()
    summary = verify_batch([ATTENTION_BIB, DEEP_LEARNING, RESNET_BIB], transport, config)
    elapsed = time.monotonic() - start

    assert summary.verified == 3
    times = [t for t, endpoint in transport.started if 'crossref' in endpoint]
    assert len(times) == 3
    for earlier, later in zip(times, times[1:]):
        assert later - earlier >= 0.8 - 1e-3
    assert elapsed < 3.5


# Cross-validation and merging

def test_cross_validate_authors():
    assert cross_validate_authors({'doe', 'roe'}, {'doe', 'roe', 'poe'}, None) == ({'doe', 'roe'}, {'poe'})
    assert cross_validate_authors(['doe'], ['doe'], ['doe', 'moe']) == ({'doe'}, {'moe'})
    assert cross_validate_authors({'doe', 'roe'}, None, None) == (set(), set())
    assert cross_validate_authors(None, set(), {'doe'}) == (set(), set())


def _record(source, **fields):
    defaults = dict(title="A Study", authors=[Author("Doe", "Jane")])
    defaults.update(fields)
    return CandidateRecord(source=source, **defaults)


def test_merge_single_record_is_unchanged():
    record = _record(CR, venue="Nature", year=2020, doi="10.1/x", pages="1-10")
    assert merge_metadata(record) == record


def test_merge_fills_gaps_by_precedence():
    crossref = _record(CR, year=2020)
    semantic = _record(S2, title="A study (preprint)", venue="Nature", year=2019, volume="5")
    openalex = _record(OA, venue="Nature Portfolio", number="2", pages="1-10")

    merged = merge_metadata(crossref, semantic, openalex)

    assert merged.source == CR
    assert merged.title == "A Study"
    assert merged.year == 2020
    assert merged.venue == "Nature"
    assert merged.volume == "5"
    assert merged.number == "2"
    assert merged.pages == "1-10"


def test_merge_keeps_crossref_doi_and_warns():
    warnings = []
    merged = merge_metadata(
        _record(CR, doi="10.1/ONE"), _record(S2, doi="10.1/one"), _record(OA, doi="10.1/two"),
        warnings=warnings
    )

    assert merged.doi == "10.1/one"
    assert warnings == ["DOI disagreement between sources (10.1/one, 10.1/two), kept 10.1/one"]


def test_merge_takes_authors_covering_confirmed_names():
    crossref = _record(CR, authors=[Author("Doe", "Jane")])
    semantic = _record(S2, authors=[Author("Doe", "J."), Author("Roe", "R.")])

    merged = merge_metadata(crossref, semantic, confirmed={'doe', 'roe'})
    assert merged.authors == [Author("Doe", "J."), Author("Roe", "R.")]


def test_merge_needs_a_record():
    with pytest.raises(NoRecords):
        merge_metadata(None, None, None)
