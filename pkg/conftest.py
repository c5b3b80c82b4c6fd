"""
Shared fixtures for the refcheck test suite

The offline corpus in fixtures/ answers five real references and five
fabricated ones. CORPUS lists each input with the verdict, confidence and
sources it must produce.
"""

import os

import pytest

from refcheck.models import SourceId
from refcheck.refcheck_utils import ConfigManager
from refcheck.sources.transport import FixtureTransport

TEST_DIR = os.path.dirname(os.path.abspath(__file__))
FIXTURES_DIR = os.path.join(TEST_DIR, 'fixtures')
EDGE_FIXTURES_DIR = os.path.join(FIXTURES_DIR, 'edge')
UNREACHABLE_FIXTURES_DIR = os.path.join(FIXTURES_DIR, 'unreachable')
INPUTS_DIR = os.path.join(FIXTURES_DIR, 'inputs')

CR = SourceId.CROSSREF
S2 = SourceId.SEMANTIC_SCHOLAR
OA = SourceId.OPENALEX

ATTENTION_BIB = r"""@inproceedings{vaswani2017attention,
  title = {Attention is All you Need},
  author = {Vaswani, Ashish and Shazeer, Noam and Parmar, Niki and Uszkoreit, Jakob and Jones, Llion and Gomez, Aidan N. and Kaiser, {\L}ukasz and Polosukhin, Illia},
  booktitle = {Advances in Neural Information Processing Systems},
  year = {2017}
}"""

LSTM_BIB = r"""@article{hochreiter1997long,
  author = {Sepp Hochreiter and J{\"u}rgen Schmidhuber},
  title = {Long Short-Term Memory},
  journal = {Neural Computation},
  volume = {9},
  number = {8},
  pages = {1735--1780},
  year = {1997}
}"""

RESNET_BIB = r"""@inproceedings{he2016deep,
  title = {Deep Residual Learning for Image Recognition},
  author = {He, Kaiming and Zhang, Xiangyu and Ren, Shaoqing and Sun, Jian},
  booktitle = {2016 IEEE Conference on Computer Vision and Pattern Recognition (CVPR)},
  pages = {770--778},
  year = {2016}
}"""

DEEP_LEARNING = (
    "LeCun, Y., Bengio, Y., & Hinton, G. (2015). Deep learning. Nature, "
    "521(7553), 436-444. https://doi.org/10.1038/nature14539"
)

CROSSREF_PAPER = (
    "Hendricks, G., Tkaczyk, D., Lin, J., & Feeney, P. (2019). Crossref: The "
    "sustainable source of community-owned scholarly metadata. Quantitative "
    "Science Studies, 1(1), 414-427."
)

FABRICATO = "Fabricato, F. (2021). Imaginary Results. Journal of Nonexistence."

QUIBBLETON = (
    "Quibbleton, R., & Marrowfax, T. (2019). Quantum gradient folding for sparse "
    "transformers. Journal of Synthetic Cognition, 12(3), 45-67."
)

HOLOGRAPHIC = (
    "Zorblatt, K., & Fenwick, M. (2018). Recursive holographic embeddings for "
    "protein lattices. Bioinformatic Horizons, 7, 112-130."
)

EXTRA_AUTHOR = (
    "LeCun, Y., Bengio, Y., Hinton, G., & Marchetti, L. (2015). Deep learning. "
    "Nature, 521(7553), 436-444."
)

BORROWED_TITLE = (
    "Smithson, A., & Kowalczyk, B. (2016). Deep residual learning for image "
    "recognition. Journal of Machine Vision, 4(2), 12-20."
)

# (name, input, verdict, confidence, sources consulted)
CORPUS = [
    ('attention', ATTENTION_BIB, 'VERIFIED', 100.0, [CR]),
    ('deep_learning', DEEP_LEARNING, 'VERIFIED', 100.0, [CR]),
    ('lstm', LSTM_BIB, 'VERIFIED', 100.0, [CR, S2]),
    ('resnet', RESNET_BIB, 'VERIFIED', 100.0, [CR]),
    ('crossref_paper', CROSSREF_PAPER, 'VERIFIED', 87.5, [CR, S2, OA]),
    ('fabricato', FABRICATO, 'NOT_FOUND', 0.0, [CR, S2, OA]),
    ('quibbleton', QUIBBLETON, 'NOT_FOUND', 0.0, [CR, S2, OA]),
    ('holographic', HOLOGRAPHIC, 'NOT_FOUND', 0.0, [CR, S2, OA]),
    ('extra_author', EXTRA_AUTHOR, 'VERIFIED', 90.0, [CR, S2, OA]),
    ('borrowed_title', BORROWED_TITLE, 'NOT_FOUND', 0.0, [CR, S2, OA]),
]


class FakeClock:
    """Monotonic clock whose sleep just moves time forward"""

    def __init__(self, start: float = 100.0):
        self.now = start
        self.sleeps = []

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float):
        self.sleeps.append(seconds)
        self.now += seconds


@pytest.fixture
def config():
    """Defaults without waiting: no request spacing, no retry backoff"""
    config = ConfigManager()
    config.set_rate_limit_ms(0)
    config.set_retry_backoff_seconds(0)
    return config


@pytest.fixture
def fixture_transport():
    return FixtureTransport(FIXTURES_DIR)


@pytest.fixture
def fake_clock():
    return FakeClock()


@pytest.fixture(autouse=True)
def _no_refcheck_env(monkeypatch):
    monkeypatch.delenv('REFCHECK_OFFLINE', raising=False)
    monkeypatch.delenv('REFCHECK_CONTACT', raising=False)
    monkeypatch.delenv('SOURCE_DATE_EPOCH', raising=False)
