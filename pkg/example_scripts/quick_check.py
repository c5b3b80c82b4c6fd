from utils import _set_paths, pick_transport

_set_paths()

from refcheck.refcheck_utils import ConfigManager
from refcheck.verify.pipeline import verify_reference

CITATION = (
    "LeCun, Y., Bengio, Y., & Hinton, G. (2015). Deep learning. "
    "Nature, 521(7553), 436-444."
)


def check_citation(citation: str, offline: bool = True):
    """
    Verify one free text citation and print the verdict

    Parameters
    ----------
    citation : str
        citation as pasted from a manuscript.
    offline : bool, optional
        replay fixtures instead of calling the APIs. The default is True.

    """
    config = ConfigManager()
    config.set_config()

    result = verify_reference(citation, pick_transport(offline), config)

    print(f"{result.verdict.label}  confidence {result.confidence.value:.1f}%")
    for issue in result.issues:
        print(f"  ⚠️ {issue.code.value} ({issue.penalty}): {issue.detail}")
    if result.apa:
        print(f"  APA: {result.apa}")
    if result.bibtex:
        print(result.bibtex)


if __name__ == "__main__":
    check_citation(CITATION)
