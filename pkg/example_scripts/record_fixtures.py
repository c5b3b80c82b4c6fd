import os
import sys

from utils import ROOT_DIR, _set_paths

_set_paths()

from refcheck.refcheck_utils import ConfigManager
from refcheck.sources.transport import FixtureRecorder, HttpTransport
from refcheck.verify.pipeline import verify_batch

OUTPUT_DIR = os.path.join(ROOT_DIR, 'fixtures', 'recorded')


def record(citations: list, directory: str = OUTPUT_DIR):
    """
    Run citations against the live APIs and keep every response as a
    fixture for offline runs

    Parameters
    ----------
    citations : list
        free text citations or BibTeX entries.
    directory : str, optional
        where the .json and .meta.yaml pairs are written.

    """
    config = ConfigManager()
    config.set_config()

    recorder = FixtureRecorder(HttpTransport(), directory)
    summary = verify_batch(citations, recorder, config)

    print(f"Recorded {summary.total} references into {directory}")


if __name__ == "__main__":
    record(sys.argv[1:] or [
        "Hochreiter, S., & Schmidhuber, J. (1997). Long short-term memory. "
        "Neural Computation, 9(8), 1735-1780."
    ])
