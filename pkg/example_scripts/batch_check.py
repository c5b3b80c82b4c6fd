import os

from utils import ROOT_DIR, _set_paths, pick_transport

_set_paths()

from refcheck.bibtex.bibtex_parser import parse_bibtex
from refcheck.models import Report
from refcheck.output.report import export_bibtex, render_report, status_line
from refcheck.refcheck_utils import ConfigManager
from refcheck.verify.pipeline import verify_batch

BIB_FILE = os.path.join(ROOT_DIR, 'fixtures', 'inputs', 'references.bib')


def check_bibliography(filepath: str, offline: bool = True, fmt: str = 'text'):
    """
    Verify every entry of a .bib file and print a report plus the
    corrected bibliography

    Parameters
    ----------
    filepath : str
        path to the .bib file.
    offline : bool, optional
        replay fixtures instead of calling the APIs. The default is True.
    fmt : str, optional
        text, json or csv. The default is 'text'.

    """
    config = ConfigManager()
    config.set_config()

    with open(filepath, encoding='utf-8') as f:
        references, warnings = parse_bibtex(f.read())

    results = []

    def emit(index, result):
        results.append(result)
        print(status_line(index, len(references), result))

    verify_batch(references, pick_transport(offline), config, emit=emit)

    report = Report(results, warnings=[str(w) for w in warnings])
    print(render_report(report, fmt))
    print(export_bibtex(report))


if __name__ == "__main__":
    check_bibliography(BIB_FILE)
