import os
import sys

# repository root, so the scripts run without installing refcheck
ROOT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..')
FIXTURES_DIR = os.path.join(ROOT_DIR, 'fixtures')


def _set_paths():
    if ROOT_DIR not in sys.path:
        sys.path.append(ROOT_DIR)


def pick_transport(offline: bool = True):
    """
    Replay the bundled fixtures when offline, otherwise talk to the live
    bibliographic APIs
    """
    from refcheck.sources.transport import FixtureTransport, HttpTransport

    if offline:
        return FixtureTransport(FIXTURES_DIR)
    return HttpTransport()
