"""
refcheck command line

    refcheck "LeCun, Y., Bengio, Y., & Hinton, G. (2015). Deep learning. Nature."
    refcheck --mode batch refs.bib --export fixed.bib
    refcheck --format json --offline fixtures/ refs.txt
"""

import os
import sys
import json
import logging
import argparse

from . import __version__
from .bibtex.bibtex_parser import detect_input_kind, parse_bibtex
from .errors import RefcheckError, UnreadableInput
from .models import InputKind, Report, Verdict
from .output.report import (
    export_bibtex, render_report, report_json_schema, report_timestamp,
    save_report, status_line
)
from .refcheck_utils import ConfigManager, base_dir
from .sources.transport import FixtureTransport, HttpTransport
from .verify.pipeline import verify_batch

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNVERIFIED = 1
EXIT_USAGE = 2
EXIT_UNREACHABLE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='refcheck',
        description='Verify citations against CrossRef, Semantic Scholar and OpenAlex'
    )
    parser.add_argument('input', nargs='?',
                        help='citation text, path to a .bib/.txt file, or "-" for stdin')
    parser.add_argument('--mode', choices=['auto', 'quick', 'batch'], default='auto',
                        help='quick checks one citation, batch checks every entry (default: auto)')
    parser.add_argument('--format', dest='output_format', choices=['text', 'json', 'csv'],
                        default='text', help='report format on stdout')
    parser.add_argument('--export', metavar='PATH',
                        help='write corrected BibTeX of every found reference ("-" for stdout)')
    parser.add_argument('--rate-limit-ms', type=int, metavar='MS',
                        help='minimum spacing of requests to the same source (default 800)')
    parser.add_argument('--offline', metavar='DIR', help='replay recorded responses from DIR')
    parser.add_argument('--contact', metavar='EMAIL', help='contact email for the polite pools')
    parser.add_argument('--max-refs', type=int, metavar='N',
                        help='refuse batches larger than N references (default 500)')
    parser.add_argument('--config', metavar='FILE', help='YAML config file')
    parser.add_argument('--save', action='store_true',
                        help='also store JSON/CSV reports in the data store directory')
    parser.add_argument('--print-schema', action='store_true',
                        help='print the JSON report schema and exit')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    parser.add_argument('--version', action='version', version=f'refcheck {__version__}')
    return parser


def read_input(value: str, stdin=None) -> str:
    """Inline text, the contents of a file, or stdin for "-" """
    if value == '-':
        try:
            return (stdin or sys.stdin).read()
        except UnicodeDecodeError as e:
            raise UnreadableInput(f"stdin is not UTF-8 text (byte {e.start})")
    if os.path.isfile(value):
        try:
            with open(value, 'r', encoding='utf-8') as f:
                return f.read()
        except UnicodeDecodeError as e:
            raise UnreadableInput(f"{value} is not UTF-8 text (byte {e.start})")
    return value


def build_config(args) -> ConfigManager:
    """
    Settings with precedence flags > environment > YAML > defaults
    """
    config = ConfigManager()

    if args.config:
        config.set_config(args.config)
    elif os.path.exists(os.path.join(base_dir, 'config.yaml')):
        config.set_config()

    config.set_from_env()

    if args.rate_limit_ms is not None:
        config.set_rate_limit_ms(args.rate_limit_ms)
    if args.max_refs is not None:
        config.set_max_refs(args.max_refs)
    if args.contact:
        config.set_contact_email(args.contact)
    if args.offline:
        config.set_offline_fixture_dir(args.offline)

    return config


def build_transport(config: ConfigManager):
    if config.offline_fixture_dir:
        logger.info(f"Offline mode, replaying fixtures from {config.offline_fixture_dir}")
        return FixtureTransport(config.offline_fixture_dir)
    return HttpTransport()


def split_inputs(text: str, mode: str, warnings: list = None) -> list:
    """
    The references to verify, in order

    Auto mode checks a single free-text citation on its own and treats
    BibTeX or several non-empty lines as a batch. BibTeX entries that
    were skipped are appended to warnings when a list is given.
    """
    kind = detect_input_kind(text)

    if mode == 'auto':
        mode = 'quick' if kind == InputKind.FREE_TEXT_SINGLE else 'batch'

    if mode == 'quick':
        return [text.strip()]

    if kind == InputKind.BIBTEX:
        references, parse_warnings = parse_bibtex(text)
        if warnings is not None:
            warnings.extend(str(warning) for warning in parse_warnings)
        return references

    return [line.strip() for line in text.splitlines() if line.strip()]


def exit_code(results: list) -> int:
    if results and all(r.unreachable for r in results):
        return EXIT_UNREACHABLE
    if results and all(r.verdict == Verdict.VERIFIED and r.error is None for r in results):
        return EXIT_OK
    return EXIT_UNVERIFIED


def _write(path: str, content: str, stdout):
    if path == '-':
        stdout.write(content)
        return
    with open(path, 'w', encoding='utf-8') as f:
        f.write(content)
    logger.info(f"Wrote {path}")


def run(argv=None, stdin=None, stdout=None, stderr=None, transport=None) -> int:
    """
    Run the command line

    Parameters
    ----------
    argv : list, optional
        arguments without the program name, sys.argv[1:] when omitted.
    transport : Transport, optional
        overrides the transport chosen from the config.

    Returns
    -------
    int
        0 all verified, 1 some partial or not found, 2 usage or input
        error, 3 no source reachable for any reference.

    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    if args.print_schema:
        stdout.write(json.dumps(report_json_schema(), indent=2) + '\n')
        return EXIT_OK

    if args.input is None:
        parser.print_usage(stderr)
        stderr.write("refcheck: error: no input given\n")
        return EXIT_USAGE

    try:
        config = build_config(args)
        text = read_input(args.input, stdin)
        input_warnings = []
        inputs = split_inputs(text, args.mode, input_warnings)
        if len(inputs) > config.max_refs:
            stderr.write(
                f"refcheck: error: {len(inputs)} references exceed the limit of "
                f"{config.max_refs} (--max-refs)\n"
            )
            return EXIT_USAGE
        transport = transport or build_transport(config)
    except (RefcheckError, OSError) as e:
        stderr.write(f"refcheck: error: {e}\n")
        return EXIT_USAGE

    results = []
    total = len(inputs)

    def emit(index, result):
        results.append(result)
        if total > 1:
            stderr.write(status_line(index, total, result) + '\n')
            stderr.flush()

    verify_batch(inputs, transport, config, emit=emit)

    report = Report(results, generated_at=report_timestamp(), warnings=input_warnings)
    stdout.write(render_report(report, args.output_format))

    if args.export:
        _write(args.export, export_bibtex(report), stdout)
    if args.save:
        save_report(report, config.data_store_dir)

    code = exit_code(results)
    if code == EXIT_UNREACHABLE:
        stderr.write("refcheck: error: no source could be reached\n")
    return code


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
