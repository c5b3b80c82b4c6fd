import re
import yaml
import logging
import os
import json

import pandas as pd

from datetime import datetime

from concurrent.futures import ThreadPoolExecutor

from dotenv import load_dotenv

from .errors import ConfigError


# Get the absolute path of the current script
current_script_path = os.path.abspath(__file__)
base_dir = os.path.abspath(
    os.path.join(current_script_path, '..', '..')
)
package_dir = os.path.join(base_dir, 'refcheck')

logging.basicConfig(
    format='{asctime} {levelname}: {message}',
    datefmt='%m/%d/%Y %I:%M:%S %p',
    style='{',
    level=logging.INFO
)


# Functions required for multithreading
def execute_call(call):
    return call()


def execute_threading(function_calls):
    """
    Run a list of zero-argument callables concurrently and return their
    results in the order of the input list
    """
    with ThreadPoolExecutor() as executor:
        results = list(executor.map(execute_call, function_calls))
    return results


DEFAULT_ENDPOINTS = {
    'crossref': 'https://api.crossref.org/works',
    'semantic_scholar': 'https://api.semanticscholar.org/graph/v1/paper/search',
    'openalex': 'https://api.openalex.org/works'
}


class ConfigManager:

    def __init__(self):

        self.endpoints = dict(DEFAULT_ENDPOINTS)
        self.rate_limit_ms = 800
        self.timeout_seconds = 10.0
        self.retries = 1
        self.retry_backoff_seconds = 1.0
        self.rows = 3
        self.max_refs = 500
        self.contact_email = None
        self.offline_fixture_dir = None
        self.concurrent_fallback = True
        self.data_store_dir = os.path.join(package_dir, 'data_store')

    def set_config(self, filepath: str = os.path.join(base_dir, "config.yaml")):

        try:
            with open(filepath, 'r') as file:
                config_file = yaml.safe_load(file) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Could not read config file {filepath}: {e}")

        if not isinstance(config_file, dict):
            raise ConfigError(f"Config file {filepath} must hold a mapping")

        for name, url in (config_file.get('endpoints') or {}).items():
            self.set_endpoint(name, url)

        setters = {
            'rate_limit_ms': self.set_rate_limit_ms,
            'timeout_seconds': self.set_timeout_seconds,
            'retries': self.set_retries,
            'retry_backoff_seconds': self.set_retry_backoff_seconds,
            'rows': self.set_rows,
            'max_refs': self.set_max_refs,
            'contact_email': self.set_contact_email,
            'offline_fixture_dir': self.set_offline_fixture_dir,
            'concurrent_fallback': self.set_concurrent_fallback,
            'data_store_dir': self.set_data_store_dir
        }
        for key, setter in setters.items():
            if config_file.get(key) is not None:
                setter(config_file[key])

        return self

    def set_from_env(self):
        """
        Apply REFCHECK_CONTACT and REFCHECK_OFFLINE from the environment
        (or a .env file) over the values loaded so far
        """
        load_dotenv()

        if os.getenv("REFCHECK_CONTACT"):
            self.set_contact_email(os.getenv("REFCHECK_CONTACT"))
        if os.getenv("REFCHECK_OFFLINE"):
            self.set_offline_fixture_dir(os.getenv("REFCHECK_OFFLINE"))

        return self

    def set_endpoint(self, name: str, url: str):
        if name not in DEFAULT_ENDPOINTS:
            raise ConfigError(f"Unknown endpoint '{name}'")
        self.endpoints[name] = url

    def set_rate_limit_ms(self, value):
        value = _as_number(value, 'rate_limit_ms', int)
        if value < 0:
            raise ConfigError("rate_limit_ms must be >= 0")
        self.rate_limit_ms = value

    def set_timeout_seconds(self, value):
        value = _as_number(value, 'timeout_seconds', float)
        if value <= 0:
            raise ConfigError("timeout_seconds must be > 0")
        self.timeout_seconds = value

    def set_retries(self, value):
        value = _as_number(value, 'retries', int)
        if value < 0:
            raise ConfigError("retries must be >= 0")
        self.retries = value

    def set_retry_backoff_seconds(self, value):
        value = _as_number(value, 'retry_backoff_seconds', float)
        if value < 0:
            raise ConfigError("retry_backoff_seconds must be >= 0")
        self.retry_backoff_seconds = value

    def set_rows(self, value):
        value = _as_number(value, 'rows', int)
        if value < 1:
            raise ConfigError("rows must be >= 1")
        self.rows = value

    def set_max_refs(self, value):
        value = _as_number(value, 'max_refs', int)
        if value < 1:
            raise ConfigError("max_refs must be >= 1")
        self.max_refs = value

    def set_contact_email(self, value):
        self.contact_email = value

    def set_offline_fixture_dir(self, value):
        self.offline_fixture_dir = value

    def set_concurrent_fallback(self, value):
        self.concurrent_fallback = bool(value)

    def set_data_store_dir(self, value):
        self.data_store_dir = value


def _as_number(value, name: str, kind):
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}")


def save_json_file_to_datastore(filename: str, data: dict, data_store_dir: str = None):
    """
    Save a dictionary as json file to the datastore directory

    Parameters
    ----------
    filename : str
        filename of json.
    data : dict
        dictionary of data.
    data_store_dir : str, optional
        directory to write into, defaults to the package data_store.

    """
    filepath = os.path.join(
        data_store_dir or os.path.join(package_dir, 'data_store'),
        filename
    )
    os.makedirs(os.path.dirname(filepath), exist_ok=True)

    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False)

    return filepath


def make_timestamped_dataframe(rows: list):
    """
    Build a dataframe from a list of row dicts with a column for timestamp

    Parameters
    ----------
    rows : list
        one dict per row.

    """
    dataframe = pd.DataFrame(rows)
    dataframe['timestamp'] = datetime.now()

    return dataframe


def save_csv_to_datastore(filename: str, dataframe, data_store_dir: str = None):
    """
    For a given filename, save pandas dataframe as a csv to datastore,
    appending to an existing archive of the same name

    Parameters
    ----------
    filename : str
        name of file.
    dataframe : pd.DataFrame
        pandas dataframe

    """

    archive_filepath = os.path.join(
        data_store_dir or os.path.join(package_dir, 'data_store'),
        filename
    )
    os.makedirs(os.path.dirname(archive_filepath), exist_ok=True)

    if os.path.exists(archive_filepath):
        archive = pd.read_csv(
            archive_filepath
        )
        dataframe = pd.concat([archive, dataframe])

    dataframe.to_csv(archive_filepath, index=False)

    return archive_filepath


DOI_PREFIX = re.compile(
    r'^(?:https?://(?:dx\.)?doi\.org/|doi:\s*)', re.IGNORECASE
)


def normalize_doi(doi: str):
    """
    Strip scheme, host and "doi:" prefixes and lowercase a DOI

    Parameters
    ----------
    doi : str
        DOI as returned by a source or typed by a user.

    Returns
    -------
    str or None
        bare lowercase DOI, None when nothing is left.

    """
    if not doi:
        return None
    doi = DOI_PREFIX.sub('', doi.strip()).strip().rstrip('.,;').lower()
    return doi or None


def split_name(name: str):
    """
    Split an author name into (family, given). "Family, Given" uses the
    part before the first comma, otherwise the last whitespace token is
    the family name.
    """
    name = ' '.join(name.split())
    if ',' in name:
        family, given = name.split(',', 1)
        return family.strip(), given.strip() or None
    parts = name.split(' ')
    if len(parts) == 1:
        return parts[0], None
    return parts[-1], ' '.join(parts[:-1])
