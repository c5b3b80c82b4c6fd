from utils import _set_paths

_set_paths()

from refcheck.refcheck_utils import ConfigManager

config = ConfigManager()

# Reads config.yaml from the repository root, pass filepath to use another file
config.set_config()

# Environment variables REFCHECK_CONTACT and REFCHECK_OFFLINE win over the file
config.set_from_env()

# Overwrite single settings, values are validated
config.set_rate_limit_ms(1500)
config.set_contact_email('me@example.org')

print(config.rate_limit_ms, config.contact_email)
