"""Boundary control of stochastic Navier-Stokes flow with Navier-slip conditions."""

import json

from ._core import BlowUpError, ConfigError, __version__, spectrum
from . import _core

__all__ = ["ConfigError", "BlowUpError", "spectrum", "normalize_config", "evaluate", "verify", "run", "__version__"]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def normalize_config(config):
    """Validated config with every default filled in, as a dict."""
    return json.loads(_core.normalize_config(_text(config)))


def evaluate(config):
    """Cost and gradient at the configured initial controls."""
    return _core.evaluate(_text(config))


def verify(config):
    """Run the verification suite and return one dict per check."""
    return _core.verify(_text(config))


def run(command, config, out_dir=""):
    """Run a CLI subcommand in-process; returns (exit_status, log)."""
    return _core.run(command, _text(config), out_dir)
