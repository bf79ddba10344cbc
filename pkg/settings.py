"""
Settings management for cellgame.
Resolves resource caps from defaults, an optional settings.json and the environment.
"""

import os
import sys
import json
import logging

from constants import (
    DEFAULT_MAX_STRATEGIES, DEFAULT_MAX_ENUMERATION, DEFAULT_MAX_TABLE_CELLS,
    DEFAULT_MAX_ATOMS, DEFAULT_MAX_WINDOWS, DEFAULT_MAX_TRANSFER_TRIPLES,
    DEFAULT_MAX_CONSTRAINTS,
    ENV_MAX_STRATEGIES, ENV_MAX_ATOMS, ENV_MAX_ENUMERATION,
)

logger = logging.getLogger(__name__)


def get_app_dir():
    """Directory holding the modules (or the frozen executable)."""
    if getattr(sys, 'frozen', False):
        return os.path.dirname(sys.executable)
    return os.path.dirname(os.path.abspath(__file__))


SETTINGS_FILE = os.path.join(get_app_dir(), "settings.json")

DEFAULT_SETTINGS = {
    "max_strategies": DEFAULT_MAX_STRATEGIES,
    "max_enumeration": DEFAULT_MAX_ENUMERATION,
    "max_table_cells": DEFAULT_MAX_TABLE_CELLS,
    "max_atoms": DEFAULT_MAX_ATOMS,
    "max_windows": DEFAULT_MAX_WINDOWS,
    "max_transfer_triples": DEFAULT_MAX_TRANSFER_TRIPLES,
    "max_constraints": DEFAULT_MAX_CONSTRAINTS,
}

# Environment overrides, read once per process
ENV_OVERRIDES = {
    ENV_MAX_STRATEGIES: "max_strategies",
    ENV_MAX_ATOMS: "max_atoms",
    ENV_MAX_ENUMERATION: "max_enumeration",
}

_settings = None


def _read_settings_file(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        logger.warning("Error loading settings: %s", e)
        return {}
    if not isinstance(data, dict):
        logger.warning("Ignoring %s: root must be an object", path)
        return {}
    loaded = {}
    for key, value in data.items():
        if key not in DEFAULT_SETTINGS:
            logger.warning("Ignoring unknown setting %r", key)
        elif not isinstance(value, int) or isinstance(value, bool) or value < 1:
            logger.warning("Ignoring setting %r: expected a positive integer", key)
        else:
            loaded[key] = value
    return loaded


def _read_environment(environ):
    loaded = {}
    for var, key in ENV_OVERRIDES.items():
        raw = environ.get(var)
        if raw is None:
            continue
        try:
            value = int(raw)
        except ValueError:
            logger.warning("Ignoring %s=%r: not an integer", var, raw)
            continue
        if value < 1:
            logger.warning("Ignoring %s=%r: must be positive", var, raw)
            continue
        loaded[key] = value
    return loaded


def load_settings(path=None, environ=None):
    """Load settings, layering the settings file and the environment over the defaults."""
    global _settings

    settings = DEFAULT_SETTINGS.copy()
    path = SETTINGS_FILE if path is None else path
    if os.path.exists(path):
        settings.update(_read_settings_file(path))
    settings.update(_read_environment(os.environ if environ is None else environ))
    _settings = settings
    return _settings


def get_setting(key, default=None):
    """Get a setting value."""
    if _settings is None:
        load_settings()
    return _settings.get(key, default)


def override_settings(**overrides):
    """Apply explicit overrides (CLI flags); None values are skipped."""
    if _settings is None:
        load_settings()
    for key, value in overrides.items():
        if key not in DEFAULT_SETTINGS:
            raise KeyError(key)
        if value is not None:
            _settings[key] = value
    return _settings


def reset_settings():
    """Forget cached settings (next access reloads)."""
    global _settings
    _settings = None
