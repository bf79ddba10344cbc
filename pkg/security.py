"""
Input validation for cellgame.
Checks user-supplied files (game tables, proof files) before they are parsed.
"""

import os
import re

from constants import MAX_INPUT_BYTES

# Strategy labels in game tables: no whitespace, no "#", no commas
LABEL_PATTERN = re.compile(r'^[A-Za-z0-9_.\-\[\];]+$')


def is_safe_path(file_path):
    """
    Validate that a path names a readable regular input file.

    Returns: (is_safe: bool, resolved_path: str or None, error: str or None)
    """
    if not file_path:
        return False, None, "Empty path"

    if '\x00' in file_path:
        return False, None, "Null byte in path"

    try:
        resolved = os.path.normpath(os.path.abspath(file_path))
    except (ValueError, OSError) as e:
        return False, None, f"Invalid path: {e}"

    if not os.path.exists(resolved):
        return False, None, f"No such file: {file_path}"
    if not os.path.isfile(resolved):
        return False, None, f"Not a regular file: {file_path}"

    size = os.path.getsize(resolved)
    if size > MAX_INPUT_BYTES:
        return False, None, f"File too large ({size} bytes, max {MAX_INPUT_BYTES})"

    return True, resolved, None


def is_valid_label(label):
    """
    Validate a strategy label from a game table.

    Returns: (is_valid: bool, error: str or None)
    """
    if not isinstance(label, str) or not label:
        return False, "Empty label"
    if len(label) > 200:
        return False, "Label too long (max 200 chars)"
    if not LABEL_PATTERN.match(label):
        return False, f"Invalid characters in label {label!r}"
    return True, None


def read_text_file(file_path):
    """
    Read a validated UTF-8 input file.

    Returns: (text: str or None, error: str or None)
    """
    safe, resolved, err = is_safe_path(file_path)
    if not safe:
        return None, err
    try:
        with open(resolved, 'r', encoding='utf-8') as f:
            return f.read(), None
    except UnicodeDecodeError:
        return None, "File is not valid UTF-8"
    except OSError as e:
        return None, f"Cannot read file: {e}"
