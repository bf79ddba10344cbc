"""
Constants and configuration defaults for cellgame.
"""

# Resource caps (overridable through settings.json, environment and CLI flags)
DEFAULT_MAX_STRATEGIES = 4096          # monolithic best-response relation
DEFAULT_MAX_ENUMERATION = 65536        # strategy enumeration in build_game
DEFAULT_MAX_TABLE_CELLS = 2 ** 25      # payoff cube materialisation
DEFAULT_MAX_ATOMS = 20                 # decide / tautology truth tables
DEFAULT_MAX_WINDOWS = 2 ** 20          # enumerate_ne_windows output bound
DEFAULT_MAX_TRANSFER_TRIPLES = 2 ** 25
DEFAULT_MAX_CONSTRAINTS = 8

# Parentheses, negations and implication chains nest at most this deep
MAX_FORMULA_DEPTH = 100

# Largest n for which the G_n payoff is evaluated at all
MAX_GN_PARAMETER = 64

# Environment variables read once at startup
ENV_MAX_STRATEGIES = "CELLGAME_MAX_STRATEGIES"
ENV_MAX_ATOMS = "CELLGAME_MAX_ATOMS"
ENV_MAX_ENUMERATION = "CELLGAME_MAX_ENUMERATION"

# Text formats
TABLE_HEADER = "cellgame-table v1"
PROFILE_HEADER = "profile v1"
WINDOW_HEADER = "window v1"

# Canonical labels
G0_LABELS = ("0", "1")
RESIDUE_LABELS = ("0", "1", "2")
PENNIES_LABELS = ("HH", "HT", "TH", "TT")
GINF_LABELS = ("0",)
PRODUCT_SEPARATOR = "×"

# Input files
MAX_INPUT_BYTES = 1024 * 1024

# CLI exit codes
EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
