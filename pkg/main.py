"""
cellgame
Interchangeability of Nash equilibria in one-dimensional cellular games.

Entry point for the command-line tool.
"""

import sys
import argparse
import logging

import numpy as np

import settings
from constants import EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_RESOURCE
from errors import (
    CellGameError, FormulaSyntaxError, ProofError, ProofFormatError, ResourceLimitError,
    GameSpecError, TableFormatError, PreconditionError, ConstructionError,
)
from logic import (
    parse_formula, format_formula, decide, atoms, atom_truth, evaluate_formula,
    parse_proof, check_proof, format_proof, abs_value_script,
)
from games import (
    GameSpec, build_game, parse_game_spec, expected_interchangeable,
)
from engine import (
    has_equilibrium, realizable, interchangeable, enumerate_ne_windows,
    constrained_equilibrium, format_profile, format_window,
)
from constructions import (
    g1_witness, g2_witness, gn_witness, f_profile, g_profile, random_equilibrium, residue_constant,
)
from security import read_text_file

logger = logging.getLogger("cellgame")

# Largest family distance the engine model-checks in `synth`
SYNTH_ENGINE_DISTANCE = 3

_log_handler = None


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose errors follow the tool's 'error:' line and exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def setup_logging(verbose):
    global _log_handler
    root = logging.getLogger()
    if _log_handler is None:
        _log_handler = logging.StreamHandler(sys.stderr)
        _log_handler.setFormatter(logging.Formatter("[%(name)s] %(message)s"))
        root.addHandler(_log_handler)
    _log_handler.stream = sys.stderr
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)


def emit(args, *fields):
    """Print one record: one field per line in text mode, tab-joined in lines mode."""
    if args.format == "lines":
        print("\t".join(str(f) for f in fields))
    else:
        for field in fields:
            print(field)


def _bool_text(value):
    return "true" if value else "false"


# ---------------------------------------------------------------------------
# Subcommands

def cmd_decide(args):
    formula = parse_formula(args.formula)
    verdict = decide(formula)
    if verdict.valid:
        emit(args, "VALID")
        return EXIT_OK
    emit(args, "INVALID", f"countermodel: {verdict.countermodel}", f"assignment: {verdict.assignment}")
    return EXIT_FALSE


def cmd_check_proof(args):
    text, err = read_text_file(args.path)
    if err:
        raise ProofFormatError(0, err)
    script = parse_proof(text)
    conclusion = check_proof(script)
    emit(args, format_formula(conclusion))
    return EXIT_OK


def cmd_prove(args):
    script = abs_value_script(args.a, args.b, args.c, args.d)
    sys.stdout.write(format_proof(script))
    return EXIT_OK


def _engine_feasible(spec: GameSpec) -> bool:
    if spec.kind == "PROD":
        return all(_engine_feasible(part) for part in spec.parts)
    return spec.kind != "GN" or spec.n <= SYNTH_ENGINE_DISTANCE


def cmd_synth(args):
    formula = parse_formula(args.formula)
    verdict = decide(formula)
    if verdict.valid:
        emit(args, "VALID", "nothing to synthesize")
        return EXIT_OK

    emit(args, "INVALID", f"countermodel: {verdict.countermodel}", f"assignment: {verdict.assignment}")
    if not _engine_feasible(verdict.countermodel):
        emit(args, "symbolic (engine cap)")
        return EXIT_FALSE

    game = build_game(verdict.countermodel)
    values = {}
    confirmed = True
    for atom in atoms(formula):
        engine_value = interchangeable(game, atom.a, atom.b)
        values[atom] = engine_value
        confirmed &= engine_value == atom_truth(atom, verdict.assignment)
        emit(args, f"{format_formula(atom)}\t{'T' if engine_value else 'F'}")

    formula_value = evaluate_formula(formula, values.__getitem__)
    emit(args, f"formula\t{'T' if formula_value else 'F'}")
    if not confirmed or formula_value:
        raise ConstructionError(f"engine does not confirm the countermodel {verdict.countermodel}")
    emit(args, "confirmed")
    return EXIT_FALSE


def _parse_constraint(game, text):
    position, sep, label = text.partition("=")
    if not sep:
        raise PreconditionError(f"constraint {text!r} must look like <position>=<label>")
    try:
        position = int(position)
    except ValueError:
        raise PreconditionError(f"constraint position {position!r} is not an integer") from None
    return position, game.index(label.strip())


def cmd_game(args):
    spec = parse_game_spec(args.spec)
    game = build_game(spec)
    action = args.action

    if action == "ne":
        exists = has_equilibrium(game, args.monolithic)
        found = realizable(game, args.monolithic)
        emit(args, f"has_equilibrium: {_bool_text(exists)}", f"realizable: {len(found)}")
        return EXIT_OK

    if action == "interchange":
        if args.a is None or args.b is None:
            raise PreconditionError("interchange needs --a and --b")
        result = interchangeable(game, args.a, args.b, args.monolithic)
        emit(args, _bool_text(result))
        return EXIT_OK if result else EXIT_FALSE

    if action == "windows":
        if args.length is None:
            raise PreconditionError("windows needs --length")
        for window in enumerate_ne_windows(game, args.length):
            if args.format == "lines":
                print(" ".join(game.label(c) for c in window.cells))
            else:
                print(format_window(window, game.label))
        return EXIT_OK

    if action == "constrain":
        constraints = [_parse_constraint(game, text) for text in args.at or []]
        profile = constrained_equilibrium(game, constraints)
        if profile is None:
            emit(args, "NONE")
            return EXIT_FALSE
        emit(args, format_profile(profile, game.label))
        return EXIT_OK

    if action == "table":
        mismatch = False
        for d in range(args.max_distance + 1):
            result = interchangeable(game, 0, d, args.monolithic)
            try:
                expected = _bool_text(expected_interchangeable(spec, 0, d))
            except PreconditionError:
                expected = "-"
            mismatch |= expected not in ("-", _bool_text(result))
            emit(args, f"{d}\t{_bool_text(result)}\t{expected}")
        return EXIT_FALSE if mismatch else EXIT_OK

    raise PreconditionError(f"unknown game action {action!r}")


def cmd_witness(args):
    if args.family == "g1":
        profile = g1_witness(args.s, args.t, args.a, args.b)
        emit(args, format_profile(profile))
        return EXIT_OK

    if args.family == "g2":
        f, g = residue_constant(args.s), residue_constant(args.t)
        emit(args, format_profile(g2_witness(f, g, args.a, args.b), build_game("G2").label))
        return EXIT_OK

    n = args.n
    if args.random:
        rng = np.random.default_rng(args.seed)
        f, g = random_equilibrium(n, rng), random_equilibrium(n, rng)
    else:
        f, g = f_profile(n), g_profile(n)
    profile = gn_witness(n, f, g, args.a, args.b)
    emit(args, format_profile(profile))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing

def build_parser():
    parser = CliParser(prog="cellgame", description="Interchangeability of equilibria in cellular games")
    parser.add_argument('--max-strategies', type=int, help='Cap on strategies for the monolithic engine')
    parser.add_argument('--max-atoms', type=int, help='Cap on distinct distances / tautology atoms')
    parser.add_argument('--seed', type=int, default=0, help='Seed for every random choice (default 0)')
    parser.add_argument('--format', choices=('text', 'lines'), default='text', help='Output layout')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging on stderr')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=CliParser)

    p = sub.add_parser('decide', help='Decide validity of a formula')
    p.add_argument('formula')
    p.set_defaults(handler=cmd_decide)

    p = sub.add_parser('check-proof', help='Check a proof file')
    p.add_argument('path')
    p.set_defaults(handler=cmd_check_proof)

    p = sub.add_parser('prove', help='Print a proof of a||b -> c||d for |a-b| = |c-d|')
    for name in ('a', 'b', 'c', 'd'):
        p.add_argument(name, type=int)
    p.set_defaults(handler=cmd_prove)

    p = sub.add_parser('synth', help='Synthesize and model-check a countermodel')
    p.add_argument('formula')
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser('game', help='Analyze a game')
    p.add_argument('spec', help='G0|G1|G2|GINF|GN:<n>|PROD(<spec>,...)|FILE:<path>')
    p.add_argument('action', choices=('ne', 'interchange', 'windows', 'constrain', 'table'))
    p.add_argument('--a', type=int)
    p.add_argument('--b', type=int)
    p.add_argument('--length', type=int)
    p.add_argument('--at', action='append', metavar='POS=LABEL')
    p.add_argument('--max-distance', type=int, default=6)
    p.add_argument('--monolithic', action='store_true', help='Analyze products as one game')
    p.set_defaults(handler=cmd_game)

    p = sub.add_parser('witness', help='Construct an interchangeability witness')
    p.add_argument('family', choices=('g1', 'g2', 'gn'))
    p.add_argument('--a', type=int, required=True)
    p.add_argument('--b', type=int, required=True)
    p.add_argument('--s', type=int, default=0, help='Strategy at a (g1, g2)')
    p.add_argument('--t', type=int, default=0, help='Strategy at b (g1, g2)')
    p.add_argument('--n', type=int, default=3)
    p.add_argument('--random', action='store_true', help='Random equilibria from --seed (gn)')
    p.set_defaults(handler=cmd_witness)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    settings.load_settings()
    settings.override_settings(max_strategies=args.max_strategies, max_atoms=args.max_atoms)

    try:
        return args.handler(args)
    except ResourceLimitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ProofError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FALSE
    except (FormulaSyntaxError, ProofFormatError, GameSpecError, TableFormatError, PreconditionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as e:
        print(f"error: internal: {e}", file=sys.stderr)
        return EXIT_FALSE
    except CellGameError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FALSE


if __name__ == "__main__":
    sys.exit(main())
