"""
Formula language for the interchangeability predicate a||b.

Covers the concrete syntax (tokenizer, recursive-descent parser, canonical
printer), classical evaluation under the two assignment families that the
cellular games realise, the validity decision procedure with countermodel
synthesis, and a checker for Hilbert-style proof scripts built from the
Reflexivity, Homogeneity and Symmetry schemes, tautologies and Modus Ponens.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Union

from constants import MAX_FORMULA_DEPTH
from errors import (
    FormulaSyntaxError, ProofError, ProofFormatError, ResourceLimitError, PreconditionError,
)
from games import GameSpec, G0_SPEC, GINF_SPEC, family_spec, product_spec
from settings import get_setting

logger = logging.getLogger(__name__)

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Atom:
    a: int
    b: int

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"

    def __str__(self):
        return format_formula(self)


Formula = Union[Bottom, Atom, Implies, And, Or]

BOTTOM = Bottom()


def negate(f: Formula) -> Formula:
    """!f, i.e. f -> false."""
    return Implies(f, BOTTOM)


def conjunction(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return negate(BOTTOM)
    result = parts[0]
    for part in parts[1:]:
        result = And(result, part)
    return result


def reflexivity_axiom(a: int, b: int) -> Formula:
    return Implies(Atom(a, a), Atom(a, b))


def homogeneity_axiom(a: int, b: int, c: int) -> Formula:
    return Implies(Atom(a, b), Atom(a + c, b + c))


def symmetry_axiom(a: int, b: int) -> Formula:
    return Implies(Atom(a, b), Atom(b, a))


def chain_hypothesis(p: int, n: int) -> Formula:
    """p||p+1 & ... & p||p+n-1 -> p||p+n: true in every game only if no G_n existed."""
    if n < 2:
        raise PreconditionError("chain hypothesis needs n >= 2")
    return Implies(conjunction(Atom(p, p + k) for k in range(1, n)), Atom(p, p + n))


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order, left to right."""
    yield f
    if isinstance(f, (Implies, And, Or)):
        yield from subformulas(f.lhs)
        yield from subformulas(f.rhs)


def atoms(f: Formula) -> list:
    """Distinct atoms in order of first occurrence."""
    seen = {}
    for sub in subformulas(f):
        if isinstance(sub, Atom):
            seen.setdefault(sub, None)
    return list(seen)


def distances(f: Formula) -> frozenset:
    return frozenset(abs(atom.a - atom.b) for atom in atoms(f) if atom.a != atom.b)


# ---------------------------------------------------------------------------
# Tokenizer and parser

class Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r}, {self.pos})"


def tokenize(source: str) -> list:
    """Maximal munch: '||' before '|', '->' before a negative integer."""
    result = []
    idx = 0
    length = len(source)

    while idx < length:
        c = source[idx]
        if c.isspace():
            idx += 1
            continue
        start = idx
        if c == "|":
            if source.startswith("||", idx):
                result.append(Token("PAR", "||", start))
                idx += 2
            else:
                result.append(Token("OR", "|", start))
                idx += 1
            continue
        if c == "-":
            if source.startswith("->", idx):
                result.append(Token("ARROW", "->", start))
                idx += 2
                continue
            if idx + 1 < length and source[idx + 1].isdigit():
                idx += 1
            else:
                raise FormulaSyntaxError("expected digit or '>' after '-'", start)
        if source[idx].isdigit():
            while idx < length and source[idx].isdigit():
                idx += 1
            value = int(source[start:idx])
            if not INT64_MIN <= value <= INT64_MAX:
                raise FormulaSyntaxError("integer outside the 64-bit range", start)
            result.append(Token("INT", value, start))
            continue
        if c == "!":
            result.append(Token("NOT", "!", start))
            idx += 1
            continue
        if c == "&":
            result.append(Token("AND", "&", start))
            idx += 1
            continue
        if c == "(":
            result.append(Token("LPAREN", "(", start))
            idx += 1
            continue
        if c == ")":
            result.append(Token("RPAREN", ")", start))
            idx += 1
            continue
        if c.isalpha():
            while idx < length and source[idx].isalnum():
                idx += 1
            word = source[start:idx]
            if word != "false":
                raise FormulaSyntaxError(f"unknown word {word!r}", start)
            result.append(Token("FALSE", word, start))
            continue
        raise FormulaSyntaxError(f"unexpected character {c!r}", start)

    result.append(Token("EOF", None, length))
    return result


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.idx = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.idx]

    def advance(self):
        token = self.tokens[self.idx]
        self.idx += 1
        return token

    def expect(self, kind, what):
        token = self.advance()
        if token.kind != kind:
            found = "end of input" if token.kind == "EOF" else repr(token.value)
            raise FormulaSyntaxError(f"expected {what}, found {found}", token.pos)
        return token

    def nested(self, token, parse):
        if self.depth >= MAX_FORMULA_DEPTH:
            raise FormulaSyntaxError(f"formula nested deeper than {MAX_FORMULA_DEPTH} levels", token.pos)
        self.depth += 1
        try:
            return parse()
        finally:
            self.depth -= 1

    def formula(self):
        lhs = self.disjunction()
        if self.peek().kind == "ARROW":
            arrow = self.advance()
            return Implies(lhs, self.nested(arrow, self.formula))
        return lhs

    def disjunction(self):
        result = self.conjunction()
        while self.peek().kind == "OR":
            self.advance()
            result = Or(result, self.conjunction())
        return result

    def conjunction(self):
        result = self.unary()
        while self.peek().kind == "AND":
            self.advance()
            result = And(result, self.unary())
        return result

    def unary(self):
        token = self.advance()
        if token.kind == "NOT":
            return negate(self.nested(token, self.unary))
        if token.kind == "FALSE":
            return BOTTOM
        if token.kind == "LPAREN":
            inner = self.nested(token, self.formula)
            self.expect("RPAREN", "')'")
            return inner
        if token.kind == "INT":
            self.expect("PAR", "'||'")
            rhs = self.expect("INT", "integer")
            return Atom(token.value, rhs.value)
        found = "end of input" if token.kind == "EOF" else repr(token.value)
        raise FormulaSyntaxError(f"expected formula, found {found}", token.pos)


def parse_formula(text: str) -> Formula:
    parser = _Parser(tokenize(text))
    result = parser.formula()
    tail = parser.peek()
    if tail.kind != "EOF":
        raise FormulaSyntaxError(f"unexpected {tail.value!r}", tail.pos)
    return result


# Binding strength: implication < or < and < unary/atoms
_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4


def format_formula(f: Formula, context: int = _PREC_IMPLIES) -> str:
    """Canonical text; parse_formula(format_formula(f)) == f."""
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f"{f.a} || {f.b}"
    if isinstance(f, Implies) and isinstance(f.rhs, Bottom):
        return "!" + format_formula(f.lhs, _PREC_UNARY)
    if isinstance(f, Implies):
        text = f"{format_formula(f.lhs, _PREC_OR)} -> {format_formula(f.rhs, _PREC_IMPLIES)}"
        own = _PREC_IMPLIES
    elif isinstance(f, Or):
        text = f"{format_formula(f.lhs, _PREC_OR)} | {format_formula(f.rhs, _PREC_AND)}"
        own = _PREC_OR
    elif isinstance(f, And):
        text = f"{format_formula(f.lhs, _PREC_AND)} & {format_formula(f.rhs, _PREC_UNARY)}"
        own = _PREC_AND
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if context > own else text


# ---------------------------------------------------------------------------
# Semantics

@dataclass(frozen=True)
class AllTrue:
    """Every atom holds; realised by the one-strategy game."""

    def __str__(self):
        return "ALL"


@dataclass(frozen=True)
class Distance:
    """a||b holds iff a != b and |a-b| is not in D."""
    D: frozenset = frozenset()

    def __post_init__(self):
        values = frozenset(int(d) for d in self.D)
        if any(d < 0 for d in values):
            raise PreconditionError("distances must be non-negative")
        object.__setattr__(self, "D", frozenset(d for d in values if d > 0))

    def __str__(self):
        return "D={" + ",".join(str(d) for d in sorted(self.D)) + "}"


Assignment = Union[AllTrue, Distance]

ALL_TRUE = AllTrue()


def evaluate_formula(f: Formula, atom_value: Callable[[Atom], bool]) -> bool:
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return atom_value(f)
    if isinstance(f, Implies):
        return (not evaluate_formula(f.lhs, atom_value)) or evaluate_formula(f.rhs, atom_value)
    if isinstance(f, And):
        return evaluate_formula(f.lhs, atom_value) and evaluate_formula(f.rhs, atom_value)
    if isinstance(f, Or):
        return evaluate_formula(f.lhs, atom_value) or evaluate_formula(f.rhs, atom_value)
    raise TypeError(f"not a formula: {f!r}")


def atom_truth(atom: Atom, assignment: Assignment) -> bool:
    if isinstance(assignment, AllTrue):
        return True
    return atom.a != atom.b and abs(atom.a - atom.b) not in assignment.D


def eval_formula(f: Formula, assignment: Assignment) -> bool:
    return evaluate_formula(f, lambda atom: atom_truth(atom, assignment))


def countermodel_spec(assignment: Assignment) -> GameSpec:
    """The game realising an assignment: G_inf, G_0, or the product of G_d over D."""
    if isinstance(assignment, AllTrue):
        return GINF_SPEC
    if not assignment.D:
        return G0_SPEC
    return product_spec([family_spec(d) for d in sorted(assignment.D)])


@dataclass(frozen=True)
class Verdict:
    valid: bool
    countermodel: GameSpec = None
    assignment: Assignment = None

    def __str__(self):
        if self.valid:
            return "VALID"
        return f"INVALID countermodel: {self.countermodel} assignment: {self.assignment}"


VALID = Verdict(True)


def candidate_assignments(ds) -> Iterator[Assignment]:
    """AllTrue, then Distance(D) for D by increasing size, then lexicographically."""
    yield ALL_TRUE
    ds = sorted(ds)
    for size in range(len(ds) + 1):
        for subset in itertools.combinations(ds, size):
            yield Distance(frozenset(subset))


def decide(f: Formula, max_atoms: int = None) -> Verdict:
    """Validity over all cellular games; INVALID carries the smallest countermodel."""
    limit = get_setting("max_atoms") if max_atoms is None else max_atoms
    ds = distances(f)
    if len(ds) > limit:
        raise ResourceLimitError("distinct distances", len(ds), limit)

    for assignment in candidate_assignments(ds):
        if not eval_formula(f, assignment):
            spec = countermodel_spec(assignment)
            logger.info("Countermodel for %s: %s under %s", format_formula(f), spec, assignment)
            return Verdict(False, spec, assignment)
    return VALID


# ---------------------------------------------------------------------------
# Proof scripts

@dataclass(frozen=True)
class Taut:
    def __str__(self):
        return "TAUT"


@dataclass(frozen=True)
class Refl:
    a: int
    b: int

    def __str__(self):
        return f"REFL {self.a} {self.b}"


@dataclass(frozen=True)
class Hom:
    a: int
    b: int
    c: int

    def __str__(self):
        return f"HOM {self.a} {self.b} {self.c}"


@dataclass(frozen=True)
class Sym:
    a: int
    b: int

    def __str__(self):
        return f"SYM {self.a} {self.b}"


@dataclass(frozen=True)
class MP:
    i: int
    j: int

    def __str__(self):
        return f"MP {self.i} {self.j}"


Justification = Union[Taut, Refl, Hom, Sym, MP]

TAUT = Taut()


@dataclass(frozen=True)
class ProofLine:
    index: int
    formula: Formula
    justification: Justification


@dataclass(frozen=True)
class ProofScript:
    lines: tuple

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    @property
    def conclusion(self) -> Formula:
        return self.lines[-1].formula


def is_tautology(f: Formula, max_atoms: int = None) -> bool:
    """Propositional validity, treating distinct atoms as independent variables."""
    limit = get_setting("max_atoms") if max_atoms is None else max_atoms
    variables = atoms(f)
    if len(variables) > limit:
        raise ResourceLimitError("distinct atoms", len(variables), limit)
    for row in itertools.product((False, True), repeat=len(variables)):
        valuation = dict(zip(variables, row))
        if not evaluate_formula(f, valuation.__getitem__):
            return False
    return True


def _scheme_instance(justification: Justification):
    if isinstance(justification, Refl):
        return reflexivity_axiom(justification.a, justification.b)
    if isinstance(justification, Hom):
        return homogeneity_axiom(justification.a, justification.b, justification.c)
    if isinstance(justification, Sym):
        return symmetry_axiom(justification.a, justification.b)
    return None


def check_proof(script: ProofScript, max_atoms: int = None) -> Formula:
    """Verify every line; return the conclusion."""
    if not script.lines:
        raise ProofError(0, "empty proof")

    proved = {}
    previous = 0
    for line in script.lines:
        if line.index <= previous:
            raise ProofError(line.index, f"index {line.index} does not increase (previous {previous})")
        previous = line.index
        justification = line.justification

        if isinstance(justification, Taut):
            try:
                holds = is_tautology(line.formula, max_atoms)
            except ResourceLimitError as e:
                raise ProofError(line.index, f"tautology guard exceeded: {e}") from e
            if not holds:
                raise ProofError(line.index, "not a propositional tautology")
        elif isinstance(justification, MP):
            for ref in (justification.i, justification.j):
                if ref not in proved:
                    raise ProofError(line.index, f"MP references line {ref}, which is not an earlier line")
            major = proved[justification.j]
            expected = Implies(proved[justification.i], line.formula)
            if major != expected:
                raise ProofError(
                    line.index,
                    f"line {justification.j} is not '{format_formula(expected)}'",
                )
        else:
            expected = _scheme_instance(justification)
            if expected is None:
                raise ProofError(line.index, f"unknown justification {justification!r}")
            if line.formula != expected:
                raise ProofError(
                    line.index,
                    f"scheme mismatch for {justification}: expected '{format_formula(expected)}'",
                )
        proved[line.index] = line.formula

    return script.conclusion


def abs_value_script(a: int, b: int, c: int, d: int) -> ProofScript:
    """Derivation of a||b -> c||d whenever |a-b| = |c-d|."""
    if abs(a - b) != abs(c - d):
        raise PreconditionError(f"|{a}-{b}| != |{c}-{d}|")

    if a - b == c - d:
        # one shift by c-a lands exactly on (c, d)
        return ProofScript((ProofLine(1, homogeneity_axiom(a, b, c - a), Hom(a, b, c - a)),))

    # opposite orientation: flip first, then shift b||a onto c||d
    flip = symmetry_axiom(a, b)
    shift = homogeneity_axiom(b, a, c - b)
    goal = Implies(Atom(a, b), Atom(c, d))
    chain = Implies(flip, Implies(shift, goal))
    return ProofScript((
        ProofLine(1, flip, Sym(a, b)),
        ProofLine(2, shift, Hom(b, a, c - b)),
        ProofLine(3, chain, TAUT),
        ProofLine(4, Implies(shift, goal), MP(1, 3)),
        ProofLine(5, goal, MP(2, 4)),
    ))


_LINE_PATTERN = re.compile(r'^\s*(\d+)\.\s*(.*)$')
_JUSTIFICATION_ARITY = {"TAUT": 0, "REFL": 2, "HOM": 3, "SYM": 2, "MP": 2}


def _parse_justification(text, line_number):
    words = text.split()
    if not words:
        raise ProofFormatError(line_number, "missing justification")
    name = words[0].upper()
    if name not in _JUSTIFICATION_ARITY:
        raise ProofFormatError(line_number, f"unknown justification {words[0]!r}")
    if len(words) - 1 != _JUSTIFICATION_ARITY[name]:
        raise ProofFormatError(line_number, f"{name} takes {_JUSTIFICATION_ARITY[name]} arguments")
    try:
        args = [int(w) for w in words[1:]]
    except ValueError:
        raise ProofFormatError(line_number, f"non-integer argument in {text.strip()!r}") from None
    if name == "TAUT":
        return TAUT
    return {"REFL": Refl, "HOM": Hom, "SYM": Sym, "MP": MP}[name](*args)


def parse_proof(text: str) -> ProofScript:
    """Proof file: '<index>. <formula> ; <justification>' per line, '#' comments."""
    lines = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        body, sep, justification = content.rpartition(";")
        if not sep:
            raise ProofFormatError(line_number, "missing ';' before the justification")
        match = _LINE_PATTERN.match(body)
        if not match:
            raise ProofFormatError(line_number, "expected '<index>. <formula>'")
        try:
            formula = parse_formula(match.group(2))
        except FormulaSyntaxError as e:
            raise ProofFormatError(line_number, f"formula: {e}") from e
        lines.append(ProofLine(int(match.group(1)), formula, _parse_justification(justification, line_number)))
    if not lines:
        raise ProofFormatError(0, "no proof lines")
    return ProofScript(tuple(lines))


def format_proof(script: ProofScript) -> str:
    return "".join(
        f"{line.index}. {format_formula(line.formula)} ; {line.justification}\n" for line in script
    )
