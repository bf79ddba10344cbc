import itertools

import numpy as np
import pytest

from errors import GameSpecError, PreconditionError, ResourceLimitError, TableFormatError
from games import (
    GameSpec, G0_SPEC, G1_SPEC, G2_SPEC, GINF_SPEC, gn_spec, file_spec, product_spec, family_spec,
    parse_game_spec, expected_interchangeable, build_game, game_size, parse_game_table, load_game_table,
    Residue, Pennies, G2_STRATEGIES, g2_strategy, g2_id, g2_components,
    MatrixStrategy, gn_strategy_count, gn_decode, gn_encode, gn_payoff_conditions, gn_best_response,
    gn_best_response_array, semiperfect_triple, perfect_triple, ProductGame,
)


# ---------------------------------------------------------------------------
# Specs

@pytest.mark.parametrize("text", ["G0", "G1", "G2", "GINF", "GN:3", "GN:12", "PROD(G1,G2)", "PROD(G0,PROD(G1,GN:4))"])
def test_spec_text_is_canonical(text) -> None:
    assert str(parse_game_spec(text)) == text


def test_spec_parser_structure() -> None:
    spec = parse_game_spec("PROD(G1,FILE:tables/g0.tbl)")
    assert spec.kind == "PROD"
    assert spec.parts == (G1_SPEC, file_spec("tables/g0.tbl"))
    assert parse_game_spec("FILE:some dir/x.tbl").path == "some dir/x.tbl"


@pytest.mark.parametrize("text", ["", "G3", "GN:2", "GN:", "PROD()", "PROD(G1", "G1G2", "FILE:", "gn:3"])
def test_bad_specs(text) -> None:
    with pytest.raises(GameSpecError):
        parse_game_spec(text)


def test_product_of_one_is_the_component() -> None:
    assert product_spec([gn_spec(3)]) == gn_spec(3)
    with pytest.raises(GameSpecError):
        GameSpec("PROD")


def test_family_selector() -> None:
    assert [family_spec(d) for d in range(5)] == [G0_SPEC, G1_SPEC, G2_SPEC, gn_spec(3), gn_spec(4)]
    with pytest.raises(PreconditionError):
        family_spec(-1)


def test_closed_form_table() -> None:
    rows = {
        "G0": [False] + [True] * 6,
        "G1": [False, False] + [True] * 5,
        "G2": [False, True, False, True, True, True, True],
        "GN:3": [False, True, True, False, True, True, True],
        "GINF": [True] * 7,
    }
    for text, expected in rows.items():
        spec = parse_game_spec(text)
        assert [expected_interchangeable(spec, 0, d) for d in range(7)] == expected
    prod = parse_game_spec("PROD(G1,GN:4)")
    assert [expected_interchangeable(prod, 3, 3 + d) for d in range(6)] == [False, False, True, True, False, True]
    with pytest.raises(PreconditionError):
        expected_interchangeable(file_spec("x.tbl"), 0, 1)


# ---------------------------------------------------------------------------
# Small families

def test_g0_and_ginf_pay_nothing() -> None:
    for spec in (G0_SPEC, GINF_SPEC):
        game = build_game(spec)
        assert not game.payoff_table().any()
    assert build_game(GINF_SPEC).strategy_count == 1


def test_g1_loses_only_on_left_plus_two() -> None:
    game = build_game(G1_SPEC)
    for x, y, z in itertools.product(range(3), repeat=3):
        assert game.payoff(x, y, z) == (0 if y == (x + 2) % 3 else 1)


def test_g2_strategy_ids() -> None:
    assert [str(s) for s in G2_STRATEGIES] == ["0", "1", "2", "HH", "HT", "TH", "TT"]
    assert g2_strategy(5) == Pennies("T", "H")
    assert g2_id(Residue(2)) == 2
    with pytest.raises(PreconditionError):
        Residue(3)
    with pytest.raises(PreconditionError):
        Pennies("H", "X")


def test_g2_vectorised_payoff_matches_definition() -> None:
    game = build_game(G2_SPEC)
    table = game.payoff_table()
    for x, y, z in itertools.product(range(7), repeat=3):
        expected = sum(g2_components(g2_strategy(x), g2_strategy(y), g2_strategy(z)))
        assert table[x, y, z] == expected


def test_g2_pennies_components() -> None:
    hh, ht, th = Pennies("H", "H"), Pennies("H", "T"), Pennies("T", "H")
    # residues 0 and 2 reward a pennies player in between
    assert g2_components(Residue(0), hh, Residue(2)) == (1, 0, 0)
    assert g2_components(Residue(0), hh, Residue(1)) == (0, 0, 0)
    # u2 needs the left neighbour to show our first side; u3 needs the right one to differ from our second
    assert g2_components(ht, hh, th) == (1, 0, 1)
    assert g2_components(hh, hh, th) == (1, 1, 1)
    assert g2_components(hh, Residue(1), hh) == (0, 0, 0)


# ---------------------------------------------------------------------------
# G_n strategies

def test_matrix_strategy_labels_and_ids() -> None:
    m = MatrixStrategy(3, ((0, 1), (2, 3)))
    assert m.label == "[0,1;2,3]"
    assert MatrixStrategy.from_label("[0,1;2,3]") == m
    assert m.strategy_id() == 0 * 64 + 1 * 16 + 2 * 4 + 3
    assert MatrixStrategy.from_id(3, m.strategy_id()) == m
    assert m[1, 0] == 2


def test_matrix_strategy_arithmetic_is_mod_n_plus_one() -> None:
    a = MatrixStrategy(3, ((0, 3), (1, 2)))
    b = MatrixStrategy(3, ((0, 2), (3, 3)))
    assert a + b == MatrixStrategy(3, ((0, 1), (0, 1)))
    assert a - a == MatrixStrategy.zero(3)
    assert -a + a == MatrixStrategy.zero(3)


@pytest.mark.parametrize("entries, n", [
    (((0, 1),), 3),
    (((0, 1), (2, 4)), 3),
    (((0, 1, 2), (0, 0)), 3),
])
def test_matrix_strategy_validation(entries, n) -> None:
    with pytest.raises(PreconditionError):
        MatrixStrategy(n, entries)


def test_bad_matrix_labels() -> None:
    for text in ("0,1;2,3", "[0,a;1,1]", "[0,1;2,9]"):
        with pytest.raises(GameSpecError):
            MatrixStrategy.from_label(text)


def test_decode_encode_agree(rng) -> None:
    for n in (3, 4, 5):
        ids = rng.integers(0, gn_strategy_count(n), size=200)
        entries = gn_decode(n, ids)
        assert entries.shape == (200, n - 1, 2)
        assert np.array_equal(gn_encode(n, entries), ids)


def test_payoff_conditions_are_semiperfection(rng) -> None:
    for n in (3, 4, 6):
        for _ in range(300):
            x, y, z = (MatrixStrategy.from_array(n, rng.integers(0, n + 1, size=(n - 1, 2))) for _ in range(3))
            assert gn_payoff_conditions(n, x, y, z) == semiperfect_triple(n, x, y, z)


def test_best_response_always_pays_one(rng) -> None:
    for n in (3, 4, 5, 8):
        x = rng.integers(0, n + 1, size=(500, n - 1, 2))
        z = rng.integers(0, n + 1, size=(500, n - 1, 2))
        y = gn_best_response_array(n, x, z)
        for i in range(0, 500, 50):
            xs, ys, zs = (MatrixStrategy.from_array(n, a[i]) for a in (x, y, z))
            assert perfect_triple(n, xs, ys, zs)
            assert gn_best_response(n, xs, zs) == ys


def test_gn_game_max_payoff_is_one() -> None:
    game = build_game("GN:3")
    assert game.strategy_count == 256
    ids = np.arange(256)
    for x in range(256):
        best = game.payoff_vec(x, ids[:, None], ids[None, :]).max(axis=0)
        assert (best == 1).all()


# ---------------------------------------------------------------------------
# Products

def test_product_ids_and_payoff() -> None:
    game = build_game("PROD(G1,G2)")
    assert isinstance(game, ProductGame)
    assert game.strategy_count == 21
    assert game.label(game.combine((2, 4))) == "2×HT"
    g1, g2 = build_game(G1_SPEC), build_game(G2_SPEC)
    for x, y, z in [(0, 5, 20), (7, 8, 3), (13, 14, 6)]:
        parts = [(game.project(v, 0), game.project(v, 1)) for v in (x, y, z)]
        expected = g1.payoff(*(p[0] for p in parts)) + g2.payoff(*(p[1] for p in parts))
        assert game.payoff(x, y, z) == expected
    xs = np.arange(21)
    brute = game.payoff_vec(xs[:, None, None], xs[None, :, None], xs[None, None, :]).max(axis=1)
    assert np.array_equal(game.max_payoff(xs[:, None], xs[None, :]), brute)


# ---------------------------------------------------------------------------
# Builder and caps

def test_builder_caches_games() -> None:
    assert build_game("G2") is build_game(G2_SPEC)


def test_enumeration_cap() -> None:
    assert game_size(gn_spec(4)) == 15625
    assert game_size(gn_spec(5)) == 6 ** 8
    with pytest.raises(ResourceLimitError):
        build_game("GN:5")
    with pytest.raises(ResourceLimitError):
        build_game("GN:65")


def test_product_cap_counts_all_components() -> None:
    assert game_size(parse_game_spec("PROD(G2,G2,G1)")) == 147
    with pytest.raises(ResourceLimitError):
        build_game("PROD(GN:4,GN:3)")


# ---------------------------------------------------------------------------
# Table files

G1_TABLE = """cellgame-table v1
strategies: a, b, c
default: 1
a c a 0
a c b 0
a c c 0
b a a 0
b a b 0
b a c 0
c b a 0
c b b 0
c b c 0
"""


def test_table_reproduces_g1() -> None:
    table = parse_game_table(G1_TABLE)
    assert np.array_equal(table.payoff_table(), build_game(G1_SPEC).payoff_table())
    assert table.index("c") == 2
    with pytest.raises(GameSpecError):
        table.index("d")


@pytest.mark.parametrize("text, line", [
    ("strategies: a\n", 1),
    ("cellgame-table v1\nstrategies: a, a\n", 2),
    ("cellgame-table v1\nstrategies: a, b\na b c 1\n", 3),
    ("cellgame-table v1\nstrategies: a\na a a x\n", 3),
    ("cellgame-table v1\nstrategies: a\na a a 1\na a a 2\n", 4),
    ("cellgame-table v1\na a a 1\n", 2),
    ("cellgame-table v1\nstrategies: a\ndefault: one\n", 3),
    ("cellgame-table v1\nstrategies: a b\n", 2),
    ("cellgame-table v1\n", 0),
    ("", 0),
])
def test_malformed_tables(text, line) -> None:
    with pytest.raises(TableFormatError) as info:
        parse_game_table(text)
    assert info.value.line == line


def test_bundled_tables_load(repo_root) -> None:
    g0 = load_game_table(f"{repo_root}/tables/g0.tbl")
    assert g0.labels == ("0", "1")
    g1 = build_game("FILE:g1.tbl")
    assert np.array_equal(g1.payoff_table(), build_game(G1_SPEC).payoff_table())


def test_missing_table_file() -> None:
    with pytest.raises(TableFormatError):
        build_game("FILE:does-not-exist.tbl")


def test_product_payoff_is_the_component_sum_on_random_triples(rng) -> None:
    game = build_game("PROD(G1,G2)")
    x, y, z = rng.integers(0, game.strategy_count, size=(3, 10_000))
    total = sum(part.payoff_vec(game.project(x, i), game.project(y, i), game.project(z, i))
                for i, part in enumerate(game.components))
    assert np.array_equal(game.payoff_vec(x, y, z), total)
