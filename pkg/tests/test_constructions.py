import itertools

import numpy as np
import pytest

from errors import PreconditionError
from games import MatrixStrategy, build_game, perfect_triple, semiperfect_mask
from engine import EventuallyPeriodicProfile, constrained_equilibrium, verify_profile
from constructions import (
    MatrixWindow, zig_sequence, f_matrix, g_matrix, f_profile, g_profile, verify_matrix_profile,
    perfect_profile, sum_windows, semiperfect_profile, expansion_right_cell, expansion_left_cell,
    expand_right, expand_left, close_to_equilibrium, g1_witness, g2_witness, gn_witness, residue_constant,
    diagonal_mask, diagonal_check, random_matrix, random_semiperfect_arrays, random_semiperfect_window,
    random_equilibrium,
)


# ---------------------------------------------------------------------------
# Building blocks

def test_zig_sequence_front_loads_the_climb() -> None:
    assert zig_sequence(3, 0, 2, 4) == [0, 1, 2, 2]
    assert zig_sequence(4, 3, 1, 5) == [3, 0, 1, 1, 1]
    assert zig_sequence(5, 2, 2, 5) == [2] * 5
    with pytest.raises(PreconditionError):
        zig_sequence(4, 0, 1, 3)


def test_zig_sequence_steps_are_zero_or_one() -> None:
    for n, u, v in itertools.product((2, 3, 5), range(5), range(5)):
        seq = zig_sequence(n, u, v, n + 2)
        assert seq[0] == u % n and seq[-1] == v % n
        assert all((b - a) % n in (0, 1) for a, b in zip(seq, seq[1:]))


def test_matrix_window_checks_its_cells() -> None:
    with pytest.raises(PreconditionError):
        MatrixWindow(3, 0, ())
    with pytest.raises(PreconditionError):
        MatrixWindow(3, 0, (f_matrix(3), f_matrix(4)))
    window = MatrixWindow(3, -2, (f_matrix(3), g_matrix(3), f_matrix(3)))
    assert window.stop == 1
    assert window.at(-1) == g_matrix(3)
    with pytest.raises(IndexError):
        window.at(1)


def test_named_profiles_are_equilibria() -> None:
    for n in (3, 4, 5, 8):
        assert g_matrix(n)[0, 1] == n
        assert verify_matrix_profile(n, f_profile(n))
        assert verify_matrix_profile(n, g_profile(n))
    assert not verify_matrix_profile(3, EventuallyPeriodicProfile.constant(MatrixStrategy(3, ((0, 1), (0, 0)))))
    assert not verify_matrix_profile(3, f_profile(4))


def test_expansion_cells_make_the_player_perfect(rng) -> None:
    for n in (3, 4, 6):
        for _ in range(100):
            x, y = random_matrix(n, rng), random_matrix(n, rng)
            assert perfect_triple(n, x, y, expansion_right_cell(n, x, y))
            assert perfect_triple(n, expansion_left_cell(n, x, y), x, y)


def test_expand_grows_the_window(rng) -> None:
    window = random_semiperfect_window(4, 5, rng, start=3)
    right, left = expand_right(4, window), expand_left(4, window)
    assert (right.start, len(right)) == (3, 6)
    assert (left.start, len(left)) == (2, 6)
    assert right.is_semiperfect() and left.is_semiperfect()
    with pytest.raises(PreconditionError):
        expand_right(4, MatrixWindow(4, 0, (f_matrix(4),)))


# ---------------------------------------------------------------------------
# Perfect and semi-perfect windows

@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_perfect_profile_both_orientations(n, rng) -> None:
    for k in range(1, n):
        M = random_matrix(n, rng)
        for a, b in ((0, k), (k, 0)):
            window = perfect_profile(n, M, a, b)
            assert window.start == min(a, b) and len(window) == k + 1
            assert window.at(a) == M
            assert window.at(b) == MatrixStrategy.zero(n)
            assert window.is_perfect()


def test_perfect_profile_preconditions() -> None:
    M = MatrixStrategy(3, ((0, 1), (2, 3)))
    for a, b in ((0, 0), (0, 3), (5, 1)):
        with pytest.raises(PreconditionError):
            perfect_profile(3, M, a, b)
    with pytest.raises(PreconditionError):
        perfect_profile(3, MatrixStrategy(3, ((1, 0), (0, 0))), 0, 1)


def test_sum_of_perfect_windows_keeps_both_endpoints(rng) -> None:
    n = 5
    for k in range(1, n):
        A, B = random_matrix(n, rng), random_matrix(n, rng)
        window = sum_windows(perfect_profile(n, A, 2, 2 + k), perfect_profile(n, B, 2 + k, 2))
        assert window.at(2) == A and window.at(2 + k) == B
        assert window.is_perfect()
    with pytest.raises(PreconditionError):
        sum_windows(perfect_profile(n, A, 0, 1), perfect_profile(n, A, 0, 2))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_semiperfect_profile_pins_its_endpoints(n, rng) -> None:
    for k in range(n + 1, 3 * n + 2):
        A, B = random_matrix(n, rng), random_matrix(n, rng)
        for a, b in ((0, k), (k, 0), (-4, k - 4)):
            window = semiperfect_profile(n, A, B, a, b)
            assert window.at(a) == A and window.at(b) == B
            assert window.is_semiperfect()


def test_semiperfect_profile_of_zero_endpoints_is_zero() -> None:
    zero = MatrixStrategy.from_array(3, np.zeros((2, 2), dtype=np.int64))
    window = semiperfect_profile(3, zero, zero, 0, 5)
    assert [window.at(p) for p in range(6)] == [zero] * 6


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_semiperfect_profile_every_gap_residue(n, rng) -> None:
    # covers each value of (b - a) mod (n - 1) and of (b - a) mod n
    for k in range(n + 1, 4 * n + 3):
        A, B = random_matrix(n, rng), random_matrix(n, rng)
        for a, b in ((0, k), (k, 0)):
            window = semiperfect_profile(n, A, B, a, b)
            assert window.at(a) == A and window.at(b) == B
            assert window.is_semiperfect()


def test_semiperfect_profile_needs_a_long_gap() -> None:
    with pytest.raises(PreconditionError):
        semiperfect_profile(3, f_matrix(3), g_matrix(3), 0, 3)


def test_close_to_equilibrium_keeps_the_window(rng) -> None:
    for n in (3, 4, 5, 7):
        window = random_semiperfect_window(n, 6, rng, start=-2)
        profile = close_to_equilibrium(n, window)
        assert profile.window(-2, 4) == list(window.cells)
        assert verify_matrix_profile(n, profile)
    with pytest.raises(PreconditionError):
        close_to_equilibrium(3, MatrixWindow(3, 0, (f_matrix(3),)))


# ---------------------------------------------------------------------------
# Witnesses

def test_g1_witnesses() -> None:
    g1 = build_game("G1")
    for s, t in itertools.product(range(3), repeat=2):
        for d in range(2, 7):
            for a, b in ((0, d), (d, 0)):
                profile = g1_witness(s, t, a, b)
                assert profile[a] == s and profile[b] == t
                assert verify_profile(g1, profile)
    with pytest.raises(PreconditionError):
        g1_witness(0, 2, 0, 1)
    with pytest.raises(PreconditionError):
        g1_witness(3, 0, 0, 4)
    with pytest.raises(PreconditionError):
        residue_constant(-1)
    assert residue_constant(2) == EventuallyPeriodicProfile.constant(2)


@pytest.mark.parametrize("d", [1, 3, 4, 5, 6])
def test_g2_witnesses_from_constant_residues(d) -> None:
    g2 = build_game("G2")
    for u, v in itertools.product(range(3), repeat=2):
        f, g = EventuallyPeriodicProfile.constant(u), EventuallyPeriodicProfile.constant(v)
        for a, b in ((0, d), (d, 0)):
            profile = g2_witness(f, g, a, b)
            assert profile[a] == u and profile[b] == v
            assert verify_profile(g2, profile)


def test_g2_witnesses_from_searched_equilibria() -> None:
    g2 = build_game("G2")
    f = constrained_equilibrium(g2, [(0, 1), (2, 2), (5, 0)])
    g = constrained_equilibrium(g2, [(-3, 2), (1, 0)])
    for a, b in ((0, 1), (3, 2), (-2, 1), (4, 0), (0, 5)):
        profile = g2_witness(f, g, a, b)
        assert profile[a] == f[a] and profile[b] == g[b]
        assert verify_profile(g2, profile)


def test_g2_witness_preconditions() -> None:
    zero = EventuallyPeriodicProfile.constant(0)
    with pytest.raises(PreconditionError):
        g2_witness(zero, zero, 0, 2)
    with pytest.raises(PreconditionError):
        g2_witness(zero, EventuallyPeriodicProfile.constant(build_game("G2").index("HH")), 0, 1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_gn_witnesses_for_named_profiles(n) -> None:
    f, g = f_profile(n), g_profile(n)
    for d in range(1, 2 * n + 3):
        if d == n:
            continue
        for a, b in ((0, d), (d, 0)):
            profile = gn_witness(n, f, g, a, b)
            assert profile[a] == f[a] and profile[b] == g[b]
            assert verify_matrix_profile(n, profile)


def test_gn_witnesses_for_random_equilibria(rng) -> None:
    n = 4
    f, g = random_equilibrium(n, rng), random_equilibrium(n, rng)
    for a, b in ((0, 1), (2, 5), (7, 1), (-3, 6)):
        profile = gn_witness(n, f, g, a, b)
        assert profile[a] == f[a] and profile[b] == g[b]
        assert verify_matrix_profile(n, profile)


def test_gn_witness_preconditions() -> None:
    f, g = f_profile(3), g_profile(3)
    for a, b in ((0, 0), (0, 3), (4, 1)):
        with pytest.raises(PreconditionError):
            gn_witness(3, f, g, a, b)
    bad = EventuallyPeriodicProfile.constant(MatrixStrategy(3, ((0, 1), (0, 0))))
    with pytest.raises(PreconditionError):
        gn_witness(3, bad, g, 0, 1)


# ---------------------------------------------------------------------------
# Diagonal bound and random generators

def test_random_windows_are_semiperfect(rng) -> None:
    for n in (3, 4, 6):
        cells = random_semiperfect_arrays(n, 7, 500, rng)
        assert cells.shape == (500, 7, n - 1, 2)
        assert semiperfect_mask(n, cells[:, :-2], cells[:, 1:-1], cells[:, 2:]).all()
    with pytest.raises(PreconditionError):
        random_semiperfect_arrays(3, 1, 10, rng)


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_diagonal_bound_holds_on_random_windows(n, rng) -> None:
    cells = random_semiperfect_arrays(n, n + 1, 2000, rng, first_x12_zero=True)
    assert diagonal_mask(n, cells).all()


def test_diagonal_check_on_windows(rng) -> None:
    window = random_semiperfect_window(4, 6, rng, first_x12_zero=True)
    assert diagonal_check(4, window)
    # g at distance n from a cell with x12 = 0 breaks the bound
    cells = (f_matrix(3), f_matrix(3), f_matrix(3), g_matrix(3))
    assert not diagonal_check(3, MatrixWindow(3, 0, cells))
    with pytest.raises(PreconditionError):
        diagonal_check(3, MatrixWindow(3, 0, cells[:3]))
    with pytest.raises(PreconditionError):
        diagonal_check(3, MatrixWindow(3, 0, (g_matrix(3),) + cells[1:]))


def test_random_equilibria_are_reproducible() -> None:
    first = random_equilibrium(5, np.random.default_rng(9))
    second = random_equilibrium(5, np.random.default_rng(9))
    assert first == second
    assert verify_matrix_profile(5, first)
