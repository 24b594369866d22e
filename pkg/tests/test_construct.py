import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_full_rank
from lcqmac.catalog import example1, example2, sigma
from lcqmac.construct import (
    SOMatrix,
    allocate_aux,
    build_plan,
    check_so,
    classical_decode,
    expand_to_so,
    pair_transform,
    validate_problem,
    verify_plan,
)
from lcqmac.errors import (
    BlockTooWide,
    DimensionMismatch,
    KTooLarge,
    RankDeficientInput,
    RankDeficientV,
    RedundantBlock,
    SingularPrecoder,
)
from lcqmac.gf import field_new, field_of_order
from lcqmac.matf import MatF, hstack, mat_inverse, mat_rank

F3 = field_new(3)

# Reference transfer matrix for example1 over GF(3) with precoders (2, 2, 1, 1).
EXAMPLE1_SO = [
    [2, 0, 1, 1, 2, 0, 0, 0, 0, 0],
    [0, 2, 1, 1, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 1, 1, 1, 2],
]


def example2_so(d):
    return [
        [d - 1, 0, 1, 0, 0, 0, 0, 0],
        [0, d - 1, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 1, 0],
        [0, 0, 0, 0, 0, 1, 0, 1],
    ]


def scalars(field, values):
    return [MatF(field, [[v]]) for v in values]


def split(M, N):
    M = np.asarray(M)
    return M[:, :N], M[:, N:]


# -- validate_problem ---------------------------------------------------------


def test_validate_example1():
    prob = validate_problem(F3, 2, [[[1], [0]], [[0], [1]], [[1], [1]], [[1], [1]]])
    assert (prob.K, prob.m, prob.S) == (2, 4, 4)
    assert prob.V.tolist() == [[1, 0, 1, 1], [0, 1, 1, 1]]


def test_validate_block_too_wide():
    with pytest.raises(BlockTooWide):
        validate_problem(F3, 1, [[[1, 1]]])


def test_validate_k_too_large():
    with pytest.raises(KTooLarge):
        validate_problem(F3, 2, [[[1], [1]]])


def test_validate_redundant_block():
    with pytest.raises(RedundantBlock):
        validate_problem(F3, 2, [[[1, 2], [1, 2]], [[1], [0]]])


def test_validate_rank_deficient_v():
    with pytest.raises(RankDeficientV):
        validate_problem(F3, 2, [[[1], [1]], [[2], [2]]])


def test_validate_row_count():
    with pytest.raises(DimensionMismatch):
        validate_problem(F3, 2, [[[1]], [[1], [0]]])


# -- check_so ------------------------------------------------------------------


def test_check_so_example1_display():
    Ml, Mr = split(EXAMPLE1_SO, 5)
    assert check_so(MatF(F3, Ml), MatF(F3, Mr))


def test_check_so_trivial():
    assert check_so(MatF.identity(F3, 3), MatF.zeros(F3, 3, 3))


def test_check_so_asymmetric():
    verdict = check_so(MatF(F3, [[1, 0], [0, 0]]), MatF(F3, [[0, 0], [1, 0]]))
    assert not verdict
    assert verdict.condition == "symmetry"
    assert verdict.entry in {(0, 1), (1, 0)}


def test_check_so_rank_failure():
    verdict = check_so(MatF(F3, [[1, 0], [1, 0]]), MatF.zeros(F3, 2, 2))
    assert not verdict and verdict.condition == "rank"


def test_check_so_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        check_so(MatF.identity(F3, 2), MatF.zeros(F3, 2, 3))


def test_check_so_column_permutation_invariance(rng):
    for _ in range(20):
        plan = build_plan(example1(5), scalars(field_new(5), rng.integers(1, 5, size=4)))
        perm = rng.permutation(plan.so.N)
        Ml = MatF(plan.field, plan.so.Ml.array[:, perm])
        Mr = MatF(plan.field, plan.so.Mr.array[:, perm])
        assert bool(check_so(Ml, Mr)) == bool(check_so(plan.so.Ml, plan.so.Mr)) is True
        bad = plan.so.Ml.array.copy()
        bad[0, 0] = (bad[0, 0] + 1) % 5
        assert bool(check_so(MatF(plan.field, bad[:, perm]), Mr)) == bool(check_so(MatF(plan.field, bad), plan.so.Mr))


# -- pair_transform / expand_to_so --------------------------------------------


def assert_pairing(H, G, B1, B2, c):
    hb, gb = B1 @ H, B2 @ G
    P = (hb @ gb.T).array
    K = H.rows
    for i in range(K):
        for j in range(K):
            if i != j:
                assert P[i, j] == 0
            elif i < c:
                assert P[i, i] != 0
            else:
                assert P[i, i] == 0
    assert c == mat_rank(H @ G.T)
    assert mat_rank(B1) == K and mat_rank(B2) == K


def test_pair_transform_identity():
    I = MatF.identity(F3, 3)
    B1, B2, c = pair_transform(I, I)
    assert c == 3 and B1 == I and B2 == I


def test_pair_transform_rank_deficient():
    with pytest.raises(RankDeficientInput):
        pair_transform(MatF(F3, [[0, 1, 0], [0, 0, 0]]), MatF(F3, [[0, 0, 1], [1, 0, 1]]))


def test_pair_transform_mixed():
    H = MatF(F3, [[0, 1, 0], [1, 1, 2]])
    G = MatF(F3, [[0, 0, 1], [1, 1, 1]])
    B1, B2, c = pair_transform(H, G)
    assert_pairing(H, G, B1, B2, c)


def test_pair_transform_zero_product():
    H = MatF(F3, [[1, 0, 0, 0], [0, 1, 0, 0]])
    G = MatF(F3, [[0, 0, 1, 0], [0, 0, 0, 1]])
    B1, B2, c = pair_transform(H, G)
    assert c == 0
    assert B1 == MatF.identity(F3, 2) and B2 == MatF.identity(F3, 2)
    Hp, Gp, c = expand_to_so(H, G)
    assert c == 0 and Hp.shape == (2, 0) and Gp.shape == (2, 0)


def test_pair_transform_example1_conditions():
    # c = 1 exactly on the precoders meeting p1 = p3 + p4 and 2 p2 + p3 + p4 = 0.
    prob = example1(3)
    for p in itertools.product(range(1, 3), repeat=4):
        H = prob.V @ MatF.diag(F3, list(p))
        B1, B2, c = pair_transform(H, prob.V)
        assert_pairing(H, prob.V, B1, B2, c)
        on_curve = p[0] == (p[2] + p[3]) % 3 and (2 * p[1] + p[2] + p[3]) % 3 == 0
        assert (c == 1) == on_curve, p
    H = prob.V @ MatF.diag(F3, [2, 1, 1, 1])
    assert pair_transform(H, prob.V)[2] == 2


def test_expand_example1():
    prob = example1(3)
    H = prob.V @ MatF.diag(F3, [2, 2, 1, 1])
    Hp, Gp, c = expand_to_so(H, prob.V)
    assert c == 1
    # Reference columns are (2,1) and (1,2); any expansion with the same outer product is equivalent.
    assert (Hp @ Gp.T) == MatF(F3, [[2], [1]]) @ MatF(F3, [[1], [2]]).T
    assert (H @ prob.V.T + Hp @ Gp.T).is_zero()


pairs = st.tuples(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**32 - 1))


@settings(max_examples=120, deadline=None)
@given(pairs)
def test_pair_and_expand_properties(args):
    q, K, extra, seed = args
    F = field_of_order(q)
    rng = np.random.default_rng(seed)
    m = min(5, K + extra)
    H = random_full_rank(F, K, m, rng)
    G = random_full_rank(F, K, m, rng)
    B1, B2, c = pair_transform(H, G)
    assert_pairing(H, G, B1, B2, c)
    Hp, Gp, c2 = expand_to_so(H, G)
    assert c2 == c and Hp.shape == Gp.shape == (K, c)
    zero = MatF.zeros(F, K, m + c)
    Ml = MatF(F, np.vstack([hstack([H, Hp]).array, zero.array]))
    Mr = MatF(F, np.vstack([zero.array, hstack([G, Gp]).array]))
    assert check_so(Ml, Mr)


# -- build_plan ----------------------------------------------------------------


def test_build_plan_example1_display():
    plan = build_plan(example1(3), scalars(F3, [2, 2, 1, 1]))
    assert plan.c == 1 and plan.rate == Fraction(4, 5)
    assert plan.so.M.tolist() == EXAMPLE1_SO


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_build_plan_example2_display(d):
    F = field_of_order(d)
    plan = build_plan(example2(F), scalars(F, [d - 1, d - 1, 1, 1]))
    assert plan.c == 0 and plan.so.N == 4 and plan.rate == 1
    assert plan.so.M.tolist() == example2_so(d)
    assert plan.Hp.shape == (2, 0)


def test_build_plan_sigma_zero_sum():
    plan = build_plan(sigma(4, 3), scalars(F3, [1, 1, 2, 2]))
    assert plan.c == 0 and plan.rate == Fraction(2, 4)


def test_build_plan_identity_example2_d5():
    plan = build_plan(example2(5))
    assert plan.c == 2


def test_build_plan_singular_precoder():
    with pytest.raises(SingularPrecoder):
        build_plan(example1(3), scalars(F3, [0, 1, 1, 1]))


def test_plan_structure_and_transfer(rng):
    for q in (2, 3, 5):
        F = field_of_order(q)
        for _ in range(10):
            prob = random_problem(F, rng)
            precoders = [random_full_rank(F, w, w, rng) for w in prob.widths]
            plan = build_plan(prob, precoders)
            assert check_so(plan.so.Ml, plan.so.Mr)
            assert plan.so.kappa == 2 * prob.K and plan.so.N == prob.m + plan.c
            K, m = prob.K, prob.m
            assert np.array_equal(plan.so.Ml.array[:K, :m], (prob.V @ plan.P).array)
            assert not plan.so.Ml.array[K:].any() and not plan.so.Mr.array[:K].any()
            assert np.array_equal(plan.so.Mr.array[K:, :m], prob.V.array)
            for _ in range(100):
                W1 = rng.integers(0, q, size=m)
                W2 = rng.integers(0, q, size=m)
                y = plan.so.apply(plan.encode_input(W1, W2))
                assert np.array_equal(y, np.concatenate(plan.expected_output(W1, W2)))
            assert verify_plan(plan, trials=5) == []


def random_problem(F, rng, max_K=4, max_width=3):
    while True:
        K = int(rng.integers(1, max_K + 1))
        S = int(rng.integers(1, 5))
        widths = [int(rng.integers(1, min(K, max_width) + 1)) for _ in range(S)]
        if sum(widths) < K:
            continue
        blocks = [rng.integers(0, F.d, size=(K, w)) for w in widths]
        try:
            return validate_problem(F, K, blocks)
        except Exception:
            continue


# -- allocation / decode --------------------------------------------------------


def test_allocation_policies():
    assert allocate_aux([1, 1, 1, 1], 1) == (1, 0, 0, 0)
    assert allocate_aux([2, 1, 1], 1) == (0, 1, 0)
    assert allocate_aux([1, 1, 3], 2) == (2, 0, 0)
    assert allocate_aux([1, 2], 3) == (2, 1)
    assert allocate_aux([1, 1], 0, "server=2") == (0, 0)
    assert allocate_aux([1, 1], 2, "server=2") == (0, 2)
    assert allocate_aux([1, 1], 2, "1,1") == (1, 1)
    with pytest.raises(ValueError):
        allocate_aux([1, 1], 2, "3,0")
    with pytest.raises(ValueError):
        allocate_aux([1, 1], 2, "server=3")


def test_classical_decode():
    plan = build_plan(example1(3), scalars(F3, [2, 2, 1, 1]))
    Y1, Y2 = classical_decode(plan, [0, 0, 0, 0])
    assert Y1.tolist() == [0, 0] and Y2.tolist() == [0, 0]
    W1 = [1, 2, 0, 1]
    y = plan.so.apply(plan.encode_input(W1, [0, 0, 0, 0]))
    assert y.tolist() == [2, 0, 0, 0]
    Y1, Y2 = classical_decode(plan, y)
    assert Y1.tolist() == [2, 0] and Y2.tolist() == [0, 0]
    with pytest.raises(DimensionMismatch):
        classical_decode(plan, [0, 0, 0])


def test_verify_detects_corruption():
    plan = build_plan(example1(3), scalars(F3, [2, 2, 1, 1]))
    bad = plan.so.Ml.array.copy()
    bad[1, 4] = (bad[1, 4] + 1) % 3
    corrupt = type(plan)(plan.problem, plan.precoders, plan.c, plan.Hp, plan.Gp, SOMatrix(MatF(F3, bad), plan.so.Mr), plan.allocation, plan.rate)
    checks = {f["check"] for f in verify_plan(corrupt)}
    assert "self_orthogonal" in checks and "transfer_structure" in checks
