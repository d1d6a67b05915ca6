"""Index sets, policy parsing, and LSSS compilation/reconstruction."""

import functools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regabe.algebra import (
    AccessPolicy,
    CrossIndexSet,
    Gate,
    Leaf,
    PolicyError,
    ProgressionFreeSet,
    build_progression_free_set,
    parse_policy,
    policy_to_lsss,
    reconstruction_coefficients,
    share_vector,
    verify_set,
)

P = 7919


# ----------------------------------------------------------------------
# Progression-free / double-free sets
# ----------------------------------------------------------------------


def test_greedy_examples():
    assert build_progression_free_set(1).d == (1,)
    assert build_progression_free_set(2).d == (1, 3)
    assert build_progression_free_set(4).d == (1, 3, 4, 9)


def test_verify_set_examples():
    assert verify_set([1, 3, 4, 9])
    assert not verify_set([1, 2, 3])   # arithmetic progression
    assert not verify_set([1, 2])      # 2 = 2*1
    assert not verify_set([])
    assert not verify_set([3, 3])
    assert not verify_set([0, 5])


@functools.lru_cache(maxsize=1)
def _set64():
    return build_progression_free_set(64)


def test_greedy_valid_up_to_64():
    # greedy is prefix-stable, so all lengths are prefixes of one build
    full = _set64()
    for length in range(1, 65):
        prefix = full.d[:length]
        assert verify_set(list(prefix))
        assert build_progression_free_set(length).d == prefix


def test_d_max_growth_pinned():
    assert _set64().d_max == 729


def test_progression_free_set_validation():
    with pytest.raises(ValueError):
        ProgressionFreeSet((1, 2, 3))
    s = ProgressionFreeSet((1, 3, 4))
    assert s.element(2) == 3 and len(s) == 3


def test_cross_index_set():
    s = build_progression_free_set(4)
    cross = CrossIndexSet(s)
    assert cross.f(1, 2) == cross.f(2, 1) == 1 + 3
    with pytest.raises(ValueError):
        cross.f(2, 2)
    assert set(cross.values) == {
        s.d[i] + s.d[j] for i in range(4) for j in range(4) if i != j
    }
    assert CrossIndexSet(build_progression_free_set(1)).values == ()
    assert len(CrossIndexSet(build_progression_free_set(2)).values) == 1


# ----------------------------------------------------------------------
# Policies
# ----------------------------------------------------------------------


def test_parse_policy_grammar():
    policy = parse_policy("(dept_cs and role_phd) or admin")
    assert policy.attributes() == {"dept_cs", "role_phd", "admin"}
    assert policy.satisfied_by({"admin"})
    assert policy.satisfied_by({"dept_cs", "role_phd"})
    assert not policy.satisfied_by({"dept_cs"})


def test_parse_policy_precedence():
    # and binds tighter than or
    policy = parse_policy("a or b and c")
    assert policy.satisfied_by({"a"})
    assert not policy.satisfied_by({"b"})
    assert policy.satisfied_by({"b", "c"})


@pytest.mark.parametrize("bad", ["", "()", "a and", "and a", "(a or b", "a b", "a %% b"])
def test_parse_policy_rejects(bad):
    with pytest.raises(PolicyError):
        parse_policy(bad)


# ----------------------------------------------------------------------
# LSSS
# ----------------------------------------------------------------------


def test_lsss_known_matrices():
    m = policy_to_lsss(parse_policy("A and B"))
    assert [list(r) for r in m.rows] == [[1, 1], [0, -1]]
    assert m.row_attrs == ("A", "B")

    m = policy_to_lsss(parse_policy("A or B"))
    assert [list(r) for r in m.rows] == [[1], [1]]

    m = policy_to_lsss(parse_policy("A and (B and C)"))
    assert [list(r) for r in m.rows] == [[1, 1, 0], [0, -1, 1], [0, 0, -1]]


def test_lsss_row_count_equals_leaves():
    policy = parse_policy("(a and b) or (a and c) or d")
    m = policy_to_lsss(policy)
    assert m.beta == 5
    assert m.rho(1) == "a" and m.rho(5) == "d"


def test_lsss_universe_check():
    with pytest.raises(PolicyError):
        policy_to_lsss(parse_policy("a and zz"), universe={"a", "b"})


def test_reconstruction_examples():
    m = policy_to_lsss(parse_policy("A and B"))
    assert reconstruction_coefficients(m, {"A", "B"}, P) == {1: 1, 2: 1}
    assert reconstruction_coefficients(m, {"A"}, P) is None
    m = policy_to_lsss(parse_policy("A or B"))
    assert reconstruction_coefficients(m, {"B"}, P) == {2: 1}
    assert reconstruction_coefficients(m, set(), P) is None


def test_share_vector_and_reconstruction_agree():
    rng = random.Random(5)
    m = policy_to_lsss(parse_policy("(a and b) or (c and (d or e))"))
    secret = rng.randrange(P)
    v = [secret] + [rng.randrange(P) for _ in range(m.width - 1)]
    shares = share_vector(m, v, P)
    omega = reconstruction_coefficients(m, {"c", "e"}, P)
    assert omega is not None
    assert sum(omega[k] * shares[k - 1] for k in omega) % P == secret


_attrs = st.sampled_from([f"x{i}" for i in range(6)])
_formula = st.recursive(
    _attrs.map(Leaf),
    lambda kids: st.tuples(st.sampled_from(["and", "or"]), kids, kids).map(
        lambda t: Gate(t[0], t[1], t[2])
    ),
    max_leaves=10,
)


@settings(max_examples=120, deadline=None)
@given(_formula, st.sets(_attrs))
def test_reconstruction_iff_satisfied(node, attrs):
    policy = AccessPolicy(node)
    matrix = policy_to_lsss(policy)
    omega = reconstruction_coefficients(matrix, attrs, P)
    if policy.satisfied_by(attrs):
        assert omega is not None
        # the reconstruction equation holds and uses only rows labelled in attrs
        total = [0] * matrix.width
        for k, w in omega.items():
            assert matrix.rho(k) in attrs
            for col in range(matrix.width):
                total[col] = (total[col] + w * matrix.rows[k - 1][col]) % P
        assert total[0] == 1 and not any(total[1:])
    else:
        assert omega is None
