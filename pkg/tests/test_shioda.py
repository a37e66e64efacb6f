import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_has_zero_subset, brute_member, brute_prefilter, brute_tuples
from p2sato._numtheory import units
from p2sato.shioda import (
    InfeasibleEnumeration,
    ShiodaTuple,
    beta_family,
    candidate_pairs,
    classify,
    count_tuples,
    enumerate_tuples,
    is_member,
    partition_check,
    smallest_zero_subset,
    tuple_weight,
    verify_indecomposable_classification,
)


def test_weight_examples():
    beta = ShiodaTuple(25, (1, 6, 11, 16, 20, 21))
    assert all(tuple_weight(t, beta) == 3 for t in units(25))
    assert tuple_weight(1, (1, 2, 22), 25) == 1
    assert not is_member(25, (1, 2, 3, 19))


@pytest.mark.parametrize("m,d", [(9, 1), (9, 2), (9, 3), (9, 4), (15, 2), (15, 3), (21, 2), (21, 3), (25, 2), (25, 3)])
def test_enumeration_matches_brute_force(m, d):
    got = [b.entries for b in enumerate_tuples(m, d)]
    assert got == brute_tuples(m, d)


@pytest.mark.parametrize("m,d", [(9, 2), (15, 3), (25, 3)])
def test_prefilter_count_matches_brute_force(m, d):
    expected = len(brute_prefilter(m, d))
    assert count_tuples(m, d, "sum") == expected
    assert len(enumerate_tuples(m, d, "sum")) == expected


def test_stages_are_nested():
    s = set(enumerate_tuples(25, 3, "sum"))
    b = set(enumerate_tuples(25, 3, "bounds"))
    a = set(enumerate_tuples(25, 3, "all"))
    assert a <= b <= s
    assert (len(s), len(b), len(a)) == (2971, 2456, 224)
    assert candidate_pairs(25, 3, "bounds") == 2456


def test_jobs_do_not_change_output():
    assert enumerate_tuples(25, 4, jobs=1) == enumerate_tuples(25, 4, jobs=2)


def test_budget_refuses_before_work():
    with pytest.raises(InfeasibleEnumeration):
        enumerate_tuples(49, 6, budget=1000)


@pytest.mark.parametrize("m,d", [(25, 3), (21, 3), (27, 2)])
def test_unit_action_and_complement(m, d):
    members = set(enumerate_tuples(m, d))
    for beta in members:
        for t in units(m):
            assert beta.twist(t) in members
        assert ShiodaTuple(m, tuple(sorted(m - b for b in beta.entries))) in members


def test_rejects_malformed_tuples():
    with pytest.raises(ValueError):
        ShiodaTuple(25, (3, 1))
    with pytest.raises(ValueError):
        ShiodaTuple(25, (1, 2, 3))
    with pytest.raises(ValueError):
        ShiodaTuple(25, (0, 25))
    with pytest.raises(ValueError):
        enumerate_tuples(24, 2)


def test_m25_d3_indecomposables_are_beta_family():
    members = enumerate_tuples(25, 3)
    kinds = {b: classify(b) for b in members}
    indec = {b for b, c in kinds.items() if c.indecomposable}
    exceptional = {b for b, c in kinds.items() if c.exceptional}
    assert indec == exceptional == {beta_family(5, i) for i in range(1, 5)}
    assert beta_family(5, 1).entries == (1, 6, 11, 16, 20, 21)


def test_classification_against_bitmask_oracle():
    for m, d in [(25, 3), (25, 4), (21, 3), (15, 3)]:
        for beta in enumerate_tuples(m, d):
            c = classify(beta)
            assert c.no_zero_subset == (not brute_has_zero_subset(m, beta.entries))
            if c.decomposition is not None:
                parts = c.decomposition
                assert sorted(x for p in parts for x in p.entries) == list(beta.entries)
                assert all(brute_member(m, p.entries) for p in parts)


def test_d1_is_paired():
    c = classify(ShiodaTuple(25, (3, 22)))
    assert c.kind == "paired" and c.no_zero_subset


def test_decomposable_witness():
    beta = next(b for b in enumerate_tuples(25, 4) if classify(b).kind == "exceptional-decomposable")
    c = classify(beta)
    assert len(c.decomposition) >= 2
    assert smallest_zero_subset(25, beta.entries) is not None


@given(st.sampled_from([9, 15, 21, 25, 27]), st.data())
@settings(max_examples=60, deadline=None)
def test_membership_agrees_with_oracle(m, data):
    size = data.draw(st.sampled_from([2, 4, 6]))
    entries = tuple(sorted(data.draw(st.sets(st.integers(1, m - 1), min_size=size, max_size=size))))
    assert is_member(m, entries) == brute_member(m, entries)


@given(st.sampled_from([3, 5, 7, 11, 13]), st.data())
@settings(max_examples=40, deadline=None)
def test_beta_family_membership(p, data):
    i = data.draw(st.integers(1, p - 1))
    beta = beta_family(p, i)
    assert beta.is_member()
    assert beta.entries.index(p * (p - i)) == p - i


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17])
def test_beta_partition(p):
    assert partition_check(p)
    values = list(itertools.chain.from_iterable(beta_family(p, i).entries for i in range(1, p)))
    assert len(values) == len(set(values)) == p * p - 1


def test_full_classification_small():
    rep = verify_indecomposable_classification(3)
    assert rep.passed and rep.family_matches
    assert {d for d, r in rep.per_d.items() if r.indecomposable} == {2}


def test_classification_reports_skips():
    rep = verify_indecomposable_classification(7, [4, 10], budget=10**6)
    assert 10 in rep.skipped
    assert rep.others_empty is None
