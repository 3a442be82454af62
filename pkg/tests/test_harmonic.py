import random
from fractions import Fraction

import pytest

from conftest import guillotine_rectangles, stick_break
from segpack.binpack import SizeProfile, solve_fbp
from segpack.errors import ContractError, DomainError
from segpack.harmonic import (T_k, f_k, harmonic_scaled_fn, harmonic_type,
                              identity_fn, m_of_k, make_g, modified_volume,
                              step_fn, t_sequence)
from segpack.model import Box3

F = Fraction


def test_t_sequence():
    assert t_sequence(5) == [1, 2, 6, 42, 1806]


def test_m_of_k():
    assert m_of_k(2) == 1
    assert m_of_k(3) == 2
    assert m_of_k(6) == 2
    assert m_of_k(7) == 3
    assert m_of_k(42) == 3
    assert m_of_k(43) == 4
    assert m_of_k(1806) == 4
    assert m_of_k(1807) == 5


def test_harmonic_type_examples():
    assert harmonic_type("0.5", 10) == 2
    assert harmonic_type(1, 10) == 1
    assert harmonic_type("0.05", 10) == 10
    # boundary: exactly 1/t belongs to type t
    assert harmonic_type(F(1, 3), 10) == 3
    with pytest.raises(DomainError):
        harmonic_type(0, 10)
    with pytest.raises(DomainError):
        harmonic_type("1.5", 10)


def test_f_k_examples():
    assert f_k("0.6", 10) == 1
    assert f_k("0.3", 10) == F(1, 3)
    assert f_k("0.05", 10) == F(1, 18)


def test_T_k_values():
    assert T_k(2) == 2
    assert T_k(3) == F(7, 4)
    assert T_k(7) == F(61, 36)
    assert abs(float(T_k(1806)) - 1.69103) < 1e-4
    assert abs(float(T_k(1807)) - 1.69103) < 1e-4


def test_T_k_against_partial_sum_recurrence():
    # independent computation: accumulate 1/t_i alongside the recurrence and
    # evaluate at each boundary k = t_i + 1
    partial = F(0)
    t = 1
    ts = []
    for _ in range(5):
        ts.append(t)
        t = t * (t + 1)
    for i, ti in enumerate(ts[:-1]):
        k = ti + 1
        expected = sum(F(1, x) for x in ts[:i + 1]) + \
            F(1, ts[i + 1]) * F(k, k - 1)
        assert T_k(k) == expected
    # T_k decreases across each t-gap as k grows
    for k in (2, 3, 5, 6, 7, 20, 42, 43, 100):
        assert T_k(k) >= T_k(k + 1)


def test_step_fn_examples():
    g = step_fn((F("0.6"), F("0.3")), (F("0.9"), F("0.4")))
    assert g("0.7") == F(9, 10)
    assert g("0.4") == F(4, 10)
    assert g("0.2") == 0
    assert g(0) == 0
    assert g(1) == F(9, 10)
    assert g("0.6") == F(9, 10)   # breakpoint belongs to the higher price
    assert g("0.3") == F(4, 10)


def test_step_fn_contract_errors():
    with pytest.raises(ContractError):
        step_fn((F("0.3"), F("0.6")), (F("0.9"), F("0.4")))  # not decreasing
    with pytest.raises(ContractError):
        step_fn((F("0.6"), F("0.3")), (F("0.4"), F("0.9")))  # prices rising


def test_identity_is_dual_feasible(rng):
    ident = identity_fn()
    for _ in range(200):
        xs = stick_break(rng)
        assert sum(ident(x) for x in xs) <= 1


def test_weight_cap_property(rng):
    # sum of f_k over any unit-sum sequence stays below T_k
    for k in (3, 10, 50):
        cap = T_k(k)
        for _ in range(400):
            xs = stick_break(rng)
            assert sum(f_k(x, k) for x in xs) <= cap


def test_scaled_harmonic_and_dual_step_are_dual_feasible(rng):
    profile = SizeProfile.from_sizes([F(6, 10)] * 2 + [F(4, 10)] * 3
                                     + [F(3, 10)] * 2)
    g = make_g(solve_fbp(profile).dual)
    fns = [harmonic_scaled_fn(5), g]
    for fn in fns:
        for _ in range(300):
            xs = stick_break(rng)
            assert sum(fn(x) for x in xs) <= 1


def test_product_bound_on_packable_rectangles(rng):
    # rectangles cut from the unit square are packable by construction, so
    # any two dual-feasible functions bound the weighted sum by 1
    profile = SizeProfile.from_sizes([F(1, 2), F(1, 3), F(1, 3), F(1, 5)])
    g = make_g(solve_fbp(profile).dual)
    fns = [identity_fn(), harmonic_scaled_fn(4), g]
    for _ in range(60):
        rects = guillotine_rectangles(rng)
        for f1 in fns:
            for f2 in fns:
                total = sum(f1(l) * f2(w) for l, w in rects)
                assert total <= 1


def test_modified_volume_examples():
    ident = identity_fn()
    assert modified_volume(Box3(F(6, 10), F(1, 2), F(1, 2), 0), 10, ident) \
        == F(1, 4)
    assert modified_volume(Box3(F(1), F(1), F(1), 0), 10, ident) == 1
    assert modified_volume(Box3(F(1, 20), F(1, 5), F(1), 0), 10, ident) \
        == F(1, 90)
