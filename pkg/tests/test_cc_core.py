import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from cc_core import (
    Confidence, ObjectiveVector, StochItem, dominates, f_lambda, g_value, k_alpha,
    k_alpha_from_beta, lambda_set, lambda_threshold, normal_cdf, normal_sf, strongly_dominates,
)
from cc_utils import ContractViolation, DomainError


# ==================== 標準正規分布 ====================

@pytest.mark.parametrize("x", [-6.0, -2.5, -1.0, 0.0, 0.3, 1.0, 2.0, 2.999, 3.0, 4.5, 8.0])
def test_normal_cdf_matches_scipy(x):
    assert normal_cdf(x) == pytest.approx(norm.cdf(x), abs=1e-12)


@pytest.mark.parametrize("x", [3.0, 5.0, 8.0, 8.3, 10.0])
def test_upper_tail_keeps_relative_precision(x):
    assert normal_sf(x) == pytest.approx(norm.sf(x), rel=1e-8)


def test_k_alpha_round_trip_on_grid():
    grid = np.linspace(0.5, 0.9999, 200)
    previous = -1.0
    for alpha in grid:
        k = k_alpha(float(alpha))
        assert k >= 0.0
        assert abs(normal_cdf(k) - alpha) <= 1e-9
        assert abs(norm.cdf(k) - alpha) <= 1e-9
        assert k >= previous
        previous = k


def test_k_alpha_examples():
    assert k_alpha(0.5) == 0.0
    assert k_alpha(0.84134) == pytest.approx(1.0, abs=1e-4)
    k = k_alpha(0.975)
    assert abs(normal_cdf(k) - 0.975) <= 1e-9
    assert k == pytest.approx(1.959963984540054, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.4999, 1.0, 1.5, -0.1, float('nan')])
def test_k_alpha_rejects_out_of_domain(alpha):
    with pytest.raises(DomainError):
        k_alpha(alpha)


@pytest.mark.parametrize("beta", [0.2, 1e-4, 1e-10, 1e-16])
def test_k_alpha_from_beta_tail(beta):
    assert k_alpha_from_beta(beta) == pytest.approx(norm.isf(beta), abs=1e-7)


def test_confidence_constructors():
    conf = Confidence.from_beta(1e-2)
    assert conf.alpha == pytest.approx(0.99)
    assert conf.k_alpha == pytest.approx(norm.ppf(0.99), abs=1e-8)

    unit = Confidence.from_k_alpha(1.0)
    assert unit.k_alpha == 1.0
    assert unit.alpha == pytest.approx(0.8413447460685429, abs=1e-12)

    with pytest.raises(DomainError):
        Confidence(alpha=0.9, k_alpha=-1.0)


# ==================== ドメイン型 ====================

def test_stoch_item_validation():
    StochItem(1.0, 1.0)
    with pytest.raises(DomainError):
        StochItem(0.5, 2.0)
    with pytest.raises(DomainError):
        StochItem(2.0, float('inf'))
    # 支配集合のノード重みは 0 を許す
    assert StochItem(0.0, 0.0, lower_bound=0.0).mu == 0.0


def test_objective_vector_rejects_negative():
    with pytest.raises(ContractViolation):
        ObjectiveVector(-1.0, 2.0)
    with pytest.raises(ContractViolation):
        ObjectiveVector(1.0, float('nan'))


# ==================== g と f_λ ====================

@pytest.mark.parametrize("mu,var,k,expected", [
    (3, 5, 1.0, 3 + math.sqrt(5)),
    (7, 0, 2.5, 7.0),
    (0, 4, 2.0, 4.0),
])
def test_g_value(mu, var, k, expected):
    conf = Confidence(alpha=normal_cdf(k), k_alpha=k)
    assert g_value(mu, var, conf) == pytest.approx(expected)


def test_g_value_rejects_negative_totals():
    with pytest.raises(ContractViolation):
        g_value(-1.0, 2.0, Confidence.from_alpha(0.9))


@pytest.mark.parametrize("lam,expected", [(1, 10), (0, 4), (0.25, 5.5)])
def test_f_lambda(lam, expected):
    assert f_lambda(ObjectiveVector(10, 4), lam) == pytest.approx(expected)


def test_f_lambda_on_item_and_domain():
    assert f_lambda(StochItem(10, 4), 0.25) == pytest.approx(5.5)
    with pytest.raises(DomainError):
        f_lambda(ObjectiveVector(1, 1), 1.5)


# ==================== 支配関係 ====================

def test_dominance_examples():
    a, b = ObjectiveVector(1, 2), ObjectiveVector(1, 2)
    assert dominates(a, b) and not strongly_dominates(a, b)
    assert dominates(ObjectiveVector(1, 1), ObjectiveVector(2, 2))
    assert strongly_dominates(ObjectiveVector(1, 1), ObjectiveVector(2, 2))
    p, q = ObjectiveVector(1, 3), ObjectiveVector(3, 1)
    assert not dominates(p, q) and not dominates(q, p)
    assert not strongly_dominates(p, q) and not strongly_dominates(q, p)


def test_dominance_preorder_properties():
    rng = random.Random(7)
    points = [ObjectiveVector(rng.randint(0, 5), rng.randint(0, 5)) for _ in range(40)]
    for a in points:
        assert dominates(a, a)
        assert not strongly_dominates(a, a)
        for b in points:
            if strongly_dominates(a, b):
                assert dominates(a, b)
            for c in points:
                if dominates(a, b) and dominates(b, c):
                    assert dominates(a, c)
                if strongly_dominates(a, b) and strongly_dominates(b, c):
                    assert strongly_dominates(a, c)


# ==================== λ閾値 ====================

def test_lambda_threshold_examples():
    assert lambda_threshold(StochItem(3, 1), StochItem(1, 2)) == pytest.approx(1 / 3)
    assert lambda_threshold(StochItem(1, 1), StochItem(2, 2)) is None
    assert lambda_threshold(StochItem(5, 1), StochItem(1, 5)) == 0.5


def test_order_switches_exactly_at_threshold():
    rng = random.Random(11)
    checked = 0
    while checked < 10_000:
        a = StochItem(rng.randint(1, 100), rng.randint(1, 100))
        b = StochItem(rng.randint(1, 100), rng.randint(1, 100))
        t = lambda_threshold(a, b)
        if t is None:
            continue
        checked += 1
        assert 0 < t < 1
        below, above = t / 2, (t + 1) / 2
        assert f_lambda(a, below) < f_lambda(b, below)
        assert abs(f_lambda(a, t) - f_lambda(b, t)) <= 1e-12 * max(a.mu, b.var)
        assert f_lambda(a, above) > f_lambda(b, above)


def test_lambda_set_examples():
    comparable = lambda_set([StochItem(1, 1), StochItem(2, 2)])
    assert comparable.values == (0.0, 1.0)
    assert comparable.pair_count == 0

    single = lambda_set([StochItem(3, 1), StochItem(1, 2)])
    assert single.exact == (Fraction(0), Fraction(1, 3), Fraction(1))
    assert single.pair_count == 1
    # 逆順でも同じ閾値
    assert lambda_set([StochItem(1, 2), StochItem(3, 1)]).exact == single.exact

    with pytest.raises(DomainError):
        lambda_set([])


def test_lambda_set_size_bound_and_reproducible():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(1, 12)
        items = [StochItem(rng.randint(1, 20), rng.randint(1, 20)) for _ in range(n)]
        lset = lambda_set(items)
        assert lset.values[0] == 0.0 and lset.values[-1] == 1.0
        assert all(x < y for x, y in zip(lset.values, lset.values[1:]))
        assert len(lset) <= lset.pair_count + 2 <= n * (n - 1) // 2 + 2
        assert lambda_set(items) == lset


def test_lambda_set_real_valued_dedup():
    items = [StochItem(3.5, 1.25), StochItem(1.5, 2.25), StochItem(5.5, 1.0), StochItem(3.5, 1.25)]
    lset = lambda_set(items)
    assert lset.exact is None
    assert lset.values[0] == 0.0 and lset.values[-1] == 1.0
    # 重複アイテムの閾値は1つにまとまる
    assert lset.pair_count == 5
    assert len(lset) == 2 + 3
