"""Unit tests for the discrete-law algebra."""

import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recdist import CapacityError, Pmf, PreconditionError

HALF = F(1, 2)


def coin() -> Pmf:
    return Pmf.from_atoms([(0, HALF), (1, HALF)])


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------


def test_atoms_sorted_and_merged():
    p = Pmf.from_atoms([(2, F(1, 4)), (0, F(1, 4)), (2, F(1, 2))])
    assert p.values == (0, 2)
    assert p.probs == (F(1, 4), F(3, 4))


def test_float_merge_tolerance():
    p = Pmf.from_atoms([(1.0, 0.5), (1.0 + 1e-14, 0.25), (2.0, 0.25)])
    assert len(p.values) == 2


def test_negative_prob_rejected():
    with pytest.raises(PreconditionError):
        Pmf((0, 1), (F(3, 2), F(-1, 2)))


def test_mass_deviation_rejected():
    with pytest.raises(PreconditionError):
        Pmf((0,), (0.5,))


def test_duplicate_values_rejected():
    with pytest.raises(PreconditionError):
        Pmf((1, 1), (HALF, HALF))


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------


def test_convolve_coins():
    q = coin().convolve(coin())
    assert q.values == (0, 1, 2)
    assert q.probs == (F(1, 4), F(1, 2), F(1, 4))


def test_convolve_point_masses():
    assert Pmf.delta(3).convolve(Pmf.delta(4)).values == (7,)


def test_convolve_identity_element():
    p = Pmf.from_atoms([(1, F(1, 3)), (2, F(1, 2)), (3, F(1, 6))])
    q = p.convolve(Pmf.delta(0))
    assert q.values == p.values and q.probs == p.probs


def test_convolve_overflow_reported():
    big = Pmf.delta(1e308)
    with pytest.raises(CapacityError):
        big.convolve(big)


# ---------------------------------------------------------------------------
# affine maps
# ---------------------------------------------------------------------------


def test_affine_point():
    assert Pmf.delta(1).affine(2, 3).values == (5,)


def test_affine_reflection():
    p = coin().affine(-1, 0)
    assert p.values == (-1, 0)
    assert p.probs == (HALF, HALF)


def test_affine_identity():
    p = coin()
    q = p.affine(1, 0)
    assert q.values == p.values and q.probs == p.probs


def test_affine_zero_scale_rejected():
    with pytest.raises(PreconditionError):
        coin().affine(0, 1)


# ---------------------------------------------------------------------------
# mixtures
# ---------------------------------------------------------------------------


def test_mix_two_points():
    p = Pmf.mix([(HALF, Pmf.delta(0)), (HALF, Pmf.delta(1))])
    assert p.values == (0, 1) and p.probs == (HALF, HALF)


def test_mix_single_component():
    p = Pmf.from_atoms([(1, F(1, 3)), (2, F(2, 3))])
    q = Pmf.mix([(1, p)])
    assert q.values == p.values and q.probs == p.probs


def test_mix_merges_atoms():
    third = F(1, 3)
    p = Pmf.mix([(third, Pmf.delta(1)), (third, Pmf.delta(1)), (third, Pmf.delta(2))])
    assert p.values == (1, 2)
    assert p.probs == (F(2, 3), F(1, 3))


def test_mix_negative_weight_rejected():
    with pytest.raises(PreconditionError):
        Pmf.mix([(-0.5, Pmf.delta(0)), (1.5, Pmf.delta(1))])


def test_mix_weight_sum_violation_rejected():
    with pytest.raises(PreconditionError):
        Pmf.mix([(0.6, Pmf.delta(0)), (0.6, Pmf.delta(1))])


# ---------------------------------------------------------------------------
# moments and cdf
# ---------------------------------------------------------------------------


def test_central_second_moment():
    p = Pmf.from_atoms([(-1, HALF), (1, HALF)])
    assert p.moment(2, central=True) == 1


def test_raw_mean_exact():
    p = Pmf.from_atoms([(1, F(1, 3)), (2, F(1, 2)), (3, F(1, 6))])
    assert p.moment(1) == F(11, 6)


def test_point_mass_central_moments_vanish():
    d = Pmf.delta(F(7, 3))
    assert d.moment(1, central=True) == 0
    assert d.moment(2, central=True) == 0
    assert d.moment(5, central=True) == 0


def test_moment_order_validated():
    with pytest.raises(PreconditionError):
        coin().moment(0)


def test_cdf_at_atom():
    assert coin().cdf_at(0) == 0.5


def test_cdf_below_support():
    assert coin().cdf_at(-100) == 0.0


def test_cdf_above_support_excludes_lost_mass():
    p = Pmf((1,), (0.9999999999999,), 1e-13)
    assert p.cdf_at(100) == pytest.approx(1 - 1e-13)


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


def test_truncate_zero_budget_is_identity():
    p = coin()
    assert p.truncate_tail(0) is p


def test_truncate_outer_atom():
    p = Pmf.from_atoms([(0, 1e-15), (1, 1 - 1e-15)])
    q = p.truncate_tail(1e-12)
    assert q.values == (1,)
    assert float(q.lost_mass) == pytest.approx(1e-15)


def test_truncate_keeps_mass_invariant():
    p = Pmf.from_atoms([(i, 2.0 ** -(i + 1)) for i in range(40)] + [(40, 2.0**-40)])
    q = p.truncate_tail(1e-6)
    assert math.fsum(float(x) for x in q.probs) + float(q.lost_mass) == pytest.approx(1.0, abs=1e-12)
    assert q.lost_mass <= 1e-6


# ---------------------------------------------------------------------------
# algebraic properties (exact rational mode)
# ---------------------------------------------------------------------------

def _build_pmf(pairs):
    dedup = {v: w for v, w in pairs}
    total = sum(dedup.values())
    return Pmf.from_atoms([(v, F(w, total)) for v, w in dedup.items()])


rational_pmfs = st.lists(
    st.tuples(st.integers(-20, 20), st.integers(1, 12)), min_size=1, max_size=5
).map(_build_pmf)


@settings(max_examples=60, deadline=None)
@given(rational_pmfs, rational_pmfs)
def test_convolve_commutes(a, b):
    ab, ba = a.convolve(b), b.convolve(a)
    assert ab.values == ba.values and ab.probs == ba.probs


@settings(max_examples=40, deadline=None)
@given(rational_pmfs, rational_pmfs, rational_pmfs)
def test_convolve_associates(a, b, c):
    left = a.convolve(b).convolve(c)
    right = a.convolve(b.convolve(c))
    assert left.values == right.values and left.probs == right.probs


@settings(max_examples=60, deadline=None)
@given(rational_pmfs, rational_pmfs)
def test_mean_additivity_exact(a, b):
    assert a.convolve(b).moment(1) == a.moment(1) + b.moment(1)


@settings(max_examples=60, deadline=None)
@given(rational_pmfs, rational_pmfs)
def test_variance_additivity_exact(a, b):
    assert a.convolve(b).moment(2, central=True) == a.moment(2, central=True) + b.moment(
        2, central=True
    )


@settings(max_examples=60, deadline=None)
@given(rational_pmfs, st.fractions(F(-5), F(5)), st.fractions(F(-5), F(5)))
def test_affine_roundtrip_exact(p, s, t):
    if s == 0:
        return
    q = p.affine(s, t).affine(1 / s, -t / s)
    assert q.values == p.values and q.probs == p.probs


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_json_roundtrip():
    p = Pmf.from_atoms([(F(1, 3), 0.25), (2, 0.75)])
    q = Pmf.from_json_dict(json.loads(p.to_json()))
    assert q.values == p.values
    assert all(abs(float(a) - float(b)) < 1e-15 for a, b in zip(q.probs, p.probs))


def test_csv_shape():
    text = coin().to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "value,prob"
    assert len(lines) == 3
