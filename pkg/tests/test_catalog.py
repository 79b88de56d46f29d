"""Tests for the model catalog: joint laws, tolls, and parameters."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from recdist import (
    PreconditionError,
    SolveOptions,
    Solver,
    broadcast_index_pmf,
    leader_election_rounds,
    make,
    rate_exponent,
)
from recdist.catalog import NAMES, fit_variance_constant


def test_all_entries_constructible():
    for name in NAMES:
        entry = make(name)
        assert entry.spec.n0 >= 1


def test_hyphenated_names_accepted():
    assert make("unsuccessful-search").name == "unsuccessful_search"


def test_unknown_name_rejected():
    with pytest.raises(PreconditionError):
        make("bogosort")


def test_quickselect_is_nondegenerate():
    assert make("quickselect").params is None
    assert not make("quickselect").degenerate


def test_broadcast_b_is_sampler_only():
    assert not make("broadcast_b_time").spec.supports_exact()


# ---------------------------------------------------------------------------
# broadcast joint index law
# ---------------------------------------------------------------------------


def test_broadcast_index_pmf_n2_frozen():
    law = broadcast_index_pmf(2)
    assert law == {
        (0, 0): F(1, 4),
        (1, 0): F(1, 4),
        (2, 0): F(1, 4),
        (1, 1): F(1, 4),
    }


@pytest.mark.parametrize("n", [1, 2, 3, 8, 16, 33, 64])
def test_broadcast_index_pmf_sums_to_one_exactly(n):
    assert sum(broadcast_index_pmf(n).values()) == 1


@pytest.mark.parametrize("n", [2, 5, 16, 40])
def test_broadcast_leading_marginal_is_binomial(n):
    law = broadcast_index_pmf(n)
    marg: dict = {}
    for (j, _), w in law.items():
        marg[j] = marg.get(j, F(0)) + w
    for j in range(n + 1):
        assert marg.get(j, F(0)) == F(math.comb(n, j), 2**n)


@pytest.mark.parametrize("n", [2, 5, 16, 40])
def test_broadcast_trailing_marginal(n):
    law = broadcast_index_pmf(n)
    marg: dict = {}
    for (_, k), w in law.items():
        marg[k] = marg.get(k, F(0)) + w
    assert marg[0] == F(1, 2) + F(1, 2**n)
    for k in range(1, n):
        assert marg[k] == F(1, 2 ** (k + 1))


@pytest.mark.parametrize("n", [2, 7, 20])
def test_broadcast_self_weight_is_two_to_minus_n(n):
    law = broadcast_index_pmf(n)
    self_mass = sum(w for (j, k), w in law.items() if j == n or k == n)
    assert self_mass == F(1, 2**n)
    assert self_mass < 1


def test_vector_law_expands_to_joint_law():
    for name in ("unsuccessful_search", "node_depth", "quickselect", "broadcast_a_time"):
        spec = make(name).spec
        for n in (2, 3, 7, 12):
            groups, lone = spec.vector_law(n)
            expanded: dict = {}
            for g in groups:
                for off, w in enumerate(g.weights):
                    if w == 0:
                        continue
                    key = ((g.first_start + off, *g.others), g.toll)
                    expanded[key] = expanded.get(key, 0.0) + g.scale * float(w)
            for idx, toll, w in lone:
                key = (tuple(idx), toll)
                expanded[key] = expanded.get(key, 0.0) + float(w)
            reference = {}
            for idx, toll, w in spec.joint_atoms(n):
                key = (tuple(idx), toll)
                reference[key] = reference.get(key, 0.0) + float(w)
            assert set(expanded) == set(reference)
            for key in reference:
                assert expanded[key] == pytest.approx(reference[key], rel=1e-12)


def test_broadcast_sampler_matches_joint_law():
    spec = make("broadcast_a_time").spec
    rng = np.random.default_rng(31337)
    n, runs = 10, 400_000
    idx, _ = spec.sampler(rng, n, runs)
    emp: dict = {}
    for j, k in zip(idx[0].tolist(), idx[1].tolist()):
        emp[(j, k)] = emp.get((j, k), 0) + 1
    ref = {key: float(w) for key, w in broadcast_index_pmf(n).items()}
    tv = 0.5 * sum(
        abs(emp.get(key, 0) / runs - ref.get(key, 0.0)) for key in set(emp) | set(ref)
    )
    assert tv < 0.005


# ---------------------------------------------------------------------------
# leader election
# ---------------------------------------------------------------------------


def test_single_contender_elects_immediately():
    rng = np.random.default_rng(1)
    assert leader_election_rounds(1, rng) == 0


def test_two_contender_mean_rounds():
    # each round resolves with probability 1/2, so rounds ~ geometric(1/2)
    rng = np.random.default_rng(2)
    rounds = leader_election_rounds(np.full(1_000_000, 2), rng)
    se = float(np.std(rounds)) / math.sqrt(len(rounds))
    assert abs(float(np.mean(rounds)) - 2.0) <= 3 * se


def test_election_third_moment_scales_like_log_cubed():
    rng = np.random.default_rng(3)
    ratios = []
    for e in range(4, 11):
        m = 2**e
        rounds = leader_election_rounds(np.full(20_000, m), rng)
        ratios.append(float(np.mean(rounds.astype(float) ** 3)) / math.log(m) ** 3)
    assert max(ratios) / min(ratios) < 4.0


def test_contender_count_validated():
    with pytest.raises(PreconditionError):
        leader_election_rounds(0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# growth constants
# ---------------------------------------------------------------------------


def test_search_cost_mean_is_harmonic(solver_us):
    # uniform surviving-subtree law: mean is exactly H_{n-1}
    for n in (10, 100, 1000):
        h = sum(1.0 / i for i in range(1, n))
        assert float(solver_us.mean(n)) == pytest.approx(h, abs=1e-9)


def test_search_cost_centered_moments_stabilize(solver_us):
    means = [float(solver_us.mean(2**e)) - math.log(2**e) for e in range(4, 14)]
    variances = [float(solver_us.variance(2**e)) - math.log(2**e) for e in range(4, 14)]
    assert max(means) - min(means) < 0.1
    assert max(variances) - min(variances) < 0.2


def test_node_depth_centered_moments_stabilize(solver_nd):
    means = [float(solver_nd.mean(2**e)) - 2 * math.log(2**e) for e in range(4, 14)]
    variances = [float(solver_nd.variance(2**e)) - 2 * math.log(2**e) for e in range(4, 14)]
    assert max(means) - min(means) < 0.7
    assert max(variances) - min(variances) < 1.2


def test_all_degenerate_entries_pass_the_gate():
    for name in NAMES:
        entry = make(name)
        if entry.params is None:
            continue
        gate = rate_exponent(entry.params, entry.spec.k)
        assert gate.beta == 1.5 and gate.applicable


def test_fit_variance_constant_broadcast(solver_bt):
    entry = make("broadcast_a_time")
    fitted = fit_variance_constant(entry, [256, 512, 1024])
    assert fitted.c_is_fitted
    assert 3.0 < fitted.params.c < 7.0
