"""Random pairing plans: degree structure, history exclusion, determinism."""

import pytest

from prefeval.campaign.pairing import plan_reduction_round, plan_round_robin
from prefeval.campaign.pool import CandidatePool
from prefeval.campaign.state import CampaignError


def _pool(n, topic="t", round=1):
    return CandidatePool(topic, frozenset(f"d{i:02d}" for i in range(n)), "reduction", round)


def test_even_pool_all_degrees_equal():
    plan = plan_reduction_round(_pool(10), 7, seed=0)
    assert len(plan.pairs) == 35
    assert set(plan.degrees().values()) == {7}


def test_odd_product_gets_one_extra_degree():
    plan = plan_reduction_round(_pool(9), 7, seed=0)
    assert len(plan.pairs) == 32
    degrees = sorted(plan.degrees().values())
    assert degrees == [7] * 8 + [8]


def test_degree_structure_across_pool_sizes():
    for n in range(9, 31):
        plan = plan_reduction_round(_pool(n), 7, seed=3)
        degrees = plan.degrees()
        assert set(degrees) == {f"d{i:02d}" for i in range(n)}
        total = sum(degrees.values())
        assert total % 2 == 0
        extra = [d for d in degrees.values() if d == 8]
        if (n * 7) % 2 == 1:
            assert len(extra) == 1
        else:
            assert not extra
        assert set(degrees.values()) <= {7, 8}


def test_plan_is_deterministic_per_seed():
    a = plan_reduction_round(_pool(12), 7, seed=42)
    b = plan_reduction_round(_pool(12), 7, seed=42)
    assert a == b
    c = plan_reduction_round(_pool(12), 7, seed=43)
    assert a != c


def test_plan_varies_with_round_number():
    a = plan_reduction_round(_pool(12, round=1), 7, seed=42)
    b = plan_reduction_round(_pool(12, round=2), 7, seed=42)
    assert a.pairs != b.pairs


def test_history_pairs_are_never_reissued():
    # Three rounds of 7 fresh partners per node need n - 1 >= 21.
    pool = _pool(24)
    history = set()
    for round in range(1, 4):
        plan = plan_reduction_round(
            CandidatePool(pool.topic_id, pool.candidates, "reduction", round),
            7,
            seed=7,
            history=history,
        )
        assert not (plan.pairs & history)
        history |= plan.pairs


def test_pairings_must_fit_pool():
    with pytest.raises(ValueError, match="cannot pair"):
        plan_reduction_round(_pool(7), 7, seed=0)
    with pytest.raises(ValueError, match="pairings must be"):
        plan_reduction_round(_pool(10), 0, seed=0)


def test_exhausted_partner_supply_raises_campaign_error():
    # After the full round robin is in the history, nothing is left to pair.
    pool = _pool(10)
    history = plan_round_robin(pool).pairs
    with pytest.raises(CampaignError, match="topic t"):
        plan_reduction_round(pool, 7, seed=0, history=history)


def test_near_exhaustion_still_infeasible_is_reported():
    # 9 candidates, degree-7 wanted, but d00 has judged all but one partner.
    pool = _pool(9)
    history = {(f"d00", f"d{i:02d}") for i in range(1, 8)}
    with pytest.raises(CampaignError, match="d00"):
        plan_reduction_round(pool, 7, seed=0, history=history)


def test_round_robin_enumerates_every_pair():
    plan = plan_round_robin(_pool(9))
    assert len(plan.pairs) == 36
    assert len(plan_round_robin(_pool(2)).pairs) == 1
    assert len(plan_round_robin(_pool(1)).pairs) == 0


def test_pairs_are_canonical_and_self_free():
    plan = plan_reduction_round(_pool(15), 7, seed=1)
    for a, b in plan.pairs:
        assert a < b
