import pytest

from hybridntt.dataflow import EngineConfig, mode_schedule
from hybridntt.fragmentation import BadConfig
from hybridntt.twiddles import (
    arrange_twiddles,
    distinct_engine_factors,
    replication_report,
)


@pytest.fixture()
def small_assignment(ctx_cache):
    config = EngineConfig(16, 8, 2)
    schedule = mode_schedule(16, 8)
    ctx = ctx_cache.get(16)
    return config, schedule, arrange_twiddles(config, schedule, ctx)


def test_grid_shape(small_assignment):
    config, schedule, assignment = small_assignment
    units = config.p // 2
    assert len(assignment.grid) == schedule.iterations * config.s_part * units
    per_slot = 2 * config.rounds_per_iteration
    for (it, s, u), idxs in assignment.grid.items():
        if idxs:
            assert len(idxs) == per_slot


def test_first_stage_single_factor(small_assignment):
    _, _, assignment = small_assignment
    # stage 0 of a forward pass uses one distinct factor for every lane
    for it in (0, 1):
        idxs = assignment.slot(it, 0, 0)
        assert set(idxs) == {1}


def test_swap_slots_empty(small_assignment):
    config, schedule, assignment = small_assignment
    swap = schedule.second_half.swap_stages
    assert swap == 2
    for it in (2, 3):
        for s in range(swap):
            for u in range(config.p // 2):
                assert assignment.slot(it, s, u) == []
    # and the final stage of the second half is populated
    assert assignment.slot(2, 2, 0)


def test_engine_distinct_count(small_assignment):
    _, _, assignment = small_assignment
    assert distinct_engine_factors(assignment) == set(range(1, 8))


def test_second_half_walks_remaining_table(small_assignment):
    _, _, assignment = small_assignment
    assert set(assignment.slot(2, 2, 0)) == {8, 9, 10, 11}
    assert set(assignment.slot(3, 2, 0)) == {12, 13, 14, 15}


def test_replication_counts(small_assignment):
    _, _, assignment = small_assignment
    stats = replication_report(assignment)
    # per-iteration slot uniques: first half 1+2+4 per pass (x2 passes),
    # second half 4 per pass (x2): 22 total
    assert stats.copies == 22
    assert stats.distinct == 7
    assert stats.ratio == pytest.approx(22 / 7)
    # per-(stage, unit) stores across iterations: 1+2+4 first half tables
    # plus the 8 second-half entries streamed through stage 2
    assert stats.store_copies == 15
    assert stats.transform_distinct == 15


def test_single_pass_assignment(ctx_cache):
    config = EngineConfig(256, 256, 16)
    schedule = mode_schedule(256, 256)
    ctx = ctx_cache.get(256)
    assignment = arrange_twiddles(config, schedule, ctx)
    assert len(distinct_engine_factors(assignment)) == 255
    stats = replication_report(assignment)
    assert stats.transform_distinct == 255


def test_larger_engines_distinct(ctx_cache):
    for n, n_part, p in [(4096, 64, 16), (1 << 13, 256, 16)]:
        config = EngineConfig(n, n_part, p)
        schedule = mode_schedule(n, n_part)
        ctx = ctx_cache.get(n)
        assignment = arrange_twiddles(config, schedule, ctx)
        assert len(distinct_engine_factors(assignment)) == n_part - 1


def test_context_mismatch_rejected(ctx_cache):
    config = EngineConfig(16, 8, 2)
    schedule = mode_schedule(16, 8)
    with pytest.raises(BadConfig):
        arrange_twiddles(config, schedule, ctx_cache.get(8))
    with pytest.raises(BadConfig):
        arrange_twiddles(EngineConfig(32, 8, 2), schedule, ctx_cache.get(32))
